#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "mesoc/errors.hpp"
#include "mesoc/mesoc.hpp"
#include "mesoc/oracle.hpp"
#include "mesoc/portfolio.hpp"
#include "support/oracles.hpp"

using namespace mesoc;
using namespace mesoc::portfolio;
using mesoc::testing::gaussian_vector;
using mesoc::testing::uniform_size;

namespace {

ScenarioData from_csv(const std::string& text, CsvOptions opts = {}) {
  std::istringstream in(text);
  return load_scenarios(in, opts);
}

// c0 large enough that the model is bounded below.
double safe_c0(const ScenarioData& data, double uscale) {
  const RealVector r = expected_returns(data);
  const double mean = sum(r) / static_cast<double>(r.size());
  double g = 0.0;
  for (double x : r) g += (x - mean) * (x - mean);
  return std::max(1.0, 3.0 * std::sqrt(g) / uscale);
}

ScenarioData random_scenarios(std::mt19937_64& rng, std::size_t T, std::size_t n, bool weighted) {
  std::vector<RealVector> rows;
  for (std::size_t j = 0; j < T; ++j) rows.push_back(gaussian_vector(rng, n, 0.05));
  if (!weighted) return make_scenarios(rows);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  RealVector f(T);
  for (double& x : f) x = unit(rng);
  const double s = sum(f);
  for (double& x : f) x /= s;
  // Renormalise the last entry so the sum is 1 to rounding.
  double head = 0.0;
  for (std::size_t j = 0; j + 1 < T; ++j) head += f[j];
  f[T - 1] = 1.0 - head;
  return make_scenarios(rows, f);
}

}  // namespace

TEST_CASE("load_scenarios: expected returns") {
  const auto uniform = from_csv("0.1,0.0\n-0.1,0.2\n");
  CHECK(uniform.scenarios == 2);
  CHECK(uniform.assets == 2);
  const RealVector r = expected_returns(uniform);
  CHECK(std::abs(r[0]) <= 1e-15);
  CHECK(r[1] == doctest::Approx(0.1).epsilon(1e-15));

  const auto weighted = make_scenarios({{0.1, 0.0}, {-0.1, 0.2}}, RealVector{0.25, 0.75});
  const RealVector rw = expected_returns(weighted);
  CHECK(rw[0] == doctest::Approx(-0.05).epsilon(1e-14));
  CHECK(rw[1] == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("load_scenarios: validation") {
  CHECK_THROWS_AS(make_scenarios({{0.1, 0.0}, {-0.1, 0.2}}, RealVector{0.5, 0.4}), ModelError);
  CHECK_THROWS_AS(make_scenarios({{0.1, 0.0}, {-0.1, 0.2}}, RealVector{1.5, -0.5}), ModelError);
  CHECK_THROWS_AS(make_scenarios({{0.1, 0.0}, {-0.1}}), DimensionError);
  CHECK_THROWS_AS(make_scenarios({}), DimensionError);
  CHECK_THROWS_AS(from_csv("0.1,0.0\n-0.1\n"), ParseError);
  CHECK_THROWS_AS(from_csv("0.1,0.0\n-0.1,abc\n"), ParseError);
  CHECK_THROWS_AS(from_csv("A,B\n0.1,0.0\n-0.1,1e\n"), ParseError);
  CHECK_THROWS_AS(from_csv(""), ParseError);
  CHECK_THROWS_AS(from_csv("a,b\n"), ParseError);
}

TEST_CASE("load_scenarios: header and probability column") {
  const auto by_name = from_csv("A,B,prob\n0.1,0.0,0.25\n-0.1,0.2,0.75\n", {"prob"});
  CHECK(by_name.assets == 2);
  CHECK(by_name.probabilities == RealVector{0.25, 0.75});
  const auto by_index = from_csv("0.25,0.1,0.0\n0.75,-0.1,0.2\n", {"0"});
  CHECK(by_index.assets == 2);
  CHECK(by_index.at(1, 1) == 0.2);
  const auto header_only = from_csv("A,B\n0.1,0.0\n-0.1,0.2\n\n");
  CHECK(header_only.scenarios == 2);
  CHECK_THROWS_AS(from_csv("A,B\n0.1,0.0\n", {"missing"}), ParseError);
  CHECK_THROWS_AS(from_csv("0.1,0.0\n", {"7"}), ParseError);
  CHECK_THROWS_AS(from_csv("A,prob\n0.1,0.5\n0.2,0.4\n", {"prob"}), ModelError);
}

TEST_CASE("select_jstar and model construction") {
  const std::vector<RealVector> U{{1, 0}, {0, 2}};
  const RealVector half{0.5, 0.5};
  CHECK(select_jstar(U, half) == 0);
  CHECK(norm(U[0]) == 1.0);
  CHECK(select_jstar({{1, 0}, {0, 1}}, half) == 0);  // tie keeps the first index
  CHECK(select_jstar({{0, 3}, {1, 0}}, half) == 1);

  // Two uniform scenarios: U_1 = -U_2, every w ties.
  const auto data = make_scenarios({{0.1, 0.0}, {-0.1, 0.2}});
  const MadModel m = build_mad_model(data, 2.0, half);
  CHECK(m.jstar == 0);
  CHECK(m.uscale == doctest::Approx(std::sqrt(0.02)).epsilon(1e-14));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(0.5 * m.deviations[0][i] + 0.5 * m.deviations[1][i]) <= 1e-15);
  }
  // Layout: cost on (y_2, y_1, u).
  CHECK(m.cost[0] == doctest::Approx(1.0));
  CHECK(m.cost[1] == doctest::Approx(1.0));
  CHECK(m.cost[2] == doctest::Approx(-m.r[0] / m.uscale));

  const auto weighted = make_scenarios({{1.0}, {2.0}, {3.0}}, RealVector{0.2, 0.3, 0.5});
  const MadModel mw = build_mad_model(weighted, 1.0, RealVector{1.0});
  CHECK(mw.cost[0] == doctest::Approx(0.5));
  CHECK(mw.cost[2] == doctest::Approx(0.2));

  // A scenario equal to the mean gives a zero deviation row.
  const auto flat = make_scenarios({{0.0, 0.0}, {0.1, 0.1}, {-0.1, -0.1}});
  CHECK_THROWS_AS(build_mad_model(flat, 1.0, half), ModelError);
  CHECK_THROWS_AS(build_mad_model(data, 0.0, half), ModelError);
  CHECK_THROWS_AS(build_mad_model(data, 1.0, RealVector{0.6, 0.6}), ModelError);
  CHECK_THROWS_AS(build_mad_model(data, 1.0, RealVector{1.0}), DimensionError);
}

TEST_CASE("project_mesoc_budget: matches Dykstra over the piece description") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = uniform_size(rng, 1, 6);
    const std::size_t q = uniform_size(rng, 1, 6);
    std::uniform_real_distribution<double> budget_dist(0.1, 2.0);
    const double budget = budget_dist(rng);
    const RealVector v = gaussian_vector(rng, p + q);
    const auto fast = project_mesoc_budget(v, p, budget, 1e-13, 100000);
    REQUIRE(fast.converged);

    auto pieces = oracle::mesoc_pieces(p, q);
    RealVector normal(p + q, 0.0);
    for (std::size_t i = p; i < p + q; ++i) normal[i] = 1.0;
    pieces.push_back(oracle::Hyperplane{normal, budget});
    const auto ref = oracle::dykstra_project(pieces, v, {1e-12, 500000});
    REQUIRE(ref.converged);
    CHECK(max_abs_diff(fast.point, ref.point) <= 1e-6);

    double s = 0.0;
    for (std::size_t i = p; i < p + q; ++i) s += fast.point[i];
    CHECK(std::abs(s - budget) <= 1e-12);
    CHECK(mesoc_violation(MesocPoint::split(fast.point, p)) <= 1e-9);
  }
  CHECK_THROWS_AS(project_mesoc_budget(RealVector{1, 2}, 2, 1.0, 1e-9, 10), DimensionError);
}

TEST_CASE("solve_mad: single asset is forced") {
  const auto data = make_scenarios({{0.05}, {-0.02}, {0.03}}, RealVector{0.5, 0.25, 0.25});
  const MadModel m = build_mad_model(data, 1.5, RealVector{1.0});
  const MadSolution s = solve_mad(m);
  CHECK(s.converged);
  CHECK(s.w == RealVector{1.0});
  for (double y : s.y) CHECK(y == m.uscale);
  CHECK(s.objective == doctest::Approx(1.5 * m.uscale - m.r[0]).epsilon(1e-15));
  CHECK(s.residuals.max() == 0.0);
}

TEST_CASE("solve_mad: closed-form optimum, feasibility and dominance") {
  std::mt19937_64 rng(8);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t T = uniform_size(rng, 2, 6);
    const std::size_t n = uniform_size(rng, 1, 6);
    const ScenarioData data = random_scenarios(rng, T, n, trial % 2 == 1);
    const RealVector w0(n, 1.0 / static_cast<double>(n));
    MadModel m = build_mad_model(data, 1.0, w0);
    m = build_mad_model(data, safe_c0(data, m.uscale), w0);
    const MadSolution s = solve_mad(m);
    CAPTURE(T);
    CAPTURE(n);
    CHECK(s.converged);
    CHECK_FALSE(s.diverged);
    CHECK(s.residuals.max() <= 1e-7);

    const auto opt = mesoc::testing::analytic_mad_optimum(m.r, m.c0, m.uscale);
    CHECK(s.objective <= opt.objective + 1e-9 * (1.0 + std::abs(opt.objective)));
    CHECK(s.objective >= opt.objective - 1e-9 * (1.0 + std::abs(opt.objective)));
    CHECK(max_abs_diff(s.w, opt.w) <= 1e-6);

    CHECK(s.objective <= best_random_feasible_objective(m, 1000, 100 + trial) + 1e-6);

    // Uniform portfolio on the cone boundary.
    const RealVector y_uniform(T, m.uscale * norm(w0));
    CHECK(s.objective <= conic_objective(m, y_uniform, w0) + 1e-6);

    // The conic objective bounds nothing in general; both are reported.
    CHECK(std::isfinite(s.mad_objective));
    CHECK(s.mad_objective == doctest::Approx(mad_objective(m, s.w)));
    ++solved;
  }
  CHECK(solved == 60);
}

TEST_CASE("solve_mad: deterministic") {
  std::mt19937_64 rng(4);
  const ScenarioData data = random_scenarios(rng, 5, 4, true);
  const RealVector w0(4, 0.25);
  const MadModel m = build_mad_model(data, 5.0, w0);
  const MadSolution a = solve_mad(m);
  const MadSolution b = solve_mad(m);
  CHECK(a.w == b.w);
  CHECK(a.y == b.y);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
  CHECK(best_random_feasible_objective(m, 50, 3) == best_random_feasible_objective(m, 50, 3));
}

TEST_CASE("solve_mad: iteration limit is flagged") {
  std::mt19937_64 rng(5);
  const ScenarioData data = random_scenarios(rng, 4, 3, false);
  const MadModel m = build_mad_model(data, 5.0, RealVector(3, 1.0 / 3.0));
  SolverConfig cfg;
  cfg.max_iter = 1;
  cfg.step0 = 1e-6;
  const MadSolution s = solve_mad(m, cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 1);
  CHECK(s.residuals.max() <= 1e-12);
  CHECK_THROWS(solve_mad(m, SolverConfig{0}));
}

TEST_CASE("solve_mad: unbounded model is never reported as converged") {
  // c0 ||U_j*|| is far below ||r - mean(r) e||.
  const auto data = make_scenarios({{0.5, -0.5}, {-0.5, 0.9}, {0.3, 0.1}});
  const MadModel m = build_mad_model(data, 0.01, RealVector{0.5, 0.5});
  SolverConfig cfg;
  cfg.max_iter = 500;
  const MadSolution s = solve_mad(m, cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 500);
  CHECK(norm(s.w) > 10.0);
}

TEST_CASE("refine_jstar: tie instance stabilises at once") {
  const auto data = make_scenarios({{0.1, 0.0}, {-0.1, 0.2}});
  const MadSolution s = refine_jstar(data, 2.0, RealVector{0.5, 0.5}, 20);
  CHECK(s.jstar_stable);
  CHECK_FALSE(s.jstar_cycled);
  CHECK(s.outer_iterations == 1);
  CHECK(s.jstar == 0);
  CHECK(s.jstar_history == std::vector<std::size_t>{0});
}

TEST_CASE("refine_jstar: weighted two-scenario instance") {
  // U_1 = 0.75 d and U_2 = -0.25 d with d = R^1 - R^2, so j* = 2 whenever
  // d^T w != 0.
  const auto data = make_scenarios({{0.10, 0.02, -0.01}, {-0.05, 0.04, 0.03}},
                                   RealVector{0.25, 0.75});
  const MadSolution s = refine_jstar(data, 3.0, RealVector(3, 1.0 / 3.0), 20);
  CHECK(s.converged);
  CHECK(s.jstar_stable);
  CHECK(s.outer_iterations == 1);
  CHECK(s.jstar == 1);
  const MadModel m = build_mad_model_at(data, 3.0, 1);
  CHECK(s.objective <= best_random_feasible_objective(m, 1000, 9) + 1e-6);
}

TEST_CASE("refine_jstar: max_outer = 1 runs one solve") {
  std::mt19937_64 rng(12);
  const ScenarioData data = random_scenarios(rng, 5, 3, false);
  const RealVector w0(3, 1.0 / 3.0);
  const MadSolution s = refine_jstar(data, 4.0, w0, 1);
  CHECK(s.outer_iterations == 1);
  CHECK(s.jstar_history.size() == 1);
  const MadModel m = build_mad_model(data, 4.0, w0);
  CHECK(s.jstar == m.jstar);
  CHECK(s.jstar_stable == (select_jstar(m.deviations, s.w) == m.jstar));
  CHECK_THROWS(refine_jstar(data, 4.0, w0, 0));
}

TEST_CASE("refine_jstar: outcome is always one of the three flagged states") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t T = uniform_size(rng, 2, 6);
    const std::size_t n = uniform_size(rng, 2, 5);
    const ScenarioData data = random_scenarios(rng, T, n, true);
    const RealVector w0(n, 1.0 / static_cast<double>(n));
    const MadSolution s = refine_jstar(data, 10.0, w0, 20);
    CHECK_FALSE((s.jstar_stable && s.jstar_cycled));
    CHECK(s.outer_iterations >= 1);
    CHECK(s.outer_iterations <= 20);
    CHECK(s.jstar_history.size() == s.outer_iterations);
    if (s.jstar_stable) {
      const MadModel m = build_mad_model_at(data, 10.0, s.jstar);
      CHECK(select_jstar(m.deviations, s.w) == s.jstar);
    }
  }
}

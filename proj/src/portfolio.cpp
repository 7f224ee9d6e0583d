#include "mesoc/portfolio.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "mesoc/mesoc.hpp"
#include "mesoc/parse.hpp"

namespace mesoc::portfolio {

namespace {

constexpr double kProbabilitySumTol = 1e-12;
constexpr double kBudgetTol = 1e-9;

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_number(const std::string& cell) {
  try {
    parse_double(cell);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

std::size_t resolve_column(const std::string& column, const std::vector<std::string>& header,
                           std::size_t width) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == trim(column)) return i;
  }
  std::size_t index = 0;
  const std::string_view t = trim(column);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError("probabilities column '" + column + "' not found");
  }
  index = std::stoul(std::string(t));
  if (index >= width) throw ParseError("probabilities column index out of range");
  return index;
}

// Decision layout: v = (y_T, ..., y_1, u).
RealVector decision_y_natural(const MadModel& model, ConstVectorView v) {
  const std::size_t T = model.scenarios();
  RealVector y(T);
  for (std::size_t j = 0; j < T; ++j) y[j] = v[T - 1 - j];
  return y;
}

// Moves a nearly feasible (y, w) onto the feasible set: the budget is met by
// an equal shift of w. The y costs c0 f are nonnegative, so for fixed w the
// best feasible y is the constant sequence ||u||.
void restore_feasibility(const MadModel& model, RealVector& y, RealVector& w) {
  const double excess = sum(w) - 1.0;
  for (double& v : w) v -= excess / static_cast<double>(w.size());
  std::fill(y.begin(), y.end(), model.uscale * norm(w));
}

MadSolution finish(const MadModel& model, ConstVectorView v) {
  const std::size_t T = model.scenarios();
  MadSolution sol;
  sol.y = decision_y_natural(model, v);
  sol.w.assign(v.begin() + static_cast<std::ptrdiff_t>(T), v.end());
  for (double& x : sol.w) x /= model.uscale;
  restore_feasibility(model, sol.y, sol.w);
  sol.u = sol.w;
  for (double& x : sol.u) x *= model.uscale;
  sol.objective = conic_objective(model, sol.y, sol.w);
  sol.mad_objective = mad_objective(model, sol.w);
  sol.residuals = feasibility(model, sol.y, sol.w);
  sol.jstar = model.jstar;
  sol.uscale = model.uscale;
  return sol;
}

}  // namespace

ScenarioData make_scenarios(const std::vector<RealVector>& rows,
                            std::optional<RealVector> probabilities) {
  if (rows.empty() || rows.front().empty()) {
    throw DimensionError("scenario table needs T >= 1 rows and n >= 1 columns");
  }
  ScenarioData data;
  data.scenarios = rows.size();
  data.assets = rows.front().size();
  data.returns.reserve(data.scenarios * data.assets);
  for (const RealVector& row : rows) {
    if (row.size() != data.assets) throw DimensionError("scenario table has ragged rows");
    require_finite(row, "make_scenarios");
    data.returns.insert(data.returns.end(), row.begin(), row.end());
  }
  if (probabilities) {
    if (probabilities->size() != data.scenarios) {
      throw DimensionError("probabilities must have one entry per scenario");
    }
    require_finite(*probabilities, "make_scenarios");
    for (double f : *probabilities) {
      if (f < 0.0 || f > 1.0) throw ModelError("probabilities must lie in [0, 1]");
    }
    if (std::abs(sum(*probabilities) - 1.0) > kProbabilitySumTol) {
      throw ModelError("probabilities must sum to 1");
    }
    data.probabilities = std::move(*probabilities);
  } else {
    data.probabilities.assign(data.scenarios, 1.0 / static_cast<double>(data.scenarios));
  }
  return data;
}

ScenarioData load_scenarios(std::istream& in, const CsvOptions& options) {
  std::vector<std::vector<std::string>> table;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    table.push_back(split_row(line));
  }
  if (table.empty()) throw ParseError("scenario table is empty");

  std::vector<std::string> header;
  if (!std::all_of(table.front().begin(), table.front().end(), is_number)) {
    header = table.front();
    table.erase(table.begin());
  }
  if (table.empty()) throw ParseError("scenario table has a header but no rows");

  const std::size_t width = header.empty() ? table.front().size() : header.size();
  std::optional<std::size_t> prob_col;
  if (options.probabilities_column) {
    prob_col = resolve_column(*options.probabilities_column, header, width);
  }
  if (width < (prob_col ? 2u : 1u)) throw ParseError("scenario table has no asset columns");

  std::vector<RealVector> rows;
  RealVector probs;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].size() != width) {
      throw ParseError("row " + std::to_string(r + 1) + " has " + std::to_string(table[r].size()) +
                       " cells, expected " + std::to_string(width));
    }
    RealVector row;
    for (std::size_t c = 0; c < width; ++c) {
      const double value = parse_double(table[r][c]);
      if (prob_col && c == *prob_col) {
        probs.push_back(value);
      } else {
        row.push_back(value);
      }
    }
    rows.push_back(std::move(row));
  }
  return make_scenarios(rows, prob_col ? std::optional<RealVector>(std::move(probs)) : std::nullopt);
}

RealVector expected_returns(const ScenarioData& data) {
  RealVector r(data.assets, 0.0);
  for (std::size_t j = 0; j < data.scenarios; ++j) {
    for (std::size_t i = 0; i < data.assets; ++i) r[i] += data.probabilities[j] * data.at(j, i);
  }
  return r;
}

std::size_t select_jstar(const std::vector<RealVector>& deviations, ConstVectorView w) {
  std::size_t best = 0;
  double best_value = std::abs(dot(deviations.front(), w));
  for (std::size_t j = 1; j < deviations.size(); ++j) {
    const double value = std::abs(dot(deviations[j], w));
    if (value < best_value) {
      best = j;
      best_value = value;
    }
  }
  return best;
}

MadModel build_mad_model_at(const ScenarioData& data, double c0, std::size_t jstar) {
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw ModelError("c0 must be positive and finite");
  if (jstar >= data.scenarios) throw DimensionError("jstar out of range");

  MadModel model;
  model.r = expected_returns(data);
  model.probabilities = data.probabilities;
  model.c0 = c0;
  model.deviations.resize(data.scenarios, RealVector(data.assets));
  for (std::size_t j = 0; j < data.scenarios; ++j) {
    for (std::size_t i = 0; i < data.assets; ++i) {
      model.deviations[j][i] = data.at(j, i) - model.r[i];
    }
  }
  model.jstar = jstar;
  model.uscale = norm(model.deviations[jstar]);
  if (!(model.uscale > 0.0)) {
    throw ModelError("degenerate scenario: selected deviation row U_j* is zero");
  }

  const std::size_t T = data.scenarios;
  model.cost.assign(T + data.assets, 0.0);
  for (std::size_t j = 0; j < T; ++j) model.cost[T - 1 - j] = c0 * data.probabilities[j];
  for (std::size_t i = 0; i < data.assets; ++i) model.cost[T + i] = -model.r[i] / model.uscale;
  return model;
}

MadModel build_mad_model(const ScenarioData& data, double c0, ConstVectorView w0) {
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw ModelError("c0 must be positive and finite");
  if (w0.size() != data.assets) throw DimensionError("w0 must have one entry per asset");
  require_finite(w0, "build_mad_model");
  if (std::abs(sum(w0) - 1.0) > kBudgetTol) throw ModelError("w0 must sum to 1");

  const RealVector r = expected_returns(data);
  std::vector<RealVector> deviations(data.scenarios, RealVector(data.assets));
  for (std::size_t j = 0; j < data.scenarios; ++j) {
    for (std::size_t i = 0; i < data.assets; ++i) deviations[j][i] = data.at(j, i) - r[i];
  }
  return build_mad_model_at(data, c0, select_jstar(deviations, w0));
}

RealVector pack_decision(const MadModel& model, ConstVectorView y, ConstVectorView u) {
  const std::size_t T = model.scenarios();
  if (y.size() != T || u.size() != model.assets()) {
    throw DimensionError("pack_decision: dimension mismatch");
  }
  RealVector v(T + u.size());
  for (std::size_t j = 0; j < T; ++j) v[T - 1 - j] = y[j];
  std::copy(u.begin(), u.end(), v.begin() + static_cast<std::ptrdiff_t>(T));
  return v;
}

double conic_objective(const MadModel& model, ConstVectorView y, ConstVectorView w) {
  return model.c0 * dot(model.probabilities, y) - dot(model.r, w);
}

double mad_objective(const MadModel& model, ConstVectorView w) {
  double risk = 0.0;
  for (std::size_t j = 0; j < model.scenarios(); ++j) {
    risk += model.probabilities[j] * std::abs(dot(model.deviations[j], w));
  }
  return model.c0 * risk - dot(model.r, w);
}

FeasibilityReport feasibility(const MadModel& model, ConstVectorView y, ConstVectorView w) {
  RealVector u(w.begin(), w.end());
  for (double& x : u) x *= model.uscale;
  const RealVector v = pack_decision(model, y, u);
  FeasibilityReport rep;
  rep.budget = std::abs(sum(u) - model.uscale);
  rep.weights = std::abs(sum(w) - 1.0);
  rep.cone = mesoc_violation(MesocPoint::split(v, model.scenarios()));
  return rep;
}

SectionProjection project_mesoc_budget(ConstVectorView v, std::size_t p, double budget,
                                       double tol, std::size_t max_cycles) {
  if (p == 0 || p >= v.size()) throw DimensionError("project_mesoc_budget: need 1 <= p < length");
  require_finite(v, "project_mesoc_budget");
  const std::size_t dim = v.size();
  const double q = static_cast<double>(dim - p);

  SectionProjection out;
  out.point.assign(v.begin(), v.end());
  RealVector corr_cone(dim, 0.0);
  RealVector corr_plane(dim, 0.0);
  RealVector shifted(dim);

  for (std::size_t cycle = 1; cycle <= max_cycles; ++cycle) {
    double change_sq = 0.0;

    for (std::size_t i = 0; i < dim; ++i) shifted[i] = out.point[i] + corr_cone[i];
    const ProjectionCertificate cert = project_mesoc(
        ConstVectorView(shifted).first(p), ConstVectorView(shifted).subspan(p));
    for (std::size_t i = 0; i < p; ++i) out.point[i] = cert.primal.x[i];
    for (std::size_t i = p; i < dim; ++i) out.point[i] = cert.primal.u[i - p];
    for (std::size_t i = 0; i < dim; ++i) {
      const double next = shifted[i] - out.point[i];
      change_sq += (next - corr_cone[i]) * (next - corr_cone[i]);
      corr_cone[i] = next;
    }

    for (std::size_t i = 0; i < dim; ++i) shifted[i] = out.point[i] + corr_plane[i];
    double gap = -budget;
    for (std::size_t i = p; i < dim; ++i) gap += shifted[i];
    out.point = shifted;
    for (std::size_t i = p; i < dim; ++i) out.point[i] -= gap / q;
    for (std::size_t i = 0; i < dim; ++i) {
      const double next = shifted[i] - out.point[i];
      change_sq += (next - corr_plane[i]) * (next - corr_plane[i]);
      corr_plane[i] = next;
    }

    out.cycles = cycle;
    if (change_sq < tol * tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

MadSolution solve_mad(const MadModel& model, const SolverConfig& cfg) {
  const std::size_t T = model.scenarios();
  const std::size_t n = model.assets();
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0) || !(cfg.inner_tol > 0.0)) {
    throw std::invalid_argument("solve_mad: invalid solver configuration");
  }

  // Feasible start: the uniform portfolio with y on the cone boundary.
  RealVector u(n, model.uscale / static_cast<double>(n));
  RealVector y(T, norm(u));
  RealVector v = pack_decision(model, y, u);

  const double cost_norm = norm(model.cost);
  const double step0 = cfg.step0 > 0.0 ? cfg.step0 : 10.0 * (1.0 + norm(v)) / cost_norm;

  RealVector average(v.size(), 0.0);
  double weight_sum = 0.0;
  RealVector trial(v.size());
  std::size_t k = 0;
  bool converged = false;
  bool diverged = false;
  bool inner_failed = false;

  for (k = 1; k <= cfg.max_iter; ++k) {
    const double step = step0 / std::sqrt(static_cast<double>(k));
    for (std::size_t i = 0; i < v.size(); ++i) trial[i] = v[i] - step * model.cost[i];
    SectionProjection proj =
        project_mesoc_budget(trial, T, model.uscale, cfg.inner_tol, cfg.inner_max_cycles);
    if (!proj.converged) inner_failed = true;

    double move_sq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = proj.point[i] - v[i];
      move_sq += d * d;
      average[i] += step * proj.point[i];
    }
    weight_sum += step;
    v = std::move(proj.point);

    const double size = norm(v);
    if (size > cfg.divergence_norm) {
      diverged = true;
      break;
    }
    // x = P(x - step c) characterizes minimizers of a linear objective.
    if (std::sqrt(move_sq) <= cfg.tol * (1.0 + size)) {
      converged = true;
      break;
    }
  }
  const std::size_t iterations = std::min(k, cfg.max_iter);

  MadSolution best = finish(model, v);
  if (!converged && weight_sum > 0.0) {
    for (double& x : average) x /= weight_sum;
    MadSolution averaged = finish(model, average);
    if (averaged.objective < best.objective) best = std::move(averaged);
  }
  best.iterations = iterations;
  best.converged = converged && !inner_failed;
  best.diverged = diverged;
  return best;
}

MadSolution refine_jstar(const ScenarioData& data, double c0, ConstVectorView w_init,
                         std::size_t max_outer, const SolverConfig& cfg) {
  if (max_outer < 1) throw std::invalid_argument("refine_jstar: max_outer must be >= 1");
  RealVector w(w_init.begin(), w_init.end());
  std::vector<std::size_t> history;
  std::optional<MadSolution> best;
  MadSolution last;

  for (std::size_t outer = 1; outer <= max_outer; ++outer) {
    const MadModel model = build_mad_model(data, c0, w);
    history.push_back(model.jstar);
    last = solve_mad(model, cfg);
    last.outer_iterations = outer;
    if (!best || last.objective < best->objective) best = last;

    const std::size_t next = select_jstar(model.deviations, last.w);
    if (next == model.jstar) {
      last.jstar_stable = true;
      last.jstar_history = history;
      return last;
    }
    if (std::find(history.begin(), history.end(), next) != history.end()) {
      best->jstar_cycled = true;
      best->jstar_stable = false;
      best->outer_iterations = outer;
      best->jstar_history = history;
      return *best;
    }
    w = last.w;
  }
  last.jstar_stable = false;
  last.jstar_history = history;
  return last;
}

double best_random_feasible_objective(const MadModel& model, std::size_t count,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> slack(1.0);
  std::bernoulli_distribution tight(0.5);
  const std::size_t n = model.assets();
  const std::size_t T = model.scenarios();

  double best = std::numeric_limits<double>::infinity();
  RealVector w(n);
  RealVector y(T);
  for (std::size_t s = 0; s < count; ++s) {
    const double spread = std::exp(gauss(rng));
    for (double& x : w) x = spread * gauss(rng);
    const double shift = (1.0 - sum(w)) / static_cast<double>(n);
    for (double& x : w) x += shift;
    double level = model.uscale * norm(w);
    for (double& x : y) {
      if (!tight(rng)) level += 0.1 * model.uscale * slack(rng);
      x = level;
    }
    best = std::min(best, conic_objective(model, y, w));
  }
  return best;
}

}  // namespace mesoc::portfolio

#include "mesoc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "mesoc/cones.hpp"
#include "mesoc/json_writer.hpp"
#include "mesoc/mesoc.hpp"
#include "mesoc/oracle.hpp"
#include "mesoc/parse.hpp"
#include "mesoc/portfolio.hpp"

namespace mesoc::cli {

namespace {

constexpr std::size_t kOracleMaxDim = 8;
constexpr std::size_t kRefineMaxOuter = 20;

// Cone selector shared by project and check.
enum class Target { Mesoc, MesocDual, Polyhedral };

struct ConeChoice {
  Target target;
  ConeId polyhedral;  // meaningful for Target::Polyhedral
};

const std::map<std::string, ConeChoice>& cone_table() {
  static const std::map<std::string, ConeChoice> table = {
      {"mesoc", {Target::Mesoc, ConeId::MonotoneNonneg}},
      {"mesoc-dual", {Target::MesocDual, ConeId::MonotoneNonneg}},
      {"monotone", {Target::Polyhedral, ConeId::MonotoneCone}},
      {"monotone-dual", {Target::Polyhedral, ConeId::MonotoneDual}},
      {"monotone-nonneg", {Target::Polyhedral, ConeId::MonotoneNonneg}},
      {"monotone-nonneg-dual", {Target::Polyhedral, ConeId::MonotoneNonnegDual}},
  };
  return table;
}

std::vector<std::string> cone_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : cone_table()) names.push_back(name);
  return names;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct VectorSource {
  std::string inline_text;
  std::string file;
};

std::string source_text(const VectorSource& src) {
  if (!src.file.empty()) return read_file(src.file);
  if (!src.inline_text.empty()) return src.inline_text;
  throw ParseError("one of --inline or --file is required");
}

RealVector read_point(const VectorSource& src, std::size_t p, std::size_t q) {
  RealVector v = parse_vector(source_text(src));
  if (p == 0) throw DimensionError("--p must be >= 1");
  if (v.size() != p + q) {
    throw DimensionError("input has " + std::to_string(v.size()) + " entries, expected p + q = " +
                         std::to_string(p + q));
  }
  return v;
}

void require_tol(double tol) {
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw ParseError("--tol must be finite and >= 0");
}

Json to_json(ConstVectorView v) { return Json(RealVector(v.begin(), v.end())); }

std::vector<std::size_t> parse_dim_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> dims;
  for (double d : parse_vector(text)) {
    if (d < 0.0 || d != std::floor(d)) {
      throw ParseError(std::string(flag) + " expects nonnegative integers");
    }
    dims.push_back(static_cast<std::size_t>(d));
  }
  return dims;
}

// ---------------------------------------------------------------- project

struct ProjectOptions {
  std::size_t p = 0;
  std::size_t q = 0;
  VectorSource source;
  std::string cone = "mesoc";
  double tol = 1e-9;
};

struct Decomposition {
  RealVector primal;
  RealVector dual;
  std::optional<ProjectionCase> projection_case;
  std::optional<double> lambda;
  bool primal_member = false;
  bool dual_member = false;
};

Decomposition decompose(const ConeChoice& choice, ConstVectorView v, std::size_t p, double tol) {
  Decomposition d;
  switch (choice.target) {
    case Target::Mesoc: {
      const ProjectionCertificate cert = project_mesoc(v.first(p), v.subspan(p));
      d.primal = cert.primal.flat();
      d.dual = cert.dual_of_neg.flat();
      d.projection_case = cert.projection_case;
      d.lambda = cert.lambda;
      d.primal_member = mesoc_contains(cert.primal, tol);
      d.dual_member = mesoc_dual_contains(cert.dual_of_neg, tol);
      break;
    }
    case Target::MesocDual: {
      // P_{L*}(z) = z + P_L(-z), and the dual part is P_L(-z).
      const RealVector neg = negated(v);
      const ProjectionCertificate cert =
          project_mesoc(ConstVectorView(neg).first(p), ConstVectorView(neg).subspan(p));
      d.dual = cert.primal.flat();
      d.primal.assign(v.begin(), v.end());
      for (std::size_t i = 0; i < d.primal.size(); ++i) d.primal[i] += d.dual[i];
      d.projection_case = cert.projection_case;
      d.lambda = cert.lambda;
      d.primal_member = mesoc_dual_contains(MesocPoint::split(d.primal, p), tol);
      d.dual_member = mesoc_contains(cert.primal, tol);
      break;
    }
    case Target::Polyhedral: {
      d.primal = project(choice.polyhedral, v);
      d.dual = project(dual_cone(choice.polyhedral), negated(v));
      d.primal_member = cone_contains(choice.polyhedral, d.primal, tol);
      d.dual_member = cone_contains(dual_cone(choice.polyhedral), d.dual, tol);
      break;
    }
  }
  return d;
}

int cmd_project(const ProjectOptions& o, std::ostream& out) {
  require_tol(o.tol);
  const ConeChoice& choice = cone_table().at(o.cone);
  if (choice.target == Target::Polyhedral && o.q != 0) {
    throw DimensionError("cone '" + o.cone + "' acts on R^p; use --q 0");
  }
  const RealVector v = read_point(o.source, o.p, o.q);
  const Decomposition d = decompose(choice, v, o.p, o.tol);

  double additive = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = d.primal[i] - d.dual[i] - v[i];
    additive += r * r;
  }

  Json report;
  report["cone"] = o.cone;
  report["p"] = o.p;
  report["q"] = o.q;
  report["input"] = to_json(v);
  report["primal"] = to_json(d.primal);
  report["dual"] = to_json(d.dual);
  report["case"] = d.projection_case ? Json(std::string(case_name(*d.projection_case))) : Json(nullptr);
  report["lambda"] = d.lambda ? Json(*d.lambda) : Json(nullptr);
  report["residuals"] = {{"additive", std::sqrt(additive)},
                         {"orthogonality", std::abs(dot(d.primal, d.dual))}};
  report["membership"] = {{"primal", d.primal_member}, {"dual", d.dual_member}, {"tol", o.tol}};
  write_json(out, report);
  return (d.primal_member && d.dual_member) ? kOk : kPropertyViolation;
}

// ---------------------------------------------------------------- check

struct CheckOptions {
  std::size_t p = 0;
  std::size_t q = 0;
  VectorSource source;
  std::string cone = "mesoc";
  double tol = 1e-9;
};

bool member(const ConeChoice& choice, ConstVectorView v, std::size_t p, double tol) {
  switch (choice.target) {
    case Target::Mesoc: return mesoc_contains(MesocPoint::split(v, p), tol);
    case Target::MesocDual: return mesoc_dual_contains(MesocPoint::split(v, p), tol);
    case Target::Polyhedral: return cone_contains(choice.polyhedral, v, tol);
  }
  return false;
}

bool dual_member(const ConeChoice& choice, ConstVectorView v, std::size_t p, double tol) {
  switch (choice.target) {
    case Target::Mesoc: return mesoc_dual_contains(MesocPoint::split(v, p), tol);
    case Target::MesocDual: return mesoc_contains(MesocPoint::split(v, p), tol);
    case Target::Polyhedral: return cone_contains(dual_cone(choice.polyhedral), v, tol);
  }
  return false;
}

RealVector json_vector(const Json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    throw ParseError(std::string("certificate lacks array field '") + key + "'");
  }
  RealVector v;
  for (const Json& e : doc[key]) {
    if (!e.is_number()) throw ParseError(std::string("non-numeric entry in '") + key + "'");
    v.push_back(e.get<double>());
  }
  require_finite(v, key);
  return v;
}

int check_certificate(const std::string& text, double tol, std::ostream& out) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("certificate is not valid JSON: ") + e.what());
  }
  if (!doc.contains("cone") || !doc["cone"].is_string() || !doc.contains("p") ||
      !doc["p"].is_number_unsigned() || !doc.contains("q") || !doc["q"].is_number_unsigned()) {
    throw ParseError("certificate needs string 'cone' and integer 'p', 'q'");
  }
  const std::string cone = doc["cone"].get<std::string>();
  const auto it = cone_table().find(cone);
  if (it == cone_table().end()) throw ParseError("unknown cone '" + cone + "'");
  const ConeChoice& choice = it->second;
  const std::size_t p = doc["p"].get<std::size_t>();
  const std::size_t q = doc["q"].get<std::size_t>();
  const RealVector input = json_vector(doc, "input");
  const RealVector primal = json_vector(doc, "primal");
  const RealVector dual = json_vector(doc, "dual");
  if (p == 0 || input.size() != p + q || primal.size() != p + q || dual.size() != p + q) {
    throw DimensionError("certificate vectors do not match p + q");
  }

  const double scale = norm(input);
  double additive = 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double r = primal[i] - dual[i] - input[i];
    additive += r * r;
  }
  additive = std::sqrt(additive);
  const double inner = dot(primal, dual);
  const double quad_tol = 10.0 * tol * (1.0 + scale * scale);

  Json report;
  report["cone"] = cone;
  report["p"] = p;
  report["q"] = q;
  report["primal_member"] = member(choice, primal, p, tol);
  report["dual_member"] = dual_member(choice, dual, p, tol);
  report["reconstructs_input"] = additive <= tol * (1.0 + scale);
  report["orthogonal"] = std::abs(inner) <= quad_tol;
  report["additive_residual"] = additive;
  report["inner_product"] = inner;
  bool ok = report["primal_member"].get<bool>() && report["dual_member"].get<bool>() &&
            report["reconstructs_input"].get<bool>() && report["orthogonal"].get<bool>();

  Json conditions = nullptr;
  if (choice.target != Target::Polyhedral) {
    const bool primal_is_l = choice.target == Target::Mesoc;
    const MesocPoint a = MesocPoint::split(primal_is_l ? primal : dual, p);
    const MesocPoint b = MesocPoint::split(primal_is_l ? dual : primal, p);
    const ComplementarityReport rep = complementarity_check(a, b, quad_tol);
    if (rep.conditions) {
      conditions = {{"tail_equals_norm_u", rep.conditions->tail_equals_norm_u},
                    {"sum_y_equals_norm_v", rep.conditions->sum_y_equals_norm_v},
                    {"u_v_opposite", rep.conditions->u_v_opposite},
                    {"reduced_pair_complementary", rep.conditions->reduced_pair_complementary}};
      ok = ok && rep.conditions->all();
    }
  }
  report["complementarity_conditions"] = conditions;
  report["ok"] = ok;
  write_json(out, report);
  return ok ? kOk : kPropertyViolation;
}

int cmd_check(const CheckOptions& o, std::ostream& out) {
  require_tol(o.tol);
  const std::string text = source_text(o.source);
  if (!trim(text).empty() && trim(text).front() == '{') return check_certificate(text, o.tol, out);

  const ConeChoice& choice = cone_table().at(o.cone);
  if (choice.target == Target::Polyhedral && o.q != 0) {
    throw DimensionError("cone '" + o.cone + "' acts on R^p; use --q 0");
  }
  const RealVector v = read_point(o.source, o.p, o.q);
  const bool ok = member(choice, v, o.p, o.tol);
  Json report;
  report["cone"] = o.cone;
  report["p"] = o.p;
  report["q"] = o.q;
  report["member"] = ok;
  report["tol"] = o.tol;
  write_json(out, report);
  return ok ? kOk : kPropertyViolation;
}

// ---------------------------------------------------------------- oracle-compare

struct OracleOptions {
  std::uint64_t seed = 0;
  std::size_t p = 3;
  std::size_t q = 2;
  std::size_t count = 10;
  double tol = 1e-5;
  std::size_t max_iter = 200000;
};

int cmd_oracle_compare(const OracleOptions& o, std::ostream& out) {
  require_tol(o.tol);
  if (o.p == 0) throw DimensionError("--p must be >= 1");
  if (o.p > kOracleMaxDim || o.q > kOracleMaxDim) {
    throw DimensionError("oracle-compare is limited to p, q <= 8");
  }
  if (o.max_iter == 0) throw ParseError("--max-iter must be >= 1");

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto pieces = oracle::mesoc_pieces(o.p, o.q);
  const oracle::DykstraConfig cfg{1e-10, o.max_iter};

  Json rows = Json::array();
  double worst = 0.0;
  bool all_within = true;
  bool all_converged = true;
  for (std::size_t k = 0; k < o.count; ++k) {
    RealVector v(o.p + o.q);
    for (double& x : v) x = gauss(rng);
    const ProjectionCertificate cert =
        project_mesoc(ConstVectorView(v).first(o.p), ConstVectorView(v).subspan(o.p));
    const oracle::DykstraResult ref = oracle::dykstra_project(pieces, v, cfg);
    const double dev = max_abs_diff(cert.primal.flat(), ref.point);
    worst = std::max(worst, dev);
    all_within = all_within && dev <= o.tol;
    all_converged = all_converged && ref.converged;
    rows.push_back({{"index", k},
                    {"case", std::string(case_name(cert.projection_case))},
                    {"max_abs_deviation", dev},
                    {"oracle_cycles", ref.cycles},
                    {"oracle_converged", ref.converged}});
  }

  Json report;
  report["seed"] = o.seed;
  report["p"] = o.p;
  report["q"] = o.q;
  report["count"] = o.count;
  report["tol"] = o.tol;
  report["instances"] = std::move(rows);
  report["max_deviation"] = worst;
  report["all_within_tol"] = all_within;
  report["all_converged"] = all_converged;
  write_json(out, report);
  if (!all_converged) return kNonConvergence;
  return all_within ? kOk : kPropertyViolation;
}

// ---------------------------------------------------------------- solve-portfolio

struct PortfolioOptions {
  std::string file;
  double c0 = 0.0;
  std::size_t max_iter = 5000;
  double tol = 1e-9;
  std::string probabilities_column;
  std::uint64_t seed = 0;
  std::size_t count = 1000;
};

int cmd_solve_portfolio(const PortfolioOptions& o, std::ostream& out) {
  if (!(o.tol > 0.0)) throw ParseError("--tol must be positive");
  if (o.max_iter == 0) throw ParseError("--max-iter must be >= 1");
  std::ifstream in(o.file);
  if (!in) throw ParseError("cannot read file '" + o.file + "'");
  portfolio::CsvOptions csv;
  if (!o.probabilities_column.empty()) csv.probabilities_column = o.probabilities_column;
  const portfolio::ScenarioData data = portfolio::load_scenarios(in, csv);

  portfolio::SolverConfig cfg;
  cfg.max_iter = o.max_iter;
  cfg.tol = o.tol;
  const RealVector uniform(data.assets, 1.0 / static_cast<double>(data.assets));
  const portfolio::MadSolution sol =
      portfolio::refine_jstar(data, o.c0, uniform, kRefineMaxOuter, cfg);

  Json report;
  report["T"] = data.scenarios;
  report["n"] = data.assets;
  report["c0"] = o.c0;
  report["jstar"] = sol.jstar + 1;  // 1-based scenario index
  report["uscale"] = sol.uscale;
  report["w"] = to_json(sol.w);
  report["y"] = to_json(sol.y);
  report["objective"] = sol.objective;
  report["mad_objective"] = sol.mad_objective;
  report["residuals"] = {{"budget", sol.residuals.budget},
                         {"cone", sol.residuals.cone},
                         {"weights", sol.residuals.weights}};
  report["iterations"] = sol.iterations;
  report["outer_iterations"] = sol.outer_iterations;
  report["converged"] = sol.converged;
  report["diverged"] = sol.diverged;
  report["jstar_stable"] = sol.jstar_stable;
  report["jstar_cycled"] = sol.jstar_cycled;

  bool dominates = true;
  if (o.count > 0) {
    const portfolio::MadModel model = portfolio::build_mad_model_at(data, o.c0, sol.jstar);
    const double best = portfolio::best_random_feasible_objective(model, o.count, o.seed);
    dominates = sol.objective <= best + 1e-6;
    report["dominance"] = {{"samples", o.count},
                           {"seed", o.seed},
                           {"best_random_objective", best},
                           {"dominates", dominates}};
  } else {
    report["dominance"] = nullptr;
  }
  write_json(out, report);
  if (!sol.converged || sol.diverged) return kNonConvergence;
  return dominates ? kOk : kPropertyViolation;
}

// ---------------------------------------------------------------- bench

struct BenchOptions {
  std::string p_list = "1000";
  std::string q_list = "1000";
  std::size_t reps = 5;
  std::uint64_t seed = 0;
};

double median(RealVector v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_bench(const BenchOptions& o, std::ostream& out) {
  if (o.reps == 0) throw ParseError("--count (repetitions) must be >= 1");
  const auto ps = parse_dim_list(o.p_list, "--p");
  const auto qs = parse_dim_list(o.q_list, "--q");
  for (std::size_t p : ps) {
    if (p == 0) throw DimensionError("bench dimensions must be >= 1");
  }

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Json results = Json::array();
  for (std::size_t p : ps) {
    for (std::size_t q : qs) {
      for (const char* kind : {"random", "increasing"}) {
        RealVector timings;
        for (std::size_t r = 0; r < o.reps; ++r) {
          RealVector z(p);
          RealVector w(q);
          for (double& x : w) x = gauss(rng);
          if (std::string_view(kind) == "random") {
            for (double& x : z) x = gauss(rng);
          } else {
            // Increasing input pools everything into one block.
            for (std::size_t i = 0; i < p; ++i) z[i] = static_cast<double>(i) / static_cast<double>(p);
          }
          const auto start = std::chrono::steady_clock::now();
          const ProjectionCertificate cert = project_mesoc(z, w);
          const auto stop = std::chrono::steady_clock::now();
          if (cert.primal.x.size() != p) throw InternalError("bench: bad projection size");
          timings.push_back(std::chrono::duration<double>(stop - start).count());
        }
        results.push_back({{"p", p},
                           {"q", q},
                           {"input", kind},
                           {"timings_s", timings},
                           {"median_s", median(timings)}});
      }
    }
  }
  Json report;
  report["seed"] = o.seed;
  report["reps"] = o.reps;
  report["results"] = std::move(results);
  write_json(out, report);
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projections onto the monotone extended second-order cone", "mesoc"};
  app.require_subcommand(1);

  const auto cone_check = CLI::IsMember(cone_names());

  ProjectOptions po;
  auto* project_cmd = app.add_subcommand("project", "Project a point and emit its certificate");
  project_cmd->add_option("--p", po.p, "Length of the ordered part")->required();
  project_cmd->add_option("--q", po.q, "Length of the free part");
  auto* p_inline = project_cmd->add_option("--inline", po.source.inline_text, "Comma-separated vector");
  auto* p_file = project_cmd->add_option("--file", po.source.file, "File holding the vector");
  p_inline->excludes(p_file);
  project_cmd->add_option("--cone", po.cone, "Target cone")->check(cone_check);
  project_cmd->add_option("--tol", po.tol, "Membership tolerance");

  CheckOptions co;
  auto* check_cmd = app.add_subcommand("check", "Check membership, or verify a project certificate");
  check_cmd->add_option("--p", co.p, "Length of the ordered part");
  check_cmd->add_option("--q", co.q, "Length of the free part");
  auto* c_inline = check_cmd->add_option("--inline", co.source.inline_text, "Comma-separated vector");
  auto* c_file = check_cmd->add_option("--file", co.source.file, "Vector file or certificate JSON");
  c_inline->excludes(c_file);
  check_cmd->add_option("--cone", co.cone, "Cone to test against")->check(cone_check);
  check_cmd->add_option("--tol", co.tol, "Tolerance");

  OracleOptions oo;
  auto* oracle_cmd = app.add_subcommand("oracle-compare", "Compare closed form against Dykstra");
  oracle_cmd->add_option("--seed", oo.seed);
  oracle_cmd->add_option("--p", oo.p);
  oracle_cmd->add_option("--q", oo.q);
  oracle_cmd->add_option("--count", oo.count);
  oracle_cmd->add_option("--tol", oo.tol, "Allowed max-abs deviation");
  oracle_cmd->add_option("--max-iter", oo.max_iter, "Dykstra cycle limit");

  PortfolioOptions fo;
  auto* solve_cmd = app.add_subcommand("solve-portfolio", "Solve the conic MAD portfolio model");
  solve_cmd->add_option("--file", fo.file, "Scenario CSV")->required();
  solve_cmd->add_option("--c0", fo.c0, "Risk aversion, > 0")->required();
  solve_cmd->add_option("--max-iter", fo.max_iter);
  solve_cmd->add_option("--tol", fo.tol);
  solve_cmd->add_option("--probabilities-column", fo.probabilities_column,
                        "Header name or 0-based index of the probability column");
  solve_cmd->add_option("--seed", fo.seed, "Seed for the random dominance check");
  solve_cmd->add_option("--count", fo.count, "Random feasible points in the dominance check");

  BenchOptions bo;
  auto* bench_cmd = app.add_subcommand("bench", "Time projections over a grid of sizes");
  bench_cmd->add_option("--p", bo.p_list, "Comma-separated p values");
  bench_cmd->add_option("--q", bo.q_list, "Comma-separated q values");
  bench_cmd->add_option("--count,--reps", bo.reps, "Repetitions per size");
  bench_cmd->add_option("--seed", bo.seed);

  std::vector<std::string> storage{"mesoc"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  }

  try {
    if (*project_cmd) return cmd_project(po, out);
    if (*check_cmd) return cmd_check(co, out);
    if (*oracle_cmd) return cmd_oracle_compare(oo, out);
    if (*solve_cmd) return cmd_solve_portfolio(fo, out);
    if (*bench_cmd) return cmd_bench(bo, out);
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kDimensionError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const NonFiniteError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const ModelError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kParseError;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kPropertyViolation;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kParseError;
  }
  return kParseError;
}

}  // namespace mesoc::cli

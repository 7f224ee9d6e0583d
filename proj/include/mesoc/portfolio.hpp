#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "mesoc/vector.hpp"

namespace mesoc::portfolio {

// Conic mean-absolute-deviation model. With scenario returns R^j, weights
// f_j, r = sum_j f_j R^j and deviations U_j = R^j - r, the decision vector
//   v = (y_T, ..., y_1, u),  u = ||U_{j*}|| w
// must lie in the MESOC L(T, n) and satisfy e^T u = ||U_{j*}||; the
// objective is c0 f^T y - r^T u / ||U_{j*}||.

struct ScenarioData {
  std::size_t scenarios = 0;  // T
  std::size_t assets = 0;     // n
  RealVector returns;         // row-major T x n
  RealVector probabilities;   // f, length T

  double at(std::size_t j, std::size_t i) const { return returns[j * assets + i]; }
};

/// Validates and packs a scenario table. Probabilities default to 1/T and
/// must lie in [0, 1] and sum to 1 within 1e-12.
ScenarioData make_scenarios(const std::vector<RealVector>& rows,
                            std::optional<RealVector> probabilities = std::nullopt);

struct CsvOptions {
  // Header name or 0-based column index holding the probabilities.
  std::optional<std::string> probabilities_column;
};

/// Comma-separated table, one scenario per row and one asset per column. A
/// first row with any non-numeric cell is taken as a header.
ScenarioData load_scenarios(std::istream& in, const CsvOptions& options = {});

RealVector expected_returns(const ScenarioData& data);

struct MadModel {
  RealVector r;                   // expected returns, length n
  std::vector<RealVector> deviations;  // U_j = R^j - r
  RealVector probabilities;       // f in natural scenario order
  double c0 = 1.0;
  std::size_t jstar = 0;          // 0-based
  double uscale = 0.0;            // ||U_{j*}||
  RealVector cost;                // objective on (y_T, ..., y_1, u)

  std::size_t scenarios() const { return deviations.size(); }
  std::size_t assets() const { return r.size(); }
};

/// argmin_j |U_j^T w|, smallest index on ties.
std::size_t select_jstar(const std::vector<RealVector>& deviations, ConstVectorView w);

/// Model with j* chosen from the starting weights w0 (which must sum to 1).
/// Throws ModelError when the selected deviation row is zero.
MadModel build_mad_model(const ScenarioData& data, double c0, ConstVectorView w0);

/// Model with a fixed 0-based j*.
MadModel build_mad_model_at(const ScenarioData& data, double c0, std::size_t jstar);

struct SolverConfig {
  std::size_t max_iter = 5000;
  double tol = 1e-9;                    // fixed-point step, relative to 1 + ||v||
  double inner_tol = 1e-11;             // Dykstra tolerance for the feasible-set projection
  std::size_t inner_max_cycles = 100000;
  double step0 = 0.0;                   // <= 0 picks a scale-aware default
  double divergence_norm = 1e8;
};

struct FeasibilityReport {
  double budget = 0.0;   // |e^T u - ||U_{j*}|||
  double cone = 0.0;     // largest MESOC violation of (y_T..y_1, u)
  double weights = 0.0;  // |e^T w - 1|

  double max() const { return std::max({budget, cone, weights}); }
};

struct MadSolution {
  RealVector w;  // asset weights
  RealVector y;  // deviation bounds y_1..y_T in natural order
  RealVector u;  // ||U_{j*}|| w
  double objective = 0.0;      // conic objective c0 f^T y - r^T w
  double mad_objective = 0.0;  // c0 sum_j f_j |U_j^T w| - r^T w for the same w
  FeasibilityReport residuals;
  std::size_t iterations = 0;
  bool converged = false;
  bool diverged = false;
  std::size_t jstar = 0;
  double uscale = 0.0;
  // Filled by refine_jstar.
  bool jstar_stable = false;
  bool jstar_cycled = false;
  std::size_t outer_iterations = 1;
  std::vector<std::size_t> jstar_history;
};

/// Decision vector layout helpers.
RealVector pack_decision(const MadModel& model, ConstVectorView y, ConstVectorView u);
double conic_objective(const MadModel& model, ConstVectorView y, ConstVectorView w);
double mad_objective(const MadModel& model, ConstVectorView w);
FeasibilityReport feasibility(const MadModel& model, ConstVectorView y, ConstVectorView w);

struct SectionProjection {
  RealVector point;
  std::size_t cycles = 0;
  bool converged = false;
};

/// Projection of a concatenated (x, u) onto L(p, q) intersected with
/// {e^T u = budget}: Dykstra alternation between the closed-form MESOC
/// projection and the hyperplane. The result lies exactly on the hyperplane.
SectionProjection project_mesoc_budget(ConstVectorView v, std::size_t p, double budget,
                                       double tol, std::size_t max_cycles);

/// Projected subgradient with steps step0 / sqrt(k) and step-weighted
/// averaging over L(T, n) intersected with the budget hyperplane.
MadSolution solve_mad(const MadModel& model, const SolverConfig& cfg = {});

/// Alternates model construction and solving until j* is reproduced by
/// the solution's weights, cycles, or max_outer solves have run.
MadSolution refine_jstar(const ScenarioData& data, double c0, ConstVectorView w_init,
                         std::size_t max_outer, const SolverConfig& cfg = {});

/// Smallest conic objective over `count` random feasible points.
double best_random_feasible_objective(const MadModel& model, std::size_t count,
                                      std::uint64_t seed);

}  // namespace mesoc::portfolio

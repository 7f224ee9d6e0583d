#pragma once

#include <optional>
#include <string_view>

#include "mesoc/cones.hpp"
#include "mesoc/vector.hpp"

namespace mesoc {

// The monotone extended second-order cone
//   L(p,q) = {(x,u) in R^p x R^q : x_1 >= ... >= x_p >= ||u||}
// and its dual
//   L*(p,q) = {(y,v) : y_1 + ... + y_j >= 0 for j < p, sum(y) >= ||v||}.
// For p = 1 both reduce to the Lorentz cone; for q = 0, L is the monotone
// nonnegative cone.

struct MesocPoint {
  RealVector x;  // p >= 1 coordinates
  RealVector u;  // q >= 0 coordinates

  std::size_t p() const { return x.size(); }
  std::size_t q() const { return u.size(); }
  RealVector flat() const { return concat(x, u); }

  /// Splits a concatenated vector of length p + q.
  static MesocPoint split(ConstVectorView flat, std::size_t p);

  friend bool operator==(const MesocPoint&, const MesocPoint&) = default;
};

double dot(const MesocPoint& a, const MesocPoint& b);
double norm(const MesocPoint& a);

enum class ProjectionCase {
  DualDominates,    // u = 0: the cone part absorbs nothing of w
  PrimalDominates,  // v = 0: (z,w) already satisfies the tail condition
  Interior,         // u != 0 and v != 0; requires lambda
};

std::string_view case_name(ProjectionCase c);

struct ProjectionCertificate {
  MesocPoint input;
  MesocPoint primal;       // P_L(z, w)
  MesocPoint dual_of_neg;  // P_{L*}(-z, -w)
  ProjectionCase projection_case;
  std::optional<double> lambda;  // present iff Interior, and then > 0
  double moreau_additive_residual;       // ||(primal - dual_of_neg) - input||
  double moreau_orthogonality_residual;  // |<primal, dual_of_neg>|
};

bool mesoc_contains(const MesocPoint& pt, double tol);
bool mesoc_dual_contains(const MesocPoint& pt, double tol);

/// Largest violation of the defining inequalities of L (0 for members).
double mesoc_violation(const MesocPoint& pt);

ProjectionCertificate project_mesoc(ConstVectorView z, ConstVectorView w);

/// P_{L*}(z, w), obtained as (z, w) + P_L(-z, -w).
MesocPoint project_mesoc_dual(ConstVectorView z, ConstVectorView w);

struct ComplementarityConditions {
  bool tail_equals_norm_u;     // x_p = ||u||
  bool sum_y_equals_norm_v;    // <y, e> = ||v||
  bool u_v_opposite;           // <u, v> = -||u|| ||v||
  bool reduced_pair_complementary;  // (x - ||u|| e, y - ||v|| e^p) in C(R^p_{>=+})

  bool all() const {
    return tail_equals_norm_u && sum_y_equals_norm_v && u_v_opposite &&
           reduced_pair_complementary;
  }
};

struct ComplementarityReport {
  bool primal_member;
  bool dual_member;
  double inner_product;
  bool complementary;  // primal_member && dual_member && |inner| <= tol
  // Only evaluated when u != 0 and v != 0; the characterization does not
  // cover the degenerate cases.
  std::optional<ComplementarityConditions> conditions;
};

ComplementarityReport complementarity_check(const MesocPoint& a, const MesocPoint& b,
                                            double tol);

namespace detail {

/// Applies the closed form of a specific case without checking that its
/// selection condition holds. Used to compare formulas on case overlaps.
ProjectionCertificate project_mesoc_with_case(ConstVectorView z, ConstVectorView w,
                                              ProjectionCase forced);

}  // namespace detail

}  // namespace mesoc

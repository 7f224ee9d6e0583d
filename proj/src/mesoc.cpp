#include "mesoc/mesoc.hpp"

#include <cassert>
#include <string>

namespace mesoc {

namespace {

constexpr double kLiftedTailFloor = 1e-14;

void require_tol(double tol, std::string_view where) {
  if (!(tol >= 0.0) || !std::isfinite(tol)) {
    throw std::invalid_argument(std::string(where) + ": tolerance must be finite and >= 0");
  }
}

void require_point(const MesocPoint& pt, std::string_view where) {
  require_operand(pt.x, where);
  require_finite(pt.u, where);
}

RealVector scaled(ConstVectorView a, double s) {
  RealVector r(a.begin(), a.end());
  for (double& v : r) v *= s;
  return r;
}

void fill_residuals(ProjectionCertificate& cert) {
  const std::size_t p = cert.input.p();
  const std::size_t q = cert.input.q();
  double add = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double d = cert.primal.x[i] - cert.dual_of_neg.x[i] - cert.input.x[i];
    add += d * d;
  }
  for (std::size_t i = 0; i < q; ++i) {
    const double d = cert.primal.u[i] - cert.dual_of_neg.u[i] - cert.input.u[i];
    add += d * d;
  }
  cert.moreau_additive_residual = std::sqrt(add);
  cert.moreau_orthogonality_residual = std::abs(dot(cert.primal, cert.dual_of_neg));
}

// Shared intermediate quantities of the three closed forms.
struct Ingredients {
  RealVector z;
  RealVector w;
  double norm_w;
  RealVector primal_nonneg;   // P_{R>=+}(z)
  RealVector dual_nonneg;     // P_{(R>=+)*}(-z)
};

Ingredients prepare(ConstVectorView z, ConstVectorView w) {
  require_operand(z, "project_mesoc");
  require_finite(w, "project_mesoc");
  Ingredients in{RealVector(z.begin(), z.end()), RealVector(w.begin(), w.end()), norm(w),
                 project_monotone_nonneg(z), {}};
  in.dual_nonneg = project_monotone_nonneg_dual(negated(z));
  return in;
}

ProjectionCertificate apply_case(const Ingredients& in, ProjectionCase c) {
  const std::size_t p = in.z.size();
  const std::size_t q = in.w.size();
  ProjectionCertificate cert{{in.z, in.w}, {}, {}, c, std::nullopt, 0.0, 0.0};

  switch (c) {
    case ProjectionCase::DualDominates:
      cert.primal = {in.primal_nonneg, RealVector(q, 0.0)};
      cert.dual_of_neg = {in.dual_nonneg, negated(in.w)};
      break;
    case ProjectionCase::PrimalDominates:
      cert.primal = {in.primal_nonneg, in.w};
      cert.dual_of_neg = {in.dual_nonneg, RealVector(q, 0.0)};
      break;
    case ProjectionCase::Interior: {
      // The isotonic projection of (z, ||w||) in one extra dimension has
      // last coordinate ||u|| = ||w|| / (1 + lambda).
      RealVector lifted = in.z;
      lifted.push_back(in.norm_w);
      const double tail = project_monotone_nonneg(lifted)[p];
      if (!(tail >= kLiftedTailFloor)) {
        throw InternalError("project_mesoc: lifted projection has vanishing tail");
      }
      const double beta = tail / in.norm_w;       // 1 / (1 + lambda)
      const double norm_u = tail;                 // ||w|| / (1 + lambda)
      const double norm_v = in.norm_w - tail;     // lambda ||w|| / (1 + lambda)
      cert.lambda = in.norm_w / tail - 1.0;

      RealVector f = in.z;
      for (double& v : f) v -= norm_u;
      f[p - 1] += norm_v;

      RealVector x = project_monotone_nonneg(f);
      for (double& v : x) v += norm_u;
      RealVector y = project_monotone_nonneg_dual(negated(f));
      y[p - 1] += norm_v;

      cert.primal = {std::move(x), scaled(in.w, beta)};
      cert.dual_of_neg = {std::move(y), scaled(in.w, -(1.0 - beta))};
      break;
    }
  }
  fill_residuals(cert);
  return cert;
}

}  // namespace

MesocPoint MesocPoint::split(ConstVectorView flat, std::size_t p) {
  if (p == 0 || p > flat.size()) {
    throw DimensionError("MesocPoint::split: need 1 <= p <= length");
  }
  return {RealVector(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(p)),
          RealVector(flat.begin() + static_cast<std::ptrdiff_t>(p), flat.end())};
}

double dot(const MesocPoint& a, const MesocPoint& b) {
  return dot(a.x, b.x) + dot(a.u, b.u);
}

double norm(const MesocPoint& a) {
  const double nx = norm(a.x);
  const double nu = norm(a.u);
  return std::sqrt(nx * nx + nu * nu);
}

std::string_view case_name(ProjectionCase c) {
  switch (c) {
    case ProjectionCase::DualDominates: return "DualDominates";
    case ProjectionCase::PrimalDominates: return "PrimalDominates";
    case ProjectionCase::Interior: return "Interior";
  }
  return "unknown";
}

bool mesoc_contains(const MesocPoint& pt, double tol) {
  require_tol(tol, "mesoc_contains");
  require_point(pt, "mesoc_contains");
  return cone_contains(ConeId::MonotoneCone, pt.x, tol) && pt.x.back() >= norm(pt.u) - tol;
}

bool mesoc_dual_contains(const MesocPoint& pt, double tol) {
  require_tol(tol, "mesoc_dual_contains");
  require_point(pt, "mesoc_dual_contains");
  double prefix = 0.0;
  for (std::size_t j = 0; j + 1 < pt.p(); ++j) {
    prefix += pt.x[j];
    if (prefix < -tol) return false;
  }
  return sum(pt.x) >= norm(pt.u) - tol;
}

double mesoc_violation(const MesocPoint& pt) {
  require_point(pt, "mesoc_violation");
  double worst = std::max(0.0, norm(pt.u) - pt.x.back());
  for (std::size_t i = 0; i + 1 < pt.p(); ++i) {
    worst = std::max(worst, pt.x[i + 1] - pt.x[i]);
  }
  return worst;
}

ProjectionCertificate project_mesoc(ConstVectorView z, ConstVectorView w) {
  const Ingredients in = prepare(z, w);
  const std::size_t p = in.z.size();

  // w = 0 (and q = 0) is always the second case; this avoids 0/0 in lambda.
  if (in.norm_w == 0.0) return apply_case(in, ProjectionCase::PrimalDominates);

  const bool dual_dominates = sum(in.dual_nonneg) >= in.norm_w;
  const bool primal_dominates = in.primal_nonneg[p - 1] >= in.norm_w;
  if (dual_dominates) {
    ProjectionCertificate cert = apply_case(in, ProjectionCase::DualDominates);
#ifndef NDEBUG
    if (primal_dominates) {
      const ProjectionCertificate other = apply_case(in, ProjectionCase::PrimalDominates);
      assert(max_abs_diff(cert.primal.flat(), other.primal.flat()) <= 1e-10 * (1.0 + norm(cert.input)));
    }
#endif
    return cert;
  }
  if (primal_dominates) return apply_case(in, ProjectionCase::PrimalDominates);

  ProjectionCertificate cert = apply_case(in, ProjectionCase::Interior);
  if (!(*cert.lambda > 0.0)) {
    // Rounding put (z, w) on the boundary between cases two and three,
    // where both formulas coincide.
    return apply_case(in, ProjectionCase::PrimalDominates);
  }
  return cert;
}

MesocPoint project_mesoc_dual(ConstVectorView z, ConstVectorView w) {
  require_operand(z, "project_mesoc_dual");
  require_finite(w, "project_mesoc_dual");
  const ProjectionCertificate cert = project_mesoc(negated(z), negated(w));
  MesocPoint out{RealVector(z.begin(), z.end()), RealVector(w.begin(), w.end())};
  for (std::size_t i = 0; i < out.p(); ++i) out.x[i] += cert.primal.x[i];
  for (std::size_t i = 0; i < out.q(); ++i) out.u[i] += cert.primal.u[i];
  return out;
}

ComplementarityReport complementarity_check(const MesocPoint& a, const MesocPoint& b,
                                            double tol) {
  require_tol(tol, "complementarity_check");
  if (a.p() != b.p() || a.q() != b.q()) {
    throw DimensionError("complementarity_check: dimension mismatch");
  }
  require_point(a, "complementarity_check");
  require_point(b, "complementarity_check");

  ComplementarityReport report{};
  report.primal_member = mesoc_contains(a, tol);
  report.dual_member = mesoc_dual_contains(b, tol);
  report.inner_product = dot(a, b);
  report.complementary =
      report.primal_member && report.dual_member && std::abs(report.inner_product) <= tol;

  const double norm_u = norm(a.u);
  const double norm_v = norm(b.u);
  if (norm_u != 0.0 && norm_v != 0.0) {
    const std::size_t p = a.p();
    RealVector x_red = a.x;
    for (double& v : x_red) v -= norm_u;
    RealVector y_red = b.x;
    y_red[p - 1] -= norm_v;

    ComplementarityConditions c{};
    c.tail_equals_norm_u = std::abs(a.x[p - 1] - norm_u) <= tol;
    c.sum_y_equals_norm_v = std::abs(sum(b.x) - norm_v) <= tol;
    c.u_v_opposite = std::abs(dot(a.u, b.u) + norm_u * norm_v) <= tol;
    c.reduced_pair_complementary = cone_contains(ConeId::MonotoneNonneg, x_red, tol) &&
                                   cone_contains(ConeId::MonotoneNonnegDual, y_red, tol) &&
                                   std::abs(dot(x_red, y_red)) <= tol;
    report.conditions = c;
  }
  return report;
}

namespace detail {

ProjectionCertificate project_mesoc_with_case(ConstVectorView z, ConstVectorView w,
                                              ProjectionCase forced) {
  const Ingredients in = prepare(z, w);
  if (forced == ProjectionCase::Interior && in.norm_w == 0.0) {
    throw std::invalid_argument("project_mesoc_with_case: Interior needs w != 0");
  }
  return apply_case(in, forced);
}

}  // namespace detail

}  // namespace mesoc

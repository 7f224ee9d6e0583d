#include "mesoc/cones.hpp"

#include <algorithm>
#include <string>

namespace mesoc {

namespace {

struct Block {
  double sum;
  std::size_t count;
  double mean() const { return sum / static_cast<double>(count); }
};

void require_tol(double tol) {
  if (!(tol >= 0.0) || !std::isfinite(tol)) {
    throw std::invalid_argument("cone_contains: tolerance must be finite and >= 0");
  }
}

bool prefix_sums_nonneg(ConstVectorView z, std::size_t upto, double tol) {
  double s = 0.0;
  for (std::size_t j = 0; j < upto; ++j) {
    s += z[j];
    if (s < -tol) return false;
  }
  return true;
}

bool nonincreasing(ConstVectorView z, double tol) {
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    if (z[i] - z[i + 1] < -tol) return false;
  }
  return true;
}

}  // namespace

ConeId dual_cone(ConeId id) {
  switch (id) {
    case ConeId::MonotoneCone: return ConeId::MonotoneDual;
    case ConeId::MonotoneDual: return ConeId::MonotoneCone;
    case ConeId::MonotoneNonneg: return ConeId::MonotoneNonnegDual;
    case ConeId::MonotoneNonnegDual: return ConeId::MonotoneNonneg;
    case ConeId::NonnegOrthant: return ConeId::NonnegOrthant;
  }
  throw std::invalid_argument("dual_cone: unknown cone");
}

std::string_view cone_name(ConeId id) {
  switch (id) {
    case ConeId::MonotoneCone: return "monotone";
    case ConeId::MonotoneDual: return "monotone-dual";
    case ConeId::MonotoneNonneg: return "monotone-nonneg";
    case ConeId::MonotoneNonnegDual: return "monotone-nonneg-dual";
    case ConeId::NonnegOrthant: return "nonneg-orthant";
  }
  return "unknown";
}

RealVector pava_nonincreasing(ConstVectorView z) {
  require_operand(z, "pava_nonincreasing");

  std::vector<Block> blocks;
  blocks.reserve(z.size());
  for (double v : z) {
    blocks.push_back({v, 1});
    // A left block with a smaller mean than its right neighbour violates
    // the ordering; pool them until the stack is nonincreasing again.
    while (blocks.size() > 1) {
      const Block& right = blocks.back();
      Block& left = blocks[blocks.size() - 2];
      if (left.mean() >= right.mean()) break;
      left.sum += right.sum;
      left.count += right.count;
      blocks.pop_back();
    }
  }

  RealVector out;
  out.reserve(z.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean());
  return out;
}

RealVector project_monotone_dual(ConstVectorView z) {
  require_operand(z, "project_monotone_dual");
  RealVector r = pava_nonincreasing(negated(z));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += z[i];
  return r;
}

RealVector project_monotone_nonneg(ConstVectorView z) {
  require_operand(z, "project_monotone_nonneg");
  RealVector r = pava_nonincreasing(z);
  for (double& v : r) v = std::max(v, 0.0);
  return r;
}

RealVector project_monotone_nonneg_dual(ConstVectorView z) {
  require_operand(z, "project_monotone_nonneg_dual");
  RealVector r = project_monotone_nonneg(negated(z));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += z[i];
  return r;
}

RealVector project_nonneg_orthant(ConstVectorView z) {
  require_operand(z, "project_nonneg_orthant");
  RealVector r(z.begin(), z.end());
  for (double& v : r) v = std::max(v, 0.0);
  return r;
}

RealVector project(ConeId id, ConstVectorView z) {
  switch (id) {
    case ConeId::MonotoneCone: return pava_nonincreasing(z);
    case ConeId::MonotoneDual: return project_monotone_dual(z);
    case ConeId::MonotoneNonneg: return project_monotone_nonneg(z);
    case ConeId::MonotoneNonnegDual: return project_monotone_nonneg_dual(z);
    case ConeId::NonnegOrthant: return project_nonneg_orthant(z);
  }
  throw std::invalid_argument("project: unknown cone");
}

bool cone_contains(ConeId id, ConstVectorView z, double tol) {
  require_tol(tol);
  require_operand(z, "cone_contains");
  const std::size_t p = z.size();
  switch (id) {
    case ConeId::MonotoneCone:
      return nonincreasing(z, tol);
    case ConeId::MonotoneDual:
      return prefix_sums_nonneg(z, p - 1, tol) && std::abs(sum(z)) <= tol;
    case ConeId::MonotoneNonneg:
      return nonincreasing(z, tol) && z[p - 1] >= -tol;
    case ConeId::MonotoneNonnegDual:
      return prefix_sums_nonneg(z, p, tol);
    case ConeId::NonnegOrthant:
      return std::all_of(z.begin(), z.end(), [tol](double v) { return v >= -tol; });
  }
  return false;
}

double abel_sum(ConstVectorView x, ConstVectorView y) {
  if (x.size() != y.size()) throw DimensionError("abel_sum: dimension mismatch");
  require_operand(x, "abel_sum");
  require_finite(y, "abel_sum");
  const std::size_t p = x.size();
  double prefix = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p; ++i) {
    prefix += y[i];
    total += (x[i] - x[i + 1]) * prefix;
  }
  prefix += y[p - 1];
  return total + x[p - 1] * prefix;
}

}  // namespace mesoc

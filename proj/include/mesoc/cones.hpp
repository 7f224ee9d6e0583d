#pragma once

#include <optional>
#include <string_view>

#include "mesoc/vector.hpp"

namespace mesoc {

// Polyhedral ordering cones in R^p. "Monotone" means nonincreasing:
// x_1 >= x_2 >= ... >= x_p.
enum class ConeId {
  MonotoneCone,        // x_1 >= ... >= x_p
  MonotoneDual,        // prefix sums >= 0 for j < p, total sum == 0
  MonotoneNonneg,      // x_1 >= ... >= x_p >= 0
  MonotoneNonnegDual,  // all prefix sums >= 0, including the total
  NonnegOrthant,       // x >= 0, self-dual
};

/// Cone whose dual is `id`; the set {monotone, monotone-nonneg, orthant}
/// together with the duals is closed under this map.
ConeId dual_cone(ConeId id);

std::string_view cone_name(ConeId id);

/// Isotonic regression onto the nonincreasing cone by pool-adjacent-violators.
/// Linear time: each coordinate is pushed once and every merge removes a
/// block. The output is blockwise constant; each block carries the mean of
/// its inputs.
RealVector pava_nonincreasing(ConstVectorView z);

RealVector project_monotone_dual(ConstVectorView z);

/// Positive part of the PAVA output.
RealVector project_monotone_nonneg(ConstVectorView z);

RealVector project_monotone_nonneg_dual(ConstVectorView z);

RealVector project_nonneg_orthant(ConstVectorView z);

/// Dispatches to the projection for `id`.
RealVector project(ConeId id, ConstVectorView z);

/// Every defining inequality of `id` holds up to absolute slack `tol`.
bool cone_contains(ConeId id, ConstVectorView z, double tol);

/// sum_{i<p} (x_i - x_{i+1}) * (y_1 + ... + y_i) + x_p * (y_1 + ... + y_p).
/// Equal to <x, y>; kept as an independent evaluation route for tests.
double abel_sum(ConstVectorView x, ConstVectorView y);

}  // namespace mesoc

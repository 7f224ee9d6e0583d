#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mesoc/errors.hpp"

namespace mesoc {

/// Dense real coordinate vector. All public entry points reject empty or
/// non-finite operands where the operation is undefined for them.
using RealVector = std::vector<double>;
using ConstVectorView = std::span<const double>;

inline double dot(ConstVectorView a, ConstVectorView b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(ConstVectorView a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double sum(ConstVectorView a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s;
}

inline double max_abs_diff(ConstVectorView a, ConstVectorView b) {
  if (a.size() != b.size()) {
    throw DimensionError("max_abs_diff: dimension mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline RealVector negated(ConstVectorView a) {
  RealVector r(a.begin(), a.end());
  for (double& v : r) v = -v;
  return r;
}

inline RealVector concat(ConstVectorView a, ConstVectorView b) {
  RealVector r;
  r.reserve(a.size() + b.size());
  r.insert(r.end(), a.begin(), a.end());
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

/// Throws NonFiniteError naming `where` if any entry is NaN or infinite.
inline void require_finite(ConstVectorView a, std::string_view where) {
  for (double v : a) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(std::string(where) + ": non-finite input");
    }
  }
}

/// Throws DimensionError if `a` is empty, then checks finiteness.
inline void require_operand(ConstVectorView a, std::string_view where) {
  if (a.empty()) {
    throw DimensionError(std::string(where) + ": empty vector");
  }
  require_finite(a, where);
}

}  // namespace mesoc

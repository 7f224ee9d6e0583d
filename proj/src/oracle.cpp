#include "mesoc/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mesoc::oracle {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_index(std::size_t i, std::size_t dim) {
  if (i >= dim) throw DimensionError("convex piece index out of range");
}

void check_normal(const RealVector& a, std::size_t dim) {
  if (a.size() != dim) throw DimensionError("convex piece normal has wrong dimension");
  if (norm(a) == 0.0) throw std::invalid_argument("convex piece has zero normal");
}

double axis_value(const LorentzBlock& b, ConstVectorView z) {
  double t = 0.0;
  for (std::size_t k = 0; k < b.axis_indices.size(); ++k) {
    t += b.axis_weights[k] * z[b.axis_indices[k]];
  }
  return t;
}

double tail_norm(const LorentzBlock& b, ConstVectorView z) {
  double s = 0.0;
  for (std::size_t i : b.vector_indices) s += z[i] * z[i];
  return std::sqrt(s);
}

void check_block(const LorentzBlock& b, std::size_t dim) {
  if (b.axis_indices.empty() || b.axis_indices.size() != b.axis_weights.size()) {
    throw std::invalid_argument("LorentzBlock: axis indices and weights must match and be nonempty");
  }
  if (norm(b.axis_weights) == 0.0) throw std::invalid_argument("LorentzBlock: zero axis");
  std::vector<bool> seen(dim, false);
  auto mark = [&](std::size_t i) {
    check_index(i, dim);
    if (seen[i]) throw std::invalid_argument("LorentzBlock: indices must be disjoint");
    seen[i] = true;
  };
  for (std::size_t i : b.axis_indices) mark(i);
  for (std::size_t i : b.vector_indices) mark(i);
}

RealVector prefix_indicator(std::size_t dim, std::size_t j) {
  RealVector e(dim, 0.0);
  for (std::size_t i = 0; i < j; ++i) e[i] = 1.0;
  return e;
}

std::vector<ConvexPiece> ordering_halfspaces(std::size_t dim, std::size_t p) {
  std::vector<ConvexPiece> pieces;
  for (std::size_t i = 0; i + 1 < p; ++i) {
    RealVector a(dim, 0.0);
    a[i] = 1.0;
    a[i + 1] = -1.0;
    pieces.emplace_back(Halfspace{std::move(a), 0.0});
  }
  return pieces;
}

std::vector<ConvexPiece> prefix_halfspaces(std::size_t dim, std::size_t count) {
  std::vector<ConvexPiece> pieces;
  for (std::size_t j = 1; j <= count; ++j) {
    pieces.emplace_back(Halfspace{prefix_indicator(dim, j), 0.0});
  }
  return pieces;
}

void require_dims(std::size_t p) {
  if (p == 0) throw DimensionError("piece list: p must be >= 1");
}

}  // namespace

RealVector project_piece(const ConvexPiece& piece, ConstVectorView z) {
  RealVector out(z.begin(), z.end());
  const std::size_t dim = z.size();
  std::visit(
      Overloaded{
          [&](const Halfspace& h) {
            check_normal(h.normal, dim);
            const double gap = dot(h.normal, z) - h.offset;
            if (gap >= 0.0) return;
            const double s = gap / dot(h.normal, h.normal);
            for (std::size_t i = 0; i < dim; ++i) out[i] -= s * h.normal[i];
          },
          [&](const Hyperplane& h) {
            check_normal(h.normal, dim);
            const double s = (dot(h.normal, z) - h.offset) / dot(h.normal, h.normal);
            for (std::size_t i = 0; i < dim; ++i) out[i] -= s * h.normal[i];
          },
          [&](const LorentzBlock& b) {
            check_block(b, dim);
            // In the plane spanned by the unit axis a/|a| and the tail, the
            // set is {(t, v) : |v| <= alpha t} with alpha = |a|.
            const double alpha = norm(b.axis_weights);
            const double t = axis_value(b, z) / alpha;
            const double r = tail_norm(b, z);
            if (r <= alpha * t) return;
            double new_t = 0.0;
            double tail_scale = 0.0;
            if (alpha * r > -t) {
              const double c = (t + alpha * r) / (1.0 + alpha * alpha);
              new_t = c;
              tail_scale = r > 0.0 ? c * alpha / r : 0.0;
            }
            const double shift = (new_t - t) / alpha;
            for (std::size_t k = 0; k < b.axis_indices.size(); ++k) {
              out[b.axis_indices[k]] += shift * b.axis_weights[k];
            }
            for (std::size_t i : b.vector_indices) out[i] = z[i] * tail_scale;
          },
          [&](const NonnegOrthant& o) {
            for (std::size_t i : o.indices) {
              check_index(i, dim);
              out[i] = std::max(out[i], 0.0);
            }
          },
      },
      piece);
  return out;
}

bool piece_contains(const ConvexPiece& piece, ConstVectorView z, double tol) {
  return std::visit(
      Overloaded{
          [&](const Halfspace& h) { return dot(h.normal, z) - h.offset >= -tol; },
          [&](const Hyperplane& h) { return std::abs(dot(h.normal, z) - h.offset) <= tol; },
          [&](const LorentzBlock& b) { return axis_value(b, z) >= tail_norm(b, z) - tol; },
          [&](const NonnegOrthant& o) {
            for (std::size_t i : o.indices) {
              if (z[i] < -tol) return false;
            }
            return true;
          },
      },
      piece);
}

DykstraResult dykstra_project(const std::vector<ConvexPiece>& pieces, ConstVectorView z,
                              const DykstraConfig& cfg) {
  if (pieces.empty()) throw std::invalid_argument("dykstra_project: empty piece list");
  if (!(cfg.tol > 0.0) || cfg.max_cycles < 1) {
    throw std::invalid_argument("dykstra_project: need tol > 0 and max_cycles >= 1");
  }
  require_operand(z, "dykstra_project");

  const std::size_t dim = z.size();
  DykstraResult result;
  result.point.assign(z.begin(), z.end());
  std::vector<RealVector> corrections(pieces.size(), RealVector(dim, 0.0));
  RealVector shifted(dim);
  const double tol_sq = cfg.tol * cfg.tol;

  for (std::size_t cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    double change_sq = 0.0;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      RealVector& corr = corrections[k];
      for (std::size_t i = 0; i < dim; ++i) shifted[i] = result.point[i] + corr[i];
      result.point = project_piece(pieces[k], shifted);
      for (std::size_t i = 0; i < dim; ++i) {
        const double next = shifted[i] - result.point[i];
        const double d = next - corr[i];
        change_sq += d * d;
        corr[i] = next;
      }
    }
    result.cycles = cycle;
    result.increment = std::sqrt(change_sq);
    if (change_sq < tol_sq) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::vector<ConvexPiece> mesoc_pieces(std::size_t p, std::size_t q) {
  require_dims(p);
  const std::size_t dim = p + q;
  std::vector<ConvexPiece> pieces = ordering_halfspaces(dim, p);
  LorentzBlock block{{p - 1}, {1.0}, {}};
  for (std::size_t i = p; i < dim; ++i) block.vector_indices.push_back(i);
  pieces.emplace_back(std::move(block));
  return pieces;
}

std::vector<ConvexPiece> mesoc_dual_pieces(std::size_t p, std::size_t q) {
  require_dims(p);
  const std::size_t dim = p + q;
  std::vector<ConvexPiece> pieces = prefix_halfspaces(dim, p - 1);
  LorentzBlock block{{}, RealVector(p, 1.0), {}};
  for (std::size_t i = 0; i < p; ++i) block.axis_indices.push_back(i);
  for (std::size_t i = p; i < dim; ++i) block.vector_indices.push_back(i);
  pieces.emplace_back(std::move(block));
  return pieces;
}

std::vector<ConvexPiece> monotone_pieces(std::size_t p) {
  require_dims(p);
  return ordering_halfspaces(p, p);
}

std::vector<ConvexPiece> monotone_nonneg_pieces(std::size_t p) {
  require_dims(p);
  std::vector<ConvexPiece> pieces = ordering_halfspaces(p, p);
  NonnegOrthant orthant;
  for (std::size_t i = 0; i < p; ++i) orthant.indices.push_back(i);
  pieces.emplace_back(std::move(orthant));
  return pieces;
}

std::vector<ConvexPiece> monotone_dual_pieces(std::size_t p) {
  require_dims(p);
  std::vector<ConvexPiece> pieces = prefix_halfspaces(p, p - 1);
  pieces.emplace_back(Hyperplane{RealVector(p, 1.0), 0.0});
  return pieces;
}

std::vector<ConvexPiece> monotone_nonneg_dual_pieces(std::size_t p) {
  require_dims(p);
  return prefix_halfspaces(p, p);
}

}  // namespace mesoc::oracle

#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "mesoc/vector.hpp"

namespace mesoc::oracle {

// Elementary closed convex sets with closed-form Euclidean projections.
// Intersections of these describe every cone in this library, which lets
// Dykstra's method serve as an independent reference projection.

/// {z : <normal, z> >= offset}
struct Halfspace {
  RealVector normal;
  double offset = 0.0;
};

/// {z : <normal, z> = offset}
struct Hyperplane {
  RealVector normal;
  double offset = 0.0;
};

/// {z : sum_k axis_weights[k] * z[axis_indices[k]] >= ||z restricted to vector_indices||}.
/// A single unit weight gives the usual Lorentz block (t, u) with t >= ||u||;
/// all-ones weights over a range give <y, e> >= ||v||.
struct LorentzBlock {
  std::vector<std::size_t> axis_indices;
  RealVector axis_weights;
  std::vector<std::size_t> vector_indices;
};

/// {z : z[i] >= 0 for i in indices}
struct NonnegOrthant {
  std::vector<std::size_t> indices;
};

using ConvexPiece = std::variant<Halfspace, Hyperplane, LorentzBlock, NonnegOrthant>;

struct DykstraConfig {
  double tol = 1e-10;
  std::size_t max_cycles = 200000;
};

struct DykstraResult {
  RealVector point;
  std::size_t cycles = 0;
  double increment = 0.0;  // sqrt of the summed squared correction changes in the last cycle
  bool converged = false;
};

RealVector project_piece(const ConvexPiece& piece, ConstVectorView z);

/// Membership of a single piece with absolute slack `tol`.
bool piece_contains(const ConvexPiece& piece, ConstVectorView z, double tol);

/// Cyclic Dykstra projection onto the intersection of `pieces`, visited in
/// list order. Stops once the corrections change by less than cfg.tol over
/// a full cycle; hitting max_cycles yields converged == false.
DykstraResult dykstra_project(const std::vector<ConvexPiece>& pieces, ConstVectorView z,
                              const DykstraConfig& cfg = {});

// Piece lists. The MESOC encodings act on concatenated (x, u) vectors of
// length p + q; the others act on R^p.
std::vector<ConvexPiece> mesoc_pieces(std::size_t p, std::size_t q);
std::vector<ConvexPiece> mesoc_dual_pieces(std::size_t p, std::size_t q);
std::vector<ConvexPiece> monotone_pieces(std::size_t p);
std::vector<ConvexPiece> monotone_nonneg_pieces(std::size_t p);
std::vector<ConvexPiece> monotone_dual_pieces(std::size_t p);
std::vector<ConvexPiece> monotone_nonneg_dual_pieces(std::size_t p);

}  // namespace mesoc::oracle

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gffpin {

// Site potentials that are piecewise constant in the field value.
//   pinning:          c_x * 1[|phi| <= 1]
//   comembrane_delta: c_x * 1[phi < 0]
//   comembrane_sign:  c_x * sign(phi), sign(0) = +1
enum class InteractionKind { pinning, comembrane_delta, comembrane_sign };

struct Piece {
  double lo;
  double hi;
  double log_weight;
};

struct Interaction {
  InteractionKind kind = InteractionKind::pinning;
  std::vector<std::size_t> region;  // sites carrying a coupling, canonical order
  std::vector<double> coupling;     // full-box length, zero off the region

  double site_energy(std::size_t idx, double phi) const;
  double energy(std::span<const double> field) const;
  // Pieces of the potential at a site, covering the real line.
  int pieces(std::size_t idx, Piece* out) const;
};

}  // namespace gffpin

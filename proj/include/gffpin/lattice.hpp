#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gffpin {

using Site = std::vector<int>;

enum class SiteKind { boundary, inner_boundary, deep_interior };
enum class SumRegion { tilde, interior, all };

const char* to_string(SiteKind k);
const char* to_string(SumRegion r);
SumRegion sum_region_from_string(const std::string& s);

struct Classification {
  SiteKind kind;
  double dist = 0.0;  // Euclidean distance to the boundary set
  bool interior() const { return kind != SiteKind::boundary; }
};

// Box {0..N}^d shifted by an offset. Site indices are row-major over the
// local coordinates with axis 0 slowest.
class Box {
 public:
  Box(int d, int N, std::vector<int> offset = {});

  int dim() const { return d_; }
  int edge() const { return N_; }
  const std::vector<int>& offset() const { return offset_; }
  std::size_t num_sites() const { return n_sites_; }
  std::size_t side() const { return std::size_t(N_) + 1; }

  bool contains(const Site& x) const;
  std::size_t index(const Site& x) const;
  Site site(std::size_t idx) const;
  void local_coords(std::size_t idx, std::span<int> out) const;
  std::size_t index_local(std::span<const int> c) const;

  bool is_boundary(std::size_t idx) const;
  bool in_tilde(std::size_t idx) const;
  double dist_to_boundary(std::size_t idx) const;
  Classification classify(const Site& x) const;

  // Canonical-order site lists, materialised on first use.
  const std::vector<std::size_t>& boundary() const;
  const std::vector<std::size_t>& interior() const;
  const std::vector<std::size_t>& inner_boundary() const;
  const std::vector<std::size_t>& tilde() const;
  const std::vector<std::size_t>& all() const;
  const std::vector<std::size_t>& region(SumRegion r) const;

  // Position of a site in interior()/boundary(), or -1.
  std::ptrdiff_t interior_slot(std::size_t idx) const;
  std::ptrdiff_t boundary_slot(std::size_t idx) const;

  // Lattice neighbours inside the box.
  void neighbors(std::size_t idx, std::vector<std::size_t>& out) const;

  bool operator==(const Box& o) const { return d_ == o.d_ && N_ == o.N_ && offset_ == o.offset_; }

 private:
  struct Cache;
  const Cache& cache() const;

  int d_;
  int N_;
  std::vector<int> offset_;
  std::size_t n_sites_;
  std::vector<std::size_t> stride_;
  std::shared_ptr<Cache> cache_;
};

// Coarse-graining grid: blocks B_j = {x : ceil(x_i / N0) = j_i} for j in
// J = {2..N1/N0-1}^d, halos C_j = {x : dist(x, B_j) <= N0/2}.
class CoarseGrid {
 public:
  CoarseGrid(int d, int N1, int N0);

  int dim() const { return d_; }
  int N1() const { return N1_; }
  int N0() const { return N0_; }
  int ratio() const { return N1_ / N0_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }

  // Block label of a site, empty if the site is outside the inner region.
  std::vector<int> block_of(const Site& x) const;
  bool in_inner_region(const Site& x) const;
  bool in_block(const std::vector<int>& j, const Site& x) const;
  double dist_to_block(const std::vector<int>& j, const Site& x) const;
  bool in_halo(const std::vector<int>& j, const Site& x) const;
  // Parity class w in {0,1}^d, encoded as bits.
  unsigned parity(const std::vector<int>& j) const;
  std::vector<std::vector<int>> parity_class(unsigned w) const;

  std::vector<Site> block_sites(const std::vector<int>& j) const;
  std::vector<Site> halo_sites(const std::vector<int>& j) const;

 private:
  int d_, N1_, N0_;
  std::vector<std::vector<int>> blocks_;
};

CoarseGrid build_coarse_grid(int d, int N1, int N0);

}  // namespace gffpin

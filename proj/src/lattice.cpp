#include "gffpin/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "gffpin/errors.hpp"

namespace gffpin {

const char* to_string(SiteKind k) {
  switch (k) {
    case SiteKind::boundary: return "boundary";
    case SiteKind::inner_boundary: return "inner-boundary";
    case SiteKind::deep_interior: return "deep-interior";
  }
  return "?";
}

const char* to_string(SumRegion r) {
  switch (r) {
    case SumRegion::tilde: return "tilde";
    case SumRegion::interior: return "interior";
    case SumRegion::all: return "all";
  }
  return "?";
}

SumRegion sum_region_from_string(const std::string& s) {
  if (s == "tilde") return SumRegion::tilde;
  if (s == "interior") return SumRegion::interior;
  if (s == "all") return SumRegion::all;
  throw ConfigError("unknown sum region: " + s);
}

struct Box::Cache {
  std::once_flag once;
  std::vector<std::size_t> boundary, interior, inner, tilde, all;
  std::vector<std::ptrdiff_t> islot, bslot;
};

Box::Box(int d, int N, std::vector<int> offset)
    : d_(d), N_(N), offset_(std::move(offset)), cache_(std::make_shared<Cache>()) {
  if (d < 1) throw DomainError("Box: d < 1");
  if (N < 1) throw DomainError("Box: N < 1");
  if (offset_.empty()) offset_.assign(std::size_t(d), 0);
  if (int(offset_.size()) != d) throw DomainError("Box: offset dimension mismatch");
  stride_.assign(std::size_t(d), 1);
  for (int i = d - 2; i >= 0; --i) stride_[std::size_t(i)] = stride_[std::size_t(i) + 1] * side();
  n_sites_ = stride_[0] * side();
}

bool Box::contains(const Site& x) const {
  if (int(x.size()) != d_) return false;
  for (int i = 0; i < d_; ++i) {
    const int c = x[std::size_t(i)] - offset_[std::size_t(i)];
    if (c < 0 || c > N_) return false;
  }
  return true;
}

std::size_t Box::index(const Site& x) const {
  if (!contains(x)) throw DomainError("site outside box");
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) idx += std::size_t(x[std::size_t(i)] - offset_[std::size_t(i)]) * stride_[std::size_t(i)];
  return idx;
}

std::size_t Box::index_local(std::span<const int> c) const {
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) idx += std::size_t(c[std::size_t(i)]) * stride_[std::size_t(i)];
  return idx;
}

void Box::local_coords(std::size_t idx, std::span<int> out) const {
  for (int i = 0; i < d_; ++i) {
    out[std::size_t(i)] = int(idx / stride_[std::size_t(i)]);
    idx %= stride_[std::size_t(i)];
  }
}

Site Box::site(std::size_t idx) const {
  Site s(static_cast<std::size_t>(d_));
  local_coords(idx, s);
  for (int i = 0; i < d_; ++i) s[std::size_t(i)] += offset_[std::size_t(i)];
  return s;
}

bool Box::is_boundary(std::size_t idx) const {
  for (int i = 0; i < d_; ++i) {
    const int c = int(idx / stride_[std::size_t(i)]);
    idx %= stride_[std::size_t(i)];
    if (c == 0 || c == N_) return true;
  }
  return false;
}

bool Box::in_tilde(std::size_t idx) const {
  for (int i = 0; i < d_; ++i) {
    const int c = int(idx / stride_[std::size_t(i)]);
    idx %= stride_[std::size_t(i)];
    if (c == 0) return false;
  }
  return true;
}

double Box::dist_to_boundary(std::size_t idx) const {
  int best = N_;
  for (int i = 0; i < d_; ++i) {
    const int c = int(idx / stride_[std::size_t(i)]);
    idx %= stride_[std::size_t(i)];
    best = std::min({best, c, N_ - c});
  }
  return double(best);
}

Classification Box::classify(const Site& x) const {
  const std::size_t idx = index(x);
  Classification c;
  c.dist = dist_to_boundary(idx);
  if (c.dist == 0.0) c.kind = SiteKind::boundary;
  else if (c.dist == 1.0) c.kind = SiteKind::inner_boundary;
  else c.kind = SiteKind::deep_interior;
  return c;
}

const Box::Cache& Box::cache() const {
  std::call_once(cache_->once, [this] {
    Cache& c = *cache_;
    c.islot.assign(n_sites_, -1);
    c.bslot.assign(n_sites_, -1);
    for (std::size_t i = 0; i < n_sites_; ++i) {
      c.all.push_back(i);
      const double dist = dist_to_boundary(i);
      if (dist == 0.0) {
        c.bslot[i] = std::ptrdiff_t(c.boundary.size());
        c.boundary.push_back(i);
      } else {
        c.islot[i] = std::ptrdiff_t(c.interior.size());
        c.interior.push_back(i);
        if (dist == 1.0) c.inner.push_back(i);
      }
      if (in_tilde(i)) c.tilde.push_back(i);
    }
  });
  return *cache_;
}

const std::vector<std::size_t>& Box::boundary() const { return cache().boundary; }
const std::vector<std::size_t>& Box::interior() const { return cache().interior; }
const std::vector<std::size_t>& Box::inner_boundary() const { return cache().inner; }
const std::vector<std::size_t>& Box::tilde() const { return cache().tilde; }
const std::vector<std::size_t>& Box::all() const { return cache().all; }

const std::vector<std::size_t>& Box::region(SumRegion r) const {
  switch (r) {
    case SumRegion::tilde: return tilde();
    case SumRegion::interior: return interior();
    case SumRegion::all: return all();
  }
  return tilde();
}

std::ptrdiff_t Box::interior_slot(std::size_t idx) const { return cache().islot[idx]; }
std::ptrdiff_t Box::boundary_slot(std::size_t idx) const { return cache().bslot[idx]; }

void Box::neighbors(std::size_t idx, std::vector<std::size_t>& out) const {
  out.clear();
  std::size_t rem = idx;
  for (int i = 0; i < d_; ++i) {
    const std::size_t st = stride_[std::size_t(i)];
    const int c = int(rem / st);
    rem %= st;
    if (c > 0) out.push_back(idx - st);
    if (c < N_) out.push_back(idx + st);
  }
}

// ---------------------------------------------------------------------------

CoarseGrid::CoarseGrid(int d, int N1, int N0) : d_(d), N1_(N1), N0_(N0) {
  if (d < 1) throw ConfigError("CoarseGrid: d < 1");
  if (N0 < 1 || N1 % N0 != 0) throw ConfigError("CoarseGrid: N1/N0 must be an integer");
  const int r = N1 / N0;
  if (r % 2 != 0 || r < 4) throw ConfigError("CoarseGrid: N1/N0 must be even and >= 4");
  const int side = r - 2;
  std::size_t count = 1;
  for (int i = 0; i < d; ++i) count *= std::size_t(side);
  std::vector<int> j(static_cast<std::size_t>(d), 2);
  for (std::size_t k = 0; k < count; ++k) {
    blocks_.push_back(j);
    for (int i = d - 1; i >= 0; --i) {
      if (++j[std::size_t(i)] <= r - 1) break;
      j[std::size_t(i)] = 2;
    }
  }
}

static int ceil_div(int x, int n) {
  return x >= 0 ? (x + n - 1) / n : -((-x) / n);
}

std::vector<int> CoarseGrid::block_of(const Site& x) const {
  std::vector<int> j(static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i) {
    j[std::size_t(i)] = ceil_div(x[std::size_t(i)], N0_);
    if (j[std::size_t(i)] < 2 || j[std::size_t(i)] > ratio() - 1) return {};
  }
  return j;
}

bool CoarseGrid::in_inner_region(const Site& x) const {
  for (int i = 0; i < d_; ++i) {
    const int c = x[std::size_t(i)];
    if (c < N0_ + 1 || c > N1_ - N0_) return false;
  }
  return true;
}

bool CoarseGrid::in_block(const std::vector<int>& j, const Site& x) const {
  for (int i = 0; i < d_; ++i)
    if (ceil_div(x[std::size_t(i)], N0_) != j[std::size_t(i)]) return false;
  return true;
}

double CoarseGrid::dist_to_block(const std::vector<int>& j, const Site& x) const {
  double s = 0.0;
  for (int i = 0; i < d_; ++i) {
    const int lo = N0_ * (j[std::size_t(i)] - 1) + 1;
    const int hi = N0_ * j[std::size_t(i)];
    const int c = x[std::size_t(i)];
    const int gap = c < lo ? lo - c : (c > hi ? c - hi : 0);
    s += double(gap) * double(gap);
  }
  return std::sqrt(s);
}

bool CoarseGrid::in_halo(const std::vector<int>& j, const Site& x) const {
  return dist_to_block(j, x) <= 0.5 * N0_;
}

unsigned CoarseGrid::parity(const std::vector<int>& j) const {
  unsigned w = 0;
  for (int i = 0; i < d_; ++i)
    if (j[std::size_t(i)] % 2) w |= 1u << i;
  return w;
}

std::vector<std::vector<int>> CoarseGrid::parity_class(unsigned w) const {
  std::vector<std::vector<int>> out;
  for (const auto& j : blocks_)
    if (parity(j) == w) out.push_back(j);
  return out;
}

std::vector<Site> CoarseGrid::block_sites(const std::vector<int>& j) const {
  std::vector<Site> out;
  Site x(static_cast<std::size_t>(d_));
  std::size_t count = 1;
  for (int i = 0; i < d_; ++i) count *= std::size_t(N0_);
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t r = k;
    for (int i = d_ - 1; i >= 0; --i) {
      x[std::size_t(i)] = N0_ * (j[std::size_t(i)] - 1) + 1 + int(r % std::size_t(N0_));
      r /= std::size_t(N0_);
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Site> CoarseGrid::halo_sites(const std::vector<int>& j) const {
  std::vector<Site> out;
  const int pad = N0_ / 2;
  const int w = N0_ + 2 * pad;
  std::size_t count = 1;
  for (int i = 0; i < d_; ++i) count *= std::size_t(w);
  Site x(static_cast<std::size_t>(d_));
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t r = k;
    for (int i = d_ - 1; i >= 0; --i) {
      x[std::size_t(i)] = N0_ * (j[std::size_t(i)] - 1) + 1 - pad + int(r % std::size_t(w));
      r /= std::size_t(w);
    }
    if (in_halo(j, x)) out.push_back(x);
  }
  return out;
}

CoarseGrid build_coarse_grid(int d, int N1, int N0) { return CoarseGrid(d, N1, N0); }

}  // namespace gffpin

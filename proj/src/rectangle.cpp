#include "gffpin/rectangle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "gffpin/errors.hpp"
#include "gffpin/special.hpp"

namespace gffpin {

int default_rectangle_nodes(int dim) {
  static const int table[] = {1, 32, 24, 18, 14, 10, 8, 7, 6, 5};
  if (dim < 0) return 1;
  if (dim < 10) return table[dim];
  return 4;
}

double rectangle_probability(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, std::span<const double> lo,
                             std::span<const double> hi, int nodes) {
  const int k = int(mu.size());
  if (k == 0) return 1.0;
  if (sigma.rows() != k || sigma.cols() != k || int(lo.size()) != k || int(hi.size()) != k)
    throw DomainError("rectangle_probability: size mismatch");
  // Variables with the narrowest marginal probability first.
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> marg(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double s = std::sqrt(sigma(i, i));
    marg[std::size_t(i)] = norm_interval((lo[std::size_t(i)] - mu(i)) / s, (hi[std::size_t(i)] - mu(i)) / s);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return marg[std::size_t(a)] < marg[std::size_t(b)]; });
  Eigen::MatrixXd S(k, k);
  Eigen::VectorXd m(k), a(k), b(k);
  for (int i = 0; i < k; ++i) {
    const int oi = order[std::size_t(i)];
    m(i) = mu(oi);
    a(i) = lo[std::size_t(oi)];
    b(i) = hi[std::size_t(oi)];
    for (int j = 0; j < k; ++j) S(i, j) = sigma(oi, order[std::size_t(j)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw DomainError("rectangle_probability: covariance not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  if (nodes <= 0) nodes = default_rectangle_nodes(k - 1);
  const QuadRule q = gauss_legendre(nodes, 0.0, 1.0);
  std::vector<double> y(static_cast<std::size_t>(k), 0.0);

  // Depth-first over the tensor grid; level i conditions on y_0..y_{i-1}.
  auto rec = [&](auto&& self, int i) -> double {
    double s = 0.0;
    for (int j = 0; j < i; ++j) s += L(i, j) * y[std::size_t(j)];
    const double ai = (a(i) - m(i) - s) / L(i, i);
    const double bi = (b(i) - m(i) - s) / L(i, i);
    const double e = norm_interval(ai, bi);
    if (i == k - 1 || e == 0.0) return e;
    double acc = 0.0;
    for (int t = 0; t < nodes; ++t) {
      y[std::size_t(i)] = truncated_norm_quantile(ai, bi, q.x[std::size_t(t)]);
      acc += q.w[std::size_t(t)] * self(self, i + 1);
    }
    return e * acc;
  };
  return rec(rec, 0);
}

ContactPatternTable::ContactPatternTable(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, double lo, double hi,
                                         int extra_nodes)
    : k_(int(mean.size())) {
  if (k_ > kMaxSites) throw ConfigError("exact oracle: more than 10 fluctuating sites");
  const std::uint32_t full = 1u << k_;
  rect_.assign(full, 1.0);
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    const int c = std::popcount(mask);
    std::vector<int> idx;
    for (int i = 0; i < k_; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    Eigen::VectorXd mu(c);
    Eigen::MatrixXd S(c, c);
    for (int i = 0; i < c; ++i) {
      mu(i) = mean(idx[std::size_t(i)]);
      for (int j = 0; j < c; ++j) S(i, j) = cov(idx[std::size_t(i)], idx[std::size_t(j)]);
    }
    std::vector<double> lv(static_cast<std::size_t>(c), lo), hv(static_cast<std::size_t>(c), hi);
    rect_[mask] = rectangle_probability(mu, S, lv, hv, default_rectangle_nodes(c - 1) + extra_nodes);
  }
  // Moebius: P(exactly p) = sum_{T superset of p} (-1)^{|T\p|} R(T).
  pattern_ = rect_;
  for (int i = 0; i < k_; ++i)
    for (std::uint32_t mask = 0; mask < full; ++mask)
      if (!(mask & (1u << i))) pattern_[mask] -= pattern_[mask | (1u << i)];
}

double ContactPatternTable::subset_expansion(std::span<const double> xi) const {
  const std::uint32_t full = 1u << k_;
  double z = 0.0;
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    double p = rect_[mask];
    for (int i = 0; i < k_; ++i)
      if (mask & (1u << i)) p *= xi[std::size_t(i)];
    z += p;
  }
  return z;
}

double ContactPatternTable::pattern_expectation(std::span<const double> zeta) const {
  const std::uint32_t full = 1u << k_;
  double z = 0.0;
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    double e = 0.0;
    for (int i = 0; i < k_; ++i)
      if (mask & (1u << i)) e += zeta[std::size_t(i)];
    z += pattern_[mask] * std::exp(e);
  }
  return z;
}

}  // namespace gffpin

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gffpin {

// P(lo_i <= X_i <= hi_i for all i), X ~ N(mu, sigma). Sequential
// conditioning maps the integral to the unit cube, which is then
// integrated with a tensor Gauss-Legendre rule of `nodes` points per axis
// (nodes <= 0 picks a default by dimension).
double rectangle_probability(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, std::span<const double> lo,
                             std::span<const double> hi, int nodes = 0);

int default_rectangle_nodes(int dim);

// Rectangle probabilities R(T) = P(X_x in [-1,1] for x in T) for every
// subset T of a small site set, and the exact contact-pattern law.
class ContactPatternTable {
 public:
  static constexpr int kMaxSites = 10;

  ContactPatternTable(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, double lo = -1.0, double hi = 1.0,
                      int extra_nodes = 0);

  int size() const { return k_; }
  double rect(std::uint32_t mask) const { return rect_[mask]; }
  // P(contact set == mask) by Moebius inversion.
  const std::vector<double>& patterns() const { return pattern_; }
  // sum_T prod_{x in T} xi_x R(T)
  double subset_expansion(std::span<const double> xi) const;
  // sum over patterns of P(pattern) exp(sum_{x in pattern} zeta_x)
  double pattern_expectation(std::span<const double> zeta) const;

 private:
  int k_;
  std::vector<double> rect_;
  std::vector<double> pattern_;
};

}  // namespace gffpin

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gffpin/rng.hpp"

namespace gffpin {

enum class DisorderKind { gaussian, rademacher, finite_support };

// Centered, unit-variance i.i.d. law of the disorder with cumulant
// lambda(beta) = log E exp(beta omega).
class DisorderLaw {
 public:
  static DisorderLaw gaussian();
  static DisorderLaw rademacher();
  // Values are shifted and scaled to mean 0, variance 1.
  static DisorderLaw finite_support(std::vector<double> values, std::vector<double> probs);

  DisorderKind kind() const { return kind_; }
  std::string name() const;
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }

  // lambda is finite for beta in (-beta_bar, 2 beta_bar); default beta_bar = inf.
  void set_window(double beta_bar) { beta_bar_ = beta_bar; }
  double window() const { return beta_bar_; }

  double lambda(double beta) const;
  double lambda_prime(double beta) const;
  double sample(Philox& rng) const;

 private:
  void check_window(double beta) const;

  DisorderKind kind_ = DisorderKind::gaussian;
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double beta_bar_;
};

struct DisorderSample {
  std::vector<std::size_t> sites;  // region site indices of the box
  std::vector<double> omega;       // one value per site
  std::uint64_t seed = 0;
};

DisorderSample sample_disorder(const DisorderLaw& law, const std::vector<std::size_t>& sites, const StreamKey& key);

// exp(lambda(beta - alpha) - lambda(-alpha) - lambda(beta) + h).
double tilt_check(const DisorderLaw& law, double beta, double alpha, double h);

}  // namespace gffpin

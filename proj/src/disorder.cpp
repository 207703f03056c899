#include "gffpin/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gffpin/errors.hpp"

namespace gffpin {

namespace {
double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}
}  // namespace

DisorderLaw DisorderLaw::gaussian() {
  DisorderLaw l;
  l.kind_ = DisorderKind::gaussian;
  l.beta_bar_ = std::numeric_limits<double>::infinity();
  return l;
}

DisorderLaw DisorderLaw::rademacher() {
  DisorderLaw l;
  l.kind_ = DisorderKind::rademacher;
  l.values_ = {-1.0, 1.0};
  l.probs_ = {0.5, 0.5};
  l.cdf_ = {0.5, 1.0};
  l.beta_bar_ = std::numeric_limits<double>::infinity();
  return l;
}

DisorderLaw DisorderLaw::finite_support(std::vector<double> values, std::vector<double> probs) {
  if (values.size() != probs.size() || values.size() < 2) throw ConfigError("finite_support: need >= 2 values with matching probabilities");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw ConfigError("finite_support: probabilities must be positive");
    total += p;
  }
  for (double& p : probs) p /= total;
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += probs[i] * values[i];
  for (std::size_t i = 0; i < values.size(); ++i) var += probs[i] * (values[i] - mean) * (values[i] - mean);
  if (!(var > 0.0)) throw ConfigError("finite_support: degenerate law");
  const double sd = std::sqrt(var);
  for (double& v : values) v = (v - mean) / sd;
  DisorderLaw l;
  l.kind_ = DisorderKind::finite_support;
  l.values_ = std::move(values);
  l.probs_ = std::move(probs);
  std::partial_sum(l.probs_.begin(), l.probs_.end(), std::back_inserter(l.cdf_));
  l.cdf_.back() = 1.0;
  l.beta_bar_ = std::numeric_limits<double>::infinity();
  return l;
}

std::string DisorderLaw::name() const {
  switch (kind_) {
    case DisorderKind::gaussian: return "gaussian";
    case DisorderKind::rademacher: return "rademacher";
    case DisorderKind::finite_support: return "finite_support";
  }
  return "?";
}

void DisorderLaw::check_window(double beta) const {
  if (!std::isfinite(beta) || beta <= -beta_bar_ || beta >= 2.0 * beta_bar_)
    throw DomainError("lambda: beta outside the finiteness window");
}

double DisorderLaw::lambda(double beta) const {
  check_window(beta);
  switch (kind_) {
    case DisorderKind::gaussian: return 0.5 * beta * beta;
    case DisorderKind::rademacher: return log_cosh(beta);
    case DisorderKind::finite_support: {
      double mx = -std::numeric_limits<double>::infinity();
      for (double v : values_) mx = std::max(mx, beta * v);
      double s = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) s += probs_[i] * std::exp(beta * values_[i] - mx);
      return mx + std::log(s);
    }
  }
  return 0.0;
}

double DisorderLaw::lambda_prime(double beta) const {
  check_window(beta);
  switch (kind_) {
    case DisorderKind::gaussian: return beta;
    case DisorderKind::rademacher: return std::tanh(beta);
    case DisorderKind::finite_support: {
      const double lam = lambda(beta);
      double s = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) s += probs_[i] * values_[i] * std::exp(beta * values_[i] - lam);
      return s;
    }
  }
  return 0.0;
}

double DisorderLaw::sample(Philox& rng) const {
  if (kind_ == DisorderKind::gaussian) return rng.normal();
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t k = std::min<std::size_t>(std::size_t(it - cdf_.begin()), values_.size() - 1);
  return values_[k];
}

DisorderSample sample_disorder(const DisorderLaw& law, const std::vector<std::size_t>& sites, const StreamKey& key) {
  DisorderSample s;
  s.sites = sites;
  s.seed = key.id();
  Philox rng = key.engine();
  s.omega.resize(sites.size());
  for (double& w : s.omega) w = law.sample(rng);
  return s;
}

double tilt_check(const DisorderLaw& law, double beta, double alpha, double h) {
  return std::exp(law.lambda(beta - alpha) - law.lambda(-alpha) - law.lambda(beta) + h);
}

}  // namespace gffpin

#include "gffpin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gffpin {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return pairwise_sum(v) / double(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return std::sqrt(pairwise_sum(sq) / double(v.size() - 1));
}

double stderr_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return sample_sd(v) / std::sqrt(double(v.size()));
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  std::vector<double> e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = std::exp(v[i] - mx);
  return mx + std::log(pairwise_sum(e));
}

LogMeanExp log_mean_exp(std::span<const double> v) {
  LogMeanExp r;
  const std::size_t n = v.size();
  if (n == 0) return r;
  const double mx = *std::max_element(v.begin(), v.end());
  r.log_shift = mx;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(v[i] - mx);
  const double s = pairwise_sum(w);
  r.mean_exp_scaled = s / double(n);
  r.stderr_scaled = stderr_of(w);
  r.raw = mx + std::log(r.mean_exp_scaled);
  r.mean_exp = std::exp(r.raw);
  r.mean_exp_stderr = r.stderr_scaled * std::exp(mx);
  if (n < 2) {
    r.jackknife = r.raw;
    return r;
  }
  // Leave-one-out log sums from prefix/suffix accumulations of scaled weights.
  std::vector<double> pre(n + 1, 0.0), suf(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] + w[i];
  for (std::size_t i = n; i-- > 0;) suf[i] = suf[i + 1] + w[i];
  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    double rest = pre[i] + suf[i + 1];
    if (rest <= 0.0) rest = std::numeric_limits<double>::min();
    loo[i] = mx + std::log(rest / double(n - 1));
  }
  const double lbar = mean_of(loo);
  r.jackknife = double(n) * r.raw - double(n - 1) * lbar;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (loo[i] - lbar) * (loo[i] - lbar);
  r.jk_stderr = std::sqrt(double(n - 1) / double(n) * pairwise_sum(sq));
  return r;
}

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = double(n);
  const double p = double(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double batch_means_stderr(std::span<const double> series, int n_batches) {
  const std::size_t n = series.size();
  if (n < 2) return 0.0;
  const std::size_t nb = std::min<std::size_t>(std::max(n_batches, 2), n);
  const std::size_t len = n / nb;
  std::vector<double> means;
  for (std::size_t b = 0; b < nb; ++b) means.push_back(mean_of(series.subspan(b * len, len)));
  return stderr_of(means);
}

}  // namespace gffpin

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gffpin {

// Monte Carlo scalar with provenance.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_replicas = 0;
  std::uint64_t n_mc = 0;
  std::uint64_t seed = 0;
  std::string method;
};

// Pairwise summation in index order; result independent of thread count.
double pairwise_sum(std::span<const double> v);
double mean_of(std::span<const double> v);
// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> v);
double stderr_of(std::span<const double> v);

double log_sum_exp(std::span<const double> v);

// Plug-in log of the mean of exp(v) with its jackknife companion.
struct LogMeanExp {
  double raw = 0.0;          // log((1/M) sum exp(v_i))
  double jackknife = 0.0;    // bias-corrected value
  double jk_stderr = 0.0;    // jackknife standard error of the log
  double mean_exp = 0.0;     // (1/M) sum exp(v_i), may overflow to inf
  double mean_exp_stderr = 0.0;
  double log_shift = 0.0;    // max(v): mean_exp_scaled = mean_exp * exp(-log_shift)
  double mean_exp_scaled = 0.0;
  double stderr_scaled = 0.0;
};
LogMeanExp log_mean_exp(std::span<const double> v);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.96);

// Batch-means standard error for a correlated time series.
double batch_means_stderr(std::span<const double> series, int n_batches = 20);

}  // namespace gffpin

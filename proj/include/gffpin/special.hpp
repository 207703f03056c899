#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gffpin {

// Standard normal helpers that stay accurate deep in the tails.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_sf(double x);        // P(Z > x)
double log_norm_sf(double x);    // log P(Z > x), finite for all finite x
double norm_quantile(double p);  // inverse of norm_cdf

// P(a <= Z <= b) for a <= b (infinite endpoints allowed).
double norm_interval(double a, double b);
double log_norm_interval(double a, double b);
// P(lo <= mean + sd Z <= hi).
double gauss_interval(double mean, double sd, double lo, double hi);

// y in [a, b] with P(a <= Z <= y) = w P(a <= Z <= b), w in (0, 1).
double truncated_norm_quantile(double a, double b, double w);

// exp(-z) I_n(z) for integer n >= 0, z >= 0.
double bessel_i_scaled(int n, double z);
// out[k] = exp(-z) I_k(z), k = 0..nmax.
void bessel_i_scaled_all(int nmax, double z, std::span<double> out);

// Gauss-Legendre rule with n nodes on [a, b].
struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};
QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0);
// Probabilists' Gauss-Hermite rule: sum w f(x) ~ E f(Z).
QuadRule gauss_hermite_prob(int n);

}  // namespace gffpin

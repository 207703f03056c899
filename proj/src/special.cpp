#include "gffpin/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>

#include "gffpin/errors.hpp"

namespace gffpin {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_norm_sf(double x) {
  if (x < 30.0) return std::log(norm_sf(x));
  // Asymptotic expansion of the Mills ratio.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) + 105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - std::log(x * std::sqrt(2.0 * std::numbers::pi)) + std::log(series);
}

double norm_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  if (p < 0.5) return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
}

double norm_interval(double a, double b) {
  if (!(a <= b)) return 0.0;
  if (a >= 0.0) return std::max(0.0, norm_sf(a) - norm_sf(b));
  if (b <= 0.0) return std::max(0.0, norm_sf(-b) - norm_sf(-a));
  return std::max(0.0, 1.0 - norm_sf(-a) - norm_sf(b));
}

double log_norm_interval(double a, double b) {
  if (!(a < b)) return -kInf;
  if (a < 0.0 && b > 0.0) return std::log(norm_interval(a, b));
  if (b <= 0.0) {
    std::swap(a, b);
    a = -a;
    b = -b;
  }
  // 0 <= a < b
  const double la = log_norm_sf(a);
  if (b == kInf) return la;
  const double lb = log_norm_sf(b);
  return la + std::log1p(-std::exp(lb - la));
}

double gauss_interval(double mean, double sd, double lo, double hi) {
  return norm_interval((lo - mean) / sd, (hi - mean) / sd);
}

double truncated_norm_quantile(double a, double b, double w) {
  if (!(a < b)) return a;
  w = std::clamp(w, 0.0, 1.0);
  double y;
  if (a >= 0.0) {
    // Work with upper tails: sf(y) = sf(a) - w (sf(a) - sf(b)).
    const double la = log_norm_sf(a);
    if (la < -700.0) {
      // Exponential approximation of a far tail beyond double range.
      const double lb = (b == kInf) ? -kInf : log_norm_sf(b);
      const double frac = (b == kInf) ? 0.0 : std::exp(lb - la);
      const double t = -std::log1p(-w * (1.0 - frac)) / a;
      y = a + t;
    } else {
      const double sa = std::exp(la);
      const double sb = (b == kInf) ? 0.0 : norm_sf(b);
      const double s = sa - w * (sa - sb);
      y = std::numbers::sqrt2 * boost::math::erfc_inv(std::max(2.0 * s, std::numeric_limits<double>::min()));
    }
  } else if (b <= 0.0) {
    return -truncated_norm_quantile(-b, -a, 1.0 - w);
  } else {
    const double ca = norm_cdf(a);
    const double cb = norm_cdf(b);
    y = norm_quantile(ca + w * (cb - ca));
  }
  return std::clamp(y, a, b);
}

// Hankel asymptotic series of exp(-z) I_n(z) for large z.
static double bessel_i_scaled_asym(int n, double z) {
  const double mu = 4.0 * double(n) * double(n);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double f = (mu - double((2 * k - 1) * (2 * k - 1))) / (double(k) * 8.0 * z);
    const double next = -term * f;
    if (std::abs(next) > std::abs(term) && k > 2) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

double bessel_i_scaled(int n, double z) {
  if (n < 0) n = -n;
  if (z < 0.0) throw DomainError("bessel_i_scaled: z < 0");
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  if (z <= 700.0) return std::cyl_bessel_i(double(n), z) * std::exp(-z);
  if (z > 50.0 * double(n) * double(n) + 700.0) return bessel_i_scaled_asym(n, z);
  std::vector<double> out(std::size_t(n) + 1);
  bessel_i_scaled_all(n, z, out);
  return out[std::size_t(n)];
}

void bessel_i_scaled_all(int nmax, double z, std::span<double> out) {
  if (out.size() < std::size_t(nmax) + 1) throw DomainError("bessel_i_scaled_all: short output");
  if (z == 0.0) {
    std::fill(out.begin(), out.begin() + nmax + 1, 0.0);
    out[0] = 1.0;
    return;
  }
  if (z > 50.0 * double(nmax) * double(nmax) + 700.0) {
    for (int k = 0; k <= nmax; ++k) out[std::size_t(k)] = bessel_i_scaled_asym(k, z);
    return;
  }
  const double i0 = (z <= 700.0) ? std::cyl_bessel_i(0.0, z) * std::exp(-z) : bessel_i_scaled_asym(0, z);
  // Miller backward recurrence I_{k-1} = (2k/z) I_k + I_{k+1}, normalised by I_0.
  const int start = nmax + 20 + int(10.0 * std::sqrt(z + 1.0));
  double ip1 = 0.0, ik = 1e-300;
  std::vector<double> tmp(std::size_t(nmax) + 1, 0.0);
  for (int k = start; k >= 1; --k) {
    const double im1 = (2.0 * k / z) * ik + ip1;
    ip1 = ik;
    ik = im1;
    if (k - 1 <= nmax) tmp[std::size_t(k - 1)] = ik;
    if (std::abs(ik) > 1e250) {
      ik *= 1e-250;
      ip1 *= 1e-250;
      for (double& t : tmp) t *= 1e-250;
    }
  }
  const double scale = i0 / tmp[0];
  for (int k = 0; k <= nmax; ++k) out[std::size_t(k)] = tmp[std::size_t(k)] * scale;
}

QuadRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: n < 1");
  QuadRule r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  // Newton iteration on P_n from Chebyshev initial guesses.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) { p1 = x; p0 = 1.0; }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) { p1 = x; p0 = 1.0; }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[std::size_t(i)] = -x;
    r.x[std::size_t(n - 1 - i)] = x;
    r.w[std::size_t(i)] = w;
    r.w[std::size_t(n - 1 - i)] = w;
  }
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.x[std::size_t(i)] = mid + half * r.x[std::size_t(i)];
    r.w[std::size_t(i)] *= half;
  }
  return r;
}

QuadRule gauss_hermite_prob(int n) {
  // Golub-Welsch: Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(double(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadRule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.w.push_back(v * v);
  }
  return r;
}

}  // namespace gffpin

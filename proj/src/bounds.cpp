#include "gffpin/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "gffpin/errors.hpp"
#include "gffpin/green.hpp"
#include "gffpin/special.hpp"

namespace gffpin {

namespace {

constexpr double kPi = std::numbers::pi;

double sigma2_massless(int d) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  const double v = green_infinite(d, Site(static_cast<std::size_t>(d), 0), 0.0);
  cache.emplace(d, v);
  return v;
}

const QuadRule& hermite_rule(int n) {
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_hermite_prob(n)).first;
  return it->second;
}

// E f(omega) under the law, Gauss-Hermite for Gaussian disorder with a
// convergence check, exact sum otherwise.
template <class F>
double disorder_expectation(const DisorderLaw& law, F f) {
  if (law.kind() != DisorderKind::gaussian) {
    double s = 0.0;
    for (std::size_t i = 0; i < law.values().size(); ++i) s += law.probs()[i] * f(law.values()[i]);
    return s;
  }
  auto rule = [&](int n) {
    const QuadRule& q = hermite_rule(n);
    double s = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * f(q.x[i]);
    return s;
  };
  const double a = rule(64), b = rule(128);
  if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(b)))
    throw ConfigError("Gauss-Hermite quadrature did not converge");
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------

double alpha_root(const DisorderLaw& law, double beta, double h) {
  if (!(beta > 0.0)) throw DomainError("alpha_root: beta must be > 0");
  const double top = law.lambda(beta) + law.lambda(-beta);
  if (!(h > 0.0 && h < top)) throw DomainError("alpha_root: h outside (0, lambda(beta) + lambda(-beta))");
  if (law.kind() == DisorderKind::gaussian) return h / beta;
  const double lb = law.lambda(beta);
  auto g = [&](double a) { return law.lambda(beta - a) - law.lambda(-a) - lb + h; };
  double lo = 0.0, hi = beta;
  if (!(g(lo) > 0.0 && g(hi) < 0.0)) throw DomainError("alpha_root: bracket does not change sign");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
}

double fractional_upper_bound(const DisorderLaw& law, double beta, double h) {
  if (law.kind() == DisorderKind::gaussian) {
    alpha_root(law, beta, h);
    return (h * h) / (beta * beta);
  }
  const double a = alpha_root(law, beta, h);
  return law.lambda(a) + law.lambda(-a);
}

// ---------------------------------------------------------------------------

double u_of_ah(double a, double h, double sigma) {
  if (!(a > 0.0 && h > 0.0 && a * h < 0.5)) throw DomainError("u_of_ah: need 0 < a h < 1/2");
  const double L = std::log(1.0 / h);
  if (!(L > 1.0)) throw DomainError("u_of_ah: need h < 1/e");
  const double s = std::sqrt(2.0 * L);
  return sigma * s + 1.0 - 0.5 * sigma * std::log(L) / s - sigma * std::log(2.0 * a * std::sqrt(kPi)) / s;
}

double tail_check(double a, double h, double sigma, double v, double lo, double hi) {
  const double u = u_of_ah(a, h, sigma);
  return gauss_interval(u + v, sigma, lo, hi) / (a * h);
}

double rough_height(int d, int N) {
  if (d < 3) throw DomainError("rough_height: d must be >= 3");
  if (N < 2) throw DomainError("rough_height: N must be >= 2");
  return 8.0 * std::sqrt(sigma2_massless(d)) * std::sqrt(d * std::log(double(N)));
}

int rough_scale(double h) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("rough_scale: need 0 < h < 1");
  return int(std::lround(1.0 / (h * h)));
}

RoughContact rough_contact(int d, int N) {
  RoughContact r;
  r.u = rough_height(d, N);
  const double s = std::sqrt(sigma2_massless(d));
  r.log_prob = log_norm_interval((-1.0 - r.u) / s, (1.0 - r.u) / s);
  r.log_floor = -32.0 * d * std::log(double(N));
  return r;
}

// ---------------------------------------------------------------------------

double c_beta(const DisorderLaw& law, double beta) { return std::expm1(law.lambda(2.0 * beta) - 2.0 * law.lambda(beta)); }

double indep_free_energy(const DisorderLaw& law, double beta, double h, double a) {
  if (!(a * h < 1.0 && a >= 0.0)) throw DomainError("indep_free_energy: need 0 <= a h < 1");
  const double shift = h - law.lambda(beta);
  return disorder_expectation(law, [&](double w) { return std::log1p(a * h * std::expm1(beta * w + shift)); });
}

double indep_optimal_a(const DisorderLaw& law, double beta) {
  const double c = c_beta(law, beta);
  if (!(c > 0.0)) throw DomainError("indep_optimal_a: c_beta vanishes");
  return 1.0 / c;
}

double indep_optimal_contact(const DisorderLaw& law, double beta, double h) {
  if (!(h > 0.0)) return 0.0;
  const double shift = h - law.lambda(beta);
  auto slope = [&](double p) {
    return disorder_expectation(law, [&](double w) {
      const double xi = std::expm1(beta * w + shift);
      return xi / (1.0 + p * xi);
    });
  };
  if (slope(1.0) >= 0.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double height_for_contact(double p, double sigma) {
  if (!(p > 0.0)) throw DomainError("height_for_contact: p must be > 0");
  if (!(sigma > 0.0)) throw DomainError("height_for_contact: sigma must be > 0");
  auto lp = [&](double u) { return log_norm_interval((-1.0 - u) / sigma, (1.0 - u) / sigma); };
  const double target = std::log(p);
  if (target >= lp(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0 + sigma;
  while (lp(hi) > target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (lp(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

double f_mass_d(int d, double m) {
  if (!(m > 0.0)) throw DomainError("f_mass: m must be > 0");
  if (d < 1) throw DomainError("f_mass: d must be >= 1");
  const double m2 = m * m;
  auto f = [&](double t) {
    if (t == 0.0) return 0.5 * m2;
    return 0.5 * (-std::expm1(-m2 * t)) * std::pow(bessel_i_scaled(0, 2.0 * t), d) / t;
  };
  const QuadRule q = gauss_legendre(32);
  auto panel = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * f(0.5 * (a + b) + 0.5 * (b - a) * q.x[i]);
    return 0.5 * (b - a) * s;
  };
  // Panels [0, 1/8], then dyadic panels split in two, up to where e^{-m^2 t} is negligible.
  double sum = panel(0.0, 0.125);
  double a = 0.125;
  const double T = std::max(64.0, 60.0 / m2);
  while (a < T) {
    sum += panel(a, 1.5 * a) + panel(1.5 * a, 2.0 * a);
    a *= 2.0;
  }
  // Tail with e^{-z} I_0(z) ~ (2 pi z)^{-1/2} (1 + 1/(8z)) and 1 - e^{-m^2 t} ~ 1.
  const double hd = 0.5 * d;
  const double c = std::pow(4.0 * kPi, -hd);
  sum += 0.5 * c * (std::pow(a, -hd) / hd + (d / 16.0) * std::pow(a, -hd - 1.0) / (hd + 1.0));
  return sum;
}

double f_mass(double m) { return f_mass_d(2, m); }

double f_mass_direct(double m) {
  if (!(m > 0.0)) throw DomainError("f_mass: m must be > 0");
  const double m2 = m * m;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto outer = [&](double x) {
    const double sx = std::sin(0.5 * kPi * x);
    auto inner = [&](double y) {
      const double sy = std::sin(0.5 * kPi * y);
      const double r = std::hypot(sx, sy);
      if (r == 0.0) return 0.0;
      const double lam = 4.0 * r * r;
      // Near the corner lam can underflow while log(m^2 / lam) stays finite.
      return lam > 1e-280 ? std::log1p(m2 / lam) : std::log(m2) - std::log(4.0) - 2.0 * std::log(r);
    };
    return ts.integrate(inner, 0.0, 1.0, 1e-12);
  };
  return 0.5 * ts.integrate(outer, 0.0, 1.0, 1e-11);
}

double log_W_finite(int N, double m) {
  if (!(m > 0.0)) throw DomainError("log_W_finite: m must be > 0");
  if (N < 2) throw DomainError("log_W_finite: N must be >= 2");
  std::vector<double> lam(static_cast<std::size_t>(N - 1));
  for (int i = 1; i < N; ++i) {
    const double s = std::sin(i * kPi / (2.0 * N));
    lam[std::size_t(i - 1)] = 4.0 * s * s;
  }
  std::vector<double> row(lam.size());
  std::vector<double> rows(lam.size());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    for (std::size_t j = 0; j < lam.size(); ++j) row[j] = std::log1p(m * m / (lam[i] + lam[j]));
    rows[i] = pairwise_sum(row);
  }
  return -0.5 * pairwise_sum(rows) / (double(N) * N);
}

// ---------------------------------------------------------------------------

MassiveHeight u_mass(double m) {
  if (!(m > 0.0 && m < 1.0)) throw DomainError("u_mass: need 0 < m < 1");
  MassiveHeight r;
  r.m = m;
  r.C = std::sqrt(8.0 * kPi);
  r.C_prime = r.C / (2.0 * std::sinh(r.C));
  const double L = -std::log(m);
  const double need = 2.5 * std::log(L) + std::abs(std::log(r.C_prime));
  if (!(L > need)) {
    std::ostringstream os;
    os << "u_mass: m too large, |log m| = " << L << " must exceed 5/2 log|log m| + |log C'| = " << need;
    throw DomainError(os.str());
  }
  r.sigma2 = green_infinite(2, Site{0, 0}, m);
  const double q = 2.0 * L - 2.5 * std::log(L) - std::log(r.C_prime);
  r.u = std::sqrt(2.0 * r.sigma2 * q);
  const double log_lhs = -0.5 * std::log(L) - r.u * r.u / (2.0 * r.sigma2);
  const double log_rhs = std::log(r.C_prime) - 2.0 * L + 2.0 * std::log(L);
  r.residual = std::abs(std::expm1(log_lhs - log_rhs));
  return r;
}

double massive_contact_ratio(const MassiveHeight& mh) {
  const double s = std::sqrt(mh.sigma2);
  const double lp = log_norm_interval((-1.0 - mh.u) / s, (1.0 - mh.u) / s);
  const double lt = -mh.u * mh.u / (2.0 * mh.sigma2) + std::log(std::sinh(mh.C) / (std::sqrt(0.5 * kPi) * mh.C)) - std::log(s);
  return std::exp(lp - lt);
}

double gs1gs2_lhs(double sigma, double eta, double u) {
  if (!(eta > 0.0 && sigma > eta)) throw DomainError("gs1gs2_lhs: need sigma > eta > 0");
  const double tau = std::sqrt(sigma * sigma - eta * eta);
  // Integrand in z = s / tau is log-concave, so integrate outward from its mode.
  auto logf = [&](double z) {
    const double s = tau * z;
    return -0.5 * z * z - 0.5 * std::log(2.0 * kPi) +
           2.0 * log_norm_interval((u - 1.0 - s) / eta, (u + 1.0 - s) / eta);
  };
  double lo = std::min(0.0, u / tau) - 10.0, hi = std::max(0.0, u / tau) + 10.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    if (logf(a) < logf(b))
      lo = a;
    else
      hi = b;
  }
  const double z0 = 0.5 * (lo + hi);
  const double l0 = logf(z0);
  auto g = [&](double z) { return std::exp(logf(z) - l0); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double w = std::min(1.0, 4.0 * eta / tau + 0.05);
  double sum = 0.0;
  for (int dir = -1; dir <= 1; dir += 2) {
    for (int k = 0; k < 100000; ++k) {
      const double a = z0 + dir * k * w, b = z0 + dir * (k + 1) * w;
      const double piece = GK::integrate(g, std::min(a, b), std::max(a, b), 12, 1e-14);
      sum += piece;
      if (logf(b) - l0 < -60.0) break;
    }
  }
  return std::exp(l0) * sum;
}

Gs1Gs2 gs1gs2_check(double m, double eta, double eps) {
  const MassiveHeight mh = u_mass(m);
  const double sigma = std::sqrt(mh.sigma2);
  if (!(sigma > eta)) throw DomainError("gs1gs2_check: sigma_m must exceed eta");
  const double L = -std::log(m);
  Gs1Gs2 r;
  r.lhs = gs1gs2_lhs(sigma, eta, mh.u);
  r.rhs = 2.0 * mh.C_prime * m * m * L * L * std::exp(-2.0 * kPi * (1.0 - eps) * eta * eta);
  r.holds = r.lhs <= r.rhs;
  return r;
}

// ---------------------------------------------------------------------------

CoarseScales coarse_scales(double h, int kappa) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("coarse_scales: need 0 < h < 1");
  if (kappa < 1) throw ConfigError("coarse_scales: kappa must be >= 1");
  CoarseScales c;
  c.h = h;
  c.kappa = kappa;
  c.rho = std::exp(-std::sqrt(std::log(1.0 / h)));
  c.N0_exact = 1.0 / c.rho;
  c.N0 = std::max(2, 2 * int(std::lround(0.5 * c.N0_exact)));
  c.N1_target = std::pow(h, -3.0);
  const long long ratio = 2 * static_cast<long long>(std::floor(c.N1_target / (2.0 * c.N0)));
  if (ratio < 4) throw ConfigError("coarse_scales: h too large, N1 / N0 would be below 4");
  c.N1 = ratio * c.N0;
  if (double(c.N1) < 0.5 * c.N1_target) throw ConfigError("coarse_scales: N1 falls below h^-3 / 2 after rounding");
  std::ostringstream os;
  os << "N0 " << c.N0_exact << " -> " << c.N0 << " (even); N1 " << c.N1_target << " -> " << c.N1 << " = " << ratio
     << " N0";
  c.rounding = os.str();
  return c;
}

// ---------------------------------------------------------------------------

HcScanResult hc2_scan(double beta, const HcScanSpec& spec, const StreamKey& key, const Deadline& deadline) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("hc2_scan: beta must lie in (0, 1)");
  if (spec.h_grid.empty() || spec.m_grid.empty()) throw ConfigError("hc2_scan: empty h or m grid");
  HcScanResult out;
  out.beta = beta;
  out.lambda_beta = spec.law.lambda(beta);
  out.comparison = std::pow(beta, 3.0 - spec.eps);
  const int N = spec.N > 0 ? spec.N : std::max(2, int(std::lround(1.0 / beta)));
  std::vector<double> hs(spec.h_grid);
  std::sort(hs.begin(), hs.end(), std::greater<>());
  std::uint64_t idx = 0;
  for (double h : hs) {
    for (double m : spec.m_grid) {
      deadline.check("hc2_scan");
      HcScanEntry e;
      e.h = h;
      e.m = m;
      e.N = N;
      ++idx;
      try {
        if (spec.height == HeightRule::u_mass) {
          e.u = u_mass(m).u;
        } else {
          const double sigma = std::sqrt(green_infinite(2, Site{0, 0}, m));
          const double p = indep_optimal_contact(spec.law, beta, h);
          e.u = p > 0.0 ? height_for_contact(p, sigma) : 0.0;
        }
      } catch (const DomainError& err) {
        e.skipped = err.what();
        out.entries.push_back(std::move(e));
        continue;
      }
      PinningParams p;
      p.d = 2;
      p.N = N;
      p.beta = beta;
      p.h = h;
      p.m = m;
      p.u = e.u;
      p.law = spec.law;
      p.bc = BoundaryCondition::stationary_massive(e.u, m);
      const StreamKey sub = key.with_experiment(key.experiment ^ (0x9e3779b97f4a7c15ULL * idx));
      e.result = finite_volume_lower_bound(p, spec.R, spec.M, sub, spec.k, spec.threads);
      if (e.result.certified && (!out.certified_h || h < *out.certified_h)) out.certified_h = h;
      out.entries.push_back(std::move(e));
    }
  }
  out.bound = out.certified_h ? std::min(*out.certified_h, out.lambda_beta) : out.lambda_beta;
  out.note = out.certified_h ? "certified" : "no bound at this budget; annealed bound lambda(beta) reported";
  return out;
}

}  // namespace gffpin

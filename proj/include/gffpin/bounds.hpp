#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gffpin/budget.hpp"
#include "gffpin/disorder.hpp"
#include "gffpin/pinning.hpp"
#include "gffpin/rng.hpp"

namespace gffpin {

// Root in (0, beta) of lambda(beta - a) - lambda(-a) - lambda(beta) + h = 0.
double alpha_root(const DisorderLaw& law, double beta, double h);
// lambda(alpha) + lambda(-alpha); exactly h^2 / beta^2 for Gaussian disorder.
double fractional_upper_bound(const DisorderLaw& law, double beta, double h);

// Height giving contact probability close to a h for a field of variance sigma^2.
double u_of_ah(double a, double h, double sigma);
// P(u + v + sigma Z in [lo, hi]) / (a h) with u = u_of_ah(a, h, sigma).
double tail_check(double a, double h, double sigma, double v, double lo = -1.0, double hi = 1.0);

// 8 sigma_d sqrt(d log N).
double rough_height(int d, int N);
// N = h^-2 rounded to the nearest integer.
int rough_scale(double h);
// log P(u + sigma_d Z in [-1, 1]) and the floor -32 d log N it must exceed.
struct RoughContact {
  double u = 0.0;
  double log_prob = 0.0;
  double log_floor = 0.0;
};
RoughContact rough_contact(int d, int N);

// e^{lambda(2 beta) - 2 lambda(beta)} - 1.
double c_beta(const DisorderLaw& law, double beta);
// E log(1 + a h xi), xi = exp(beta omega - lambda(beta) + h) - 1.
double indep_free_energy(const DisorderLaw& law, double beta, double h, double a);
double indep_optimal_a(const DisorderLaw& law, double beta);
// Contact probability p in [0, 1] maximizing E log(1 + p xi).
double indep_optimal_contact(const DisorderLaw& law, double beta, double h);
// Smallest u >= 0 with P(u + sigma Z in [-1, 1]) = p, or 0 if p is above the u = 0 value.
double height_for_contact(double p, double sigma);

// f(m) = (1/2) int_0^inf (1 - e^{-m^2 t}) (e^{-2t} I_0(2t))^d dt / t; d = 2 is the planar mass cost.
double f_mass_d(int d, double m);
double f_mass(double m);
// Same planar integral evaluated directly on [0,1]^2.
double f_mass_direct(double m);
// (1/N^2) log W^m_N from the Dirichlet spectrum.
double log_W_finite(int N, double m);

struct MassiveHeight {
  double m = 0.0;
  double sigma2 = 0.0;
  double u = 0.0;
  double C = 0.0;
  double C_prime = 0.0;
  double residual = 0.0;  // relative defect of the defining relation
};
MassiveHeight u_mass(double m);
// P(u + sigma Z in [-1, 1]) over its small-mass equivalent.
double massive_contact_ratio(const MassiveHeight& mh);

struct Gs1Gs2 {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
// int g_{sigma^2 - eta^2}(s) (int_{u-1-s}^{u+1-s} g_{eta^2}(t) dt)^2 ds.
double gs1gs2_lhs(double sigma, double eta, double u);
// 2 C' m^2 |log m|^2 exp(-2 pi (1 - eps) eta^2) against the integral at (sigma_m, u_m).
Gs1Gs2 gs1gs2_check(double m, double eta, double eps);

struct CoarseScales {
  double h = 0.0;
  double rho = 0.0;
  int N0 = 0;
  long long N1 = 0;
  int kappa = 5;
  double N0_exact = 0.0;
  double N1_target = 0.0;
  std::string rounding;
};
CoarseScales coarse_scales(double h, int kappa = 5);

enum class HeightRule { u_mass, independent };

struct HcScanSpec {
  std::vector<double> h_grid;
  std::vector<double> m_grid;
  HeightRule height = HeightRule::u_mass;
  DisorderLaw law = DisorderLaw::gaussian();
  int N = 0;  // 0 uses N = 1/beta
  int R = 16;
  int M = 256;
  double k = 3.0;
  double eps = 0.1;
  int threads = 1;
};

struct HcScanEntry {
  double h = 0.0, m = 0.0, u = 0.0;
  int N = 0;
  LowerBoundResult result;
  std::string skipped;  // reason when no certificate was attempted
};

struct HcScanResult {
  double beta = 0.0;
  double lambda_beta = 0.0;
  std::optional<double> certified_h;  // smallest h with a positive certificate
  double bound = 0.0;                 // min(certified_h, lambda(beta))
  double comparison = 0.0;            // beta^{3 - eps}
  std::vector<HcScanEntry> entries;
  std::string note;
};
HcScanResult hc2_scan(double beta, const HcScanSpec& spec, const StreamKey& key, const Deadline& deadline = {});

}  // namespace gffpin

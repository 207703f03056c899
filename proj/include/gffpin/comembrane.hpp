#pragma once

#include <span>
#include <vector>

#include "gffpin/disorder.hpp"
#include "gffpin/interaction.hpp"
#include "gffpin/lattice.hpp"
#include "gffpin/pinning.hpp"
#include "gffpin/sampler.hpp"

namespace gffpin {

// Delta: -2 rho sum (omega + h) 1[phi < 0].  Sign: rho sum (omega + h) sign(phi).
enum class CoMembraneForm { delta, sign };

struct CoMembraneParams {
  int d = 3;
  int N = 8;
  double rho = 0.0;
  double h = 0.0;
  double m = 0.0;
  double u = 0.0;
  BoundaryCondition bc = BoundaryCondition::constant(0.0);
  DisorderLaw law = DisorderLaw::gaussian();
  SumRegion region = SumRegion::tilde;

  Box box() const { return Box(d, N); }
  void validate() const;
  Interaction interaction(std::span<const double> omega, CoMembraneForm form = CoMembraneForm::delta) const;
};

double comembrane_energy(std::span<const double> field, std::span<const double> omega, const CoMembraneParams& p);
double comembrane_sign_energy(std::span<const double> field, std::span<const double> omega, const CoMembraneParams& p);

// lambda(-2 rho) / (2 rho).
double critical_curve(const DisorderLaw& law, double rho);

// P(u - 1 + v + sigma Z <= 0) / (a h) with u = u_of_ah(a, h, sigma).
double below_tail_check(double a, double h, double sigma, double v);

PartitionEstimate comembrane_partition_mc(const CoMembraneParams& p, std::span<const double> omega, int M,
                                          Philox& rng, CoMembraneForm form = CoMembraneForm::delta);
QuenchedResult comembrane_free_energy(const CoMembraneParams& p, int R, int M, const StreamKey& key, int threads = 1);
LowerBoundResult comembrane_lower_bound(const CoMembraneParams& p, int R, int M, const StreamKey& key, double k = 3.0,
                                        int threads = 1);

struct MeasureEquivalence {
  Estimate below_delta, below_sign;  // fraction of region sites with phi < 0
  Estimate mean_delta, mean_sign;    // mean field over the region
  double z_below = 0.0, z_mean = 0.0;
  double log_ratio = 0.0;              // rho sum (omega + h)
  double max_energy_defect = 0.0;      // max |E_sign - E_delta - log_ratio| over sampled fields
  bool agree = false;                  // both |z| <= 3
};
// Gibbs chains under both energy forms from independent streams.
MeasureEquivalence measure_equivalence(const CoMembraneParams& p, std::span<const double> omega,
                                       const ChainSpec& chain, const StreamKey& key);

}  // namespace gffpin

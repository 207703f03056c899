#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gffpin/disorder.hpp"
#include "gffpin/interaction.hpp"
#include "gffpin/lattice.hpp"
#include "gffpin/rectangle.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/sampler.hpp"
#include "gffpin/stats.hpp"

namespace gffpin {

struct PinningParams {
  int d = 3;
  int N = 8;
  double beta = 0.0;
  double h = 0.0;
  double m = 0.0;  // mass; the field is recentred at u when m > 0
  double u = 0.0;
  BoundaryCondition bc = BoundaryCondition::constant(0.0);
  DisorderLaw law = DisorderLaw::gaussian();
  SumRegion region = SumRegion::tilde;

  Box box() const { return Box(d, N); }
  void validate() const;
  // beta omega_x - lambda(beta) + h on region sites, full-box length.
  std::vector<double> couplings(std::span<const double> omega) const;
  Interaction interaction(std::span<const double> omega) const;
};

double pinning_energy(std::span<const double> field, std::span<const double> omega, const PinningParams& p);

struct PartitionEstimate {
  Estimate z;          // unbiased estimate of Z (may overflow; see log fields)
  Estimate log_z;      // jackknife-corrected log Z with jackknife stderr
  double log_z_raw = 0.0;
  double log_z_jk = 0.0;
  double jk_bias = 0.0;  // raw - corrected
};

// Plain MC over M reference-field draws for a fixed boundary vector.
PartitionEstimate partition_mc_fixed(const FieldSampler& fs, const Interaction& inter, int M, Philox& rng);
// Resolves the boundary condition (drawing it if random) then runs partition_mc_fixed.
PartitionEstimate partition_mc(const PinningParams& p, std::span<const double> omega, int M, Philox& rng);

// Subset-expansion oracle over the fluctuating region sites.
class ExactPinningOracle {
 public:
  explicit ExactPinningOracle(const PinningParams& p, int extra_nodes = 0);
  double partition(std::span<const double> omega) const;
  const ContactPatternTable& table() const;
  const std::vector<std::size_t>& fluctuating() const { return fluct_; }
  const std::vector<std::size_t>& fixed() const { return fixed_; }
  const std::vector<double>& fixed_delta() const { return fixed_delta_; }
  // Positions of fluctuating() and fixed() sites in the omega vector.
  const std::vector<std::size_t>& fluctuating_pos() const { return region_pos_; }
  const std::vector<std::size_t>& fixed_pos() const { return fixed_pos_; }

 private:
  PinningParams p_;
  std::vector<std::size_t> fluct_;    // interior region sites
  std::vector<std::size_t> fixed_;    // boundary region sites
  std::vector<double> fixed_delta_;   // their contact indicator
  std::vector<std::size_t> region_pos_;  // position of fluct_ in the omega vector
  std::vector<std::size_t> fixed_pos_;
  std::shared_ptr<const ContactPatternTable> table_;
};

struct ExactResult {
  double z = 0.0;
  double error_estimate = 0.0;
};
ExactResult partition_exact_small(const PinningParams& p, std::span<const double> omega);

struct TransferGrid {
  double L = 0.0;      // 0 picks a width from the field variance
  double step = 0.25;  // panel width; panels carry Gauss-Legendre nodes
  int nodes = 8;
  double tol = 1e-6;
};
struct TransferResult {
  double z = 0.0;
  double error_bound = 0.0;
  double z_coarse = 0.0;
  double z_fine = 0.0;
};
TransferResult partition_transfer_1d(const PinningParams& p, std::span<const double> omega, TransferGrid grid = {});

struct QuenchedResult {
  Estimate free_energy;      // jackknife-corrected per-replica log Z / N^d
  Estimate free_energy_raw;  // plug-in per-replica log Z / N^d
  std::vector<double> log_z_raw;
  std::vector<double> log_z_jk;
  std::vector<std::uint64_t> seeds;
};
using InteractionBuilder = std::function<Interaction(std::span<const double> omega)>;
// Replica loop shared by the pinning and co-membrane estimators. Replica r
// draws omega, the boundary and the field from streams keyed by r.
QuenchedResult quenched_core(const Box& box, double m, double u, const BoundaryCondition& bc, const DisorderLaw& law,
                             std::size_t n_omega, const InteractionBuilder& build, int R, int M, const StreamKey& key,
                             int threads);

QuenchedResult quenched_free_energy(const PinningParams& p, int R, int M, const StreamKey& key, int threads = 1);

// (2/N^d) log of the replica mean of sqrt(Z), delta-method stderr.
Estimate fractional_moment(const QuenchedResult& q, int volume);

Estimate contact_fraction(const PinningParams& p, std::span<const double> omega, const ChainSpec& chain, Philox& rng);

struct Certificate {
  double beta = 0.0, h = 0.0, m = 0.0, u = 0.0;
  int d = 0, N = 0;
  double k = 3.0;
  double estimate = 0.0, std_error = 0.0, f_mass = 0.0, value = 0.0;
  std::uint64_t seed = 0;
  std::string model = "pinning";
};

struct LowerBoundResult {
  Estimate estimate;   // (1/N^d) E log Z over stationary boundaries, before f(m)
  double f_mass = 0.0; // subtracted when m > 0
  double k = 3.0;
  double value = 0.0;  // estimate - f_mass - k stderr
  bool certified = false;
  Certificate certificate;
  QuenchedResult replicas;
};
LowerBoundResult finite_volume_lower_bound(const PinningParams& p, int R, int M, const StreamKey& key, double k = 3.0,
                                           int threads = 1);

// Picks the stationary boundary height maximizing estimate - k stderr on a
// pilot run; the key should differ from the one used for the certificate.
double pilot_height(const PinningParams& p, std::span<const double> heights, int R, int M, const StreamKey& key,
                    double k = 3.0, int threads = 1);

struct PureResult {
  Estimate free_energy;
  double C_d = 0.0;  // NaN for d <= 2
  double sigma2 = 0.0;
};
PureResult pure_free_energy(int d, int N, double h, int M, const StreamKey& key);

// P(sigma_d Z in [-1, 1]) with sigma_d^2 = G(0,0), d >= 3.
double contact_constant(int d);

}  // namespace gffpin

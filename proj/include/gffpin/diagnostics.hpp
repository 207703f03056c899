#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gffpin/lattice.hpp"
#include "gffpin/pinning.hpp"
#include "gffpin/sampler.hpp"
#include "gffpin/stats.hpp"

namespace gffpin {

enum class EventKind { E_u, A0, A1_x, A1, A2, B_u, A1_harmonic, A2_kappa, F_N_eps, H_threshold };
std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

struct EventSpec {
  EventKind kind = EventKind::A0;
  double u = 0.0;        // E_u, B_u, A1_harmonic
  std::size_t site = 0;  // A1_x, box index
  double rho = 0.0;      // B_u, A1_harmonic tolerance rho^{1/8}(/2)
  int N0 = 0;            // coarse block side; N1 is the box side
  int kappa = 5;         // A2_kappa
  double h = 0.0;        // F_N_eps threshold sqrt(log(1/h) / (4d)); bound exponents
  double eps = 0.1;      // F_N_eps
  double C = 6.0;        // H_threshold: H_N > C N^d
};

// Reference field law: box, mass, recentring and boundary condition.
struct FieldLaw {
  int d = 3;
  int N = 6;
  double m = 0.0;
  double u = 0.0;
  BoundaryCondition bc = BoundaryCondition::constant(0.0);
  Box box() const { return Box(d, N); }
};

struct EventReport {
  Estimate estimate;
  double wilson_lo = 0.0, wilson_hi = 1.0;
  std::uint64_t hits = 0;
  // Analytic bound at the configured scale, on the event or on its complement.
  std::optional<double> bound;
  bool bound_on_complement = false;
  bool bound_pass = true;
  std::string bound_formula;
};

// Indicator of an event on one sampled configuration (boundary values included).
class EventEvaluator {
 public:
  EventEvaluator(const EventSpec& spec, const Box& box);
  // mean: harmonic extension of the boundary (needed by B_u only).
  bool operator()(std::span<const double> field, std::span<const double> mean) const;

 private:
  struct HaloSolver;
  EventSpec spec_;
  Box box_;
  std::vector<std::shared_ptr<HaloSolver>> halos_;
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::size_t> deep_;  // sites at distance >= N0/2 from the boundary
  std::vector<std::size_t> even_;
  double threshold_ = 0.0;
};

EventReport event_probability(const EventSpec& spec, const FieldLaw& law, int M, const StreamKey& key);

// E[delta_x] averaged over boundary draws in E_u.
struct GoodBoundaryContact {
  Estimate contact;
  std::uint64_t good_boundaries = 0;
  double bound = 0.0;  // N^{-2d}
};
GoodBoundaryContact contact_given_good_boundary(const FieldLaw& law, double u, std::size_t site, int boundaries,
                                                int M, const StreamKey& key);

struct OneContact {
  double p_A0 = 0.0;
  std::vector<std::size_t> sites;  // fluctuating tilde sites
  std::vector<double> p_A1_x;
  double p_A1 = 0.0;
  double p_A2 = 0.0;
  double z_prime = 0.0;
  double z_interior = 0.0;  // partition function restricted to fluctuating sites
  double z_exact = 0.0;     // full partition function including fixed boundary sites
};
// Exact on the fluctuating tilde sites; the contact events ignore boundary sites.
OneContact one_contact_decomposition(const PinningParams& p, std::span<const double> omega);

struct HeightHistogram {
  double threshold = 0.0;
  std::vector<double> series;  // fraction of region sites with |phi| <= threshold, per recorded sweep
  Estimate fraction;
};
// threshold <= 0 uses sqrt(log(1/h) / (4d)), which needs h in (0, 1).
HeightHistogram contact_height_histogram(const PinningParams& p, std::span<const double> omega,
                                         const ChainSpec& chain, Philox& rng, double threshold = 0.0);
double conjection_threshold(int d, double h);

// phi^T (-Delta) phi over the box: sum over nearest-neighbour edges of (phi_x - phi_y)^2.
double hamiltonian_statistic(const Box& box, std::span<const double> field);

struct HamiltonianProbe {
  Estimate mean_H;      // expected (N-1)^d
  Estimate mgf;         // E exp(lambda H)
  double mgf_closed = 0.0;
  double z_mgf = 0.0;
  Estimate tail;        // P(H > C N^d)
  double tail_bound = 0.0;  // 2^{(N-1)^d} exp(-(3/8) C N^d)
};
// Zero-boundary massless field; lambda < 1/2.
HamiltonianProbe hamiltonian_probe(int d, int N, double lambda, double C, int M, const StreamKey& key);

}  // namespace gffpin

#pragma once

#include <vector>

#include "gffpin/pinning.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/stats.hpp"

namespace gffpin {

// Events measurable with respect to the contact pattern on the sum region.
struct ReplicaEvent {
  enum class Kind { full, max_contacts } kind = Kind::full;
  int kappa = 0;
  static ReplicaEvent full() { return {}; }
  static ReplicaEvent max_contacts(int k) { return {Kind::max_contacts, k}; }
  bool contains(int contacts) const { return kind == Kind::full || contacts <= kappa; }
};

struct ReplicaSpec {
  int R = 200;        // disorder draws, shared by every grid point
  double t = 1.0;     // interpolation time of the monotonicity probe
  double lambda = 0.0;
  int grid = 5;       // s in {0, t/(grid-1), ..., t}
};

struct ReplicaTerms {
  double T1 = 0.0;
  double T2 = 0.0;
  double rhs = 0.0;       // T1 - T2
  double prob_A = 0.0;    // <1_A> under the h-tilted measure
  Estimate quenched;      // (1/N^d) E log E[exp(sum (beta omega - beta^2/2 + h) delta); A]
  bool inequality_holds = false;  // rhs <= quenched + 3 stderr
  std::vector<double> s_grid;
  std::vector<Estimate> psi;        // psi(t - s, lambda + s)
  std::vector<Estimate> psi_steps;  // consecutive differences with common disorder
  bool monotone = false;            // every step >= -2 stderr
};

// Gaussian disorder only; the field side is summed exactly over contact
// patterns, so the fluctuating part of the sum region must have at most 10 sites.
ReplicaTerms replica_terms(const PinningParams& p, const ReplicaEvent& event, const ReplicaSpec& spec,
                           const StreamKey& key);

}  // namespace gffpin

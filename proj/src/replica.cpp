#include "gffpin/replica.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gffpin/errors.hpp"

namespace gffpin {

ReplicaTerms replica_terms(const PinningParams& p, const ReplicaEvent& event, const ReplicaSpec& spec,
                           const StreamKey& key) {
  if (p.law.kind() != DisorderKind::gaussian) throw DomainError("replica_terms: Gaussian disorder only");
  if (spec.R < 2 || spec.grid < 2 || spec.t < 0.0) throw ConfigError("replica_terms: invalid spec");
  const ExactPinningOracle oracle(p);
  const auto& pat = oracle.table().patterns();
  const int n = oracle.table().size();
  const std::size_t np = pat.size();
  const double beta = p.beta, h = p.h;
  double vol = 1.0;
  for (int a = 0; a < p.d; ++a) vol *= p.N;

  const auto& fixed_delta = oracle.fixed_delta();
  const auto& fpos = oracle.fluctuating_pos();
  const auto& xpos = oracle.fixed_pos();
  int fixed_contacts = 0;
  for (double dl : fixed_delta) fixed_contacts += dl > 0.0 ? 1 : 0;

  // Pattern weights under the h-tilted measure, restricted to A.
  std::vector<double> w(np, 0.0);
  std::vector<int> inA(np, 0);
  double zh = 0.0, zA = 0.0;
  for (std::size_t s = 0; s < np; ++s) {
    const int c = std::popcount(std::uint32_t(s)) + fixed_contacts;
    const double ws = std::max(pat[s], 0.0) * std::exp(h * c);
    zh += ws;
    inA[s] = event.contains(c) ? 1 : 0;
    if (inA[s]) {
      w[s] = ws;
      zA += ws;
    }
  }
  ReplicaTerms r;
  r.prob_A = zA / zh;
  if (r.prob_A < 1e-3) throw ConfigError("replica_terms: event probability below 1e-3");
  for (double& x : w) x /= zh;
  r.T1 = std::log(zA) / vol;

  const double fixed_count = double(fixed_contacts);
  std::vector<double> lw(np);
  for (std::size_t s = 0; s < np; ++s) lw[s] = w[s] > 0.0 ? std::log(w[s]) : -INFINITY;
  std::vector<double> pair(np * np);
  auto pair_lse = [&](auto&& logweight) {
    double mx = -INFINITY;
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < np; ++b) {
        const double v = (w[a] > 0.0 && w[b] > 0.0) ? lw[a] + lw[b] + logweight(a, b) : -INFINITY;
        pair[a * np + b] = v;
        mx = std::max(mx, v);
      }
    double s = 0.0;
    for (double v : pair) s += std::exp(v - mx);
    return mx + std::log(s);
  };
  r.T2 = pair_lse([&](std::size_t a, std::size_t b) {
           return 2.0 * beta * beta * (std::popcount(std::uint32_t(a & b)) + fixed_count);
         }) / vol;
  r.rhs = r.T1 - r.T2;

  // Disorder draws shared by the quenched estimate and every psi grid point.
  const auto& reg = p.box().region(p.region);
  std::vector<double> quench(std::size_t(spec.R));
  const int G = spec.grid;
  std::vector<std::vector<double>> psi(std::size_t(G), std::vector<double>(std::size_t(spec.R)));
  std::vector<double> e1(np), omega(reg.size());
  for (int rr = 0; rr < spec.R; ++rr) {
    Philox rng = key.with_replica(std::uint64_t(rr)).with_purpose("omega").engine();
    for (double& x : omega) x = p.law.sample(rng);
    double fixed_omega = 0.0;
    for (std::size_t i = 0; i < xpos.size(); ++i) fixed_omega += fixed_delta[i] * omega[xpos[i]];
    auto pattern_omega = [&](std::size_t s) {
      double v = fixed_omega;
      for (int i = 0; i < n; ++i)
        if (s >> i & 1u) v += omega[fpos[std::size_t(i)]];
      return v;
    };
    // Quenched term with the full coupling.
    {
      double mx = -INFINITY;
      for (std::size_t s = 0; s < np; ++s) {
        const int c = std::popcount(std::uint32_t(s)) + fixed_contacts;
        e1[s] = inA[s] && pat[s] > 0.0 ? std::log(pat[s]) + beta * pattern_omega(s) + (h - 0.5 * beta * beta) * c
                                       : -INFINITY;
        mx = std::max(mx, e1[s]);
      }
      double acc = 0.0;
      for (double v : e1) acc += std::exp(v - mx);
      quench[std::size_t(rr)] = (mx + std::log(acc)) / vol;
    }
    std::vector<double> om(np);
    for (std::size_t s = 0; s < np; ++s) om[s] = pattern_omega(s);
    for (int g = 0; g < G; ++g) {
      const double s_ = spec.t * g / (G - 1);
      const double tt = spec.t - s_, lam = spec.lambda + s_;
      const double st = std::sqrt(tt) * beta;
      psi[std::size_t(g)][std::size_t(rr)] =
          pair_lse([&](std::size_t a, std::size_t b) {
            const int ca = std::popcount(std::uint32_t(a)) + fixed_contacts;
            const int cb = std::popcount(std::uint32_t(b)) + fixed_contacts;
            return st * (om[a] + om[b]) - 0.5 * tt * beta * beta * (ca + cb) +
                   lam * beta * beta * (std::popcount(std::uint32_t(a & b)) + fixed_count);
          }) /
          (2.0 * vol);
    }
  }
  r.quenched = {mean_of(quench), stderr_of(quench), std::uint64_t(spec.R), 0, key.master, "replica-exact-patterns"};
  r.inequality_holds = r.rhs <= r.quenched.mean + 3.0 * r.quenched.std_error;
  r.monotone = true;
  for (int g = 0; g < G; ++g) {
    r.s_grid.push_back(spec.t * g / (G - 1));
    const auto& v = psi[std::size_t(g)];
    r.psi.push_back({mean_of(v), stderr_of(v), std::uint64_t(spec.R), 0, key.master, "replica-psi"});
    if (g > 0) {
      std::vector<double> dlt(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) dlt[i] = v[i] - psi[std::size_t(g - 1)][i];
      const Estimate e{mean_of(dlt), stderr_of(dlt), std::uint64_t(spec.R), 0, key.master, "replica-psi-step"};
      if (e.mean < -2.0 * e.std_error - 1e-12) r.monotone = false;
      r.psi_steps.push_back(e);
    }
  }
  return r;
}

}  // namespace gffpin

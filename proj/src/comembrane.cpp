#include "gffpin/comembrane.hpp"

#include <cmath>
#include <limits>

#include "gffpin/bounds.hpp"
#include "gffpin/errors.hpp"
#include "gffpin/special.hpp"

namespace gffpin {

void CoMembraneParams::validate() const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (N < 2) throw ConfigError("N must be >= 2");
  if (rho < 0.0) throw ConfigError("rho must be >= 0");
  if (h < 0.0) throw ConfigError("h must be >= 0");
  if (m < 0.0) throw ConfigError("mass must be >= 0");
}

Interaction CoMembraneParams::interaction(std::span<const double> omega, CoMembraneForm form) const {
  const Box b = box();
  Interaction in;
  in.kind = form == CoMembraneForm::delta ? InteractionKind::comembrane_delta : InteractionKind::comembrane_sign;
  in.region = b.region(region);
  if (omega.size() != in.region.size()) throw DomainError("omega does not match the sum region");
  in.coupling.assign(b.num_sites(), 0.0);
  const double scale = form == CoMembraneForm::delta ? -2.0 * rho : rho;
  for (std::size_t k = 0; k < in.region.size(); ++k) in.coupling[in.region[k]] = scale * (omega[k] + h);
  return in;
}

double comembrane_energy(std::span<const double> field, std::span<const double> omega, const CoMembraneParams& p) {
  return p.interaction(omega, CoMembraneForm::delta).energy(field);
}

double comembrane_sign_energy(std::span<const double> field, std::span<const double> omega,
                              const CoMembraneParams& p) {
  return p.interaction(omega, CoMembraneForm::sign).energy(field);
}

double critical_curve(const DisorderLaw& law, double rho) {
  if (!(rho > 0.0)) throw DomainError("critical_curve: rho must be > 0");
  if (law.kind() == DisorderKind::gaussian) return rho;
  return law.lambda(-2.0 * rho) / (2.0 * rho);
}

double below_tail_check(double a, double h, double sigma, double v) {
  const double u = u_of_ah(a, h, sigma);
  return gauss_interval(u - 1.0 + v, sigma, -std::numeric_limits<double>::infinity(), 0.0) / (a * h);
}

PartitionEstimate comembrane_partition_mc(const CoMembraneParams& p, std::span<const double> omega, int M,
                                          Philox& rng, CoMembraneForm form) {
  p.validate();
  FieldSampler fs(p.box(), p.m, p.u);
  fs.set_boundary(fs.resolve(p.bc, rng));
  return partition_mc_fixed(fs, p.interaction(omega, form), M, rng);
}

QuenchedResult comembrane_free_energy(const CoMembraneParams& p, int R, int M, const StreamKey& key, int threads) {
  p.validate();
  const Box box = p.box();
  return quenched_core(box, p.m, p.u, p.bc, p.law, box.region(p.region).size(),
                       [&](std::span<const double> omega) { return p.interaction(omega); }, R, M, key, threads);
}

LowerBoundResult comembrane_lower_bound(const CoMembraneParams& p, int R, int M, const StreamKey& key, double k,
                                        int threads) {
  p.validate();
  if (p.m == 0.0 && p.d <= 2) throw DomainError("comembrane_lower_bound: d <= 2 needs m > 0");
  if (!p.bc.random()) throw DomainError("comembrane_lower_bound: needs a stationary boundary condition");
  LowerBoundResult r;
  r.replicas = comembrane_free_energy(p, R, M, key, threads);
  r.estimate = r.replicas.free_energy_raw;
  r.f_mass = p.m > 0.0 ? f_mass_d(p.d, p.m) : 0.0;
  r.k = k;
  r.value = r.estimate.mean - r.f_mass - k * r.estimate.std_error;
  r.certified = r.value > 0.0;
  r.certificate = {p.rho, p.h, p.m, p.u, p.d, p.N, k, r.estimate.mean, r.estimate.std_error, r.f_mass, r.value,
                   key.id(), "comembrane"};
  return r;
}

namespace {

struct ChainStats {
  std::vector<double> below, mean;
};

ChainStats run_chain(const CoMembraneParams& p, const Interaction& inter, const ChainSpec& chain, Philox& rng) {
  const Box box = p.box();
  FieldSampler fs(box, p.m, p.u);
  fs.set_boundary(fs.resolve(p.bc, rng));
  FieldSample st{box, std::vector<double>(box.num_sites()), rng.key(), rng.stream()};
  fs.sample(rng, st.values);
  const double gu = p.m > 0.0 ? p.u : 0.0;
  for (int s = 0; s < chain.burn_in; ++s) gibbs_sweep(st, inter, p.m, gu, rng);
  ChainStats cs;
  for (int k = 0; k < chain.n_samples; ++k) {
    for (int s = 0; s < chain.thin; ++s) gibbs_sweep(st, inter, p.m, gu, rng);
    double b = 0.0, m = 0.0;
    for (std::size_t x : inter.region) {
      b += st.values[x] < 0.0 ? 1.0 : 0.0;
      m += st.values[x];
    }
    cs.below.push_back(b / double(inter.region.size()));
    cs.mean.push_back(m / double(inter.region.size()));
  }
  return cs;
}

Estimate series_estimate(const std::vector<double>& v, const char* method) {
  Estimate e;
  e.mean = mean_of(v);
  e.std_error = batch_means_stderr(v);
  e.n_mc = v.size();
  e.method = method;
  return e;
}

double zscore(const Estimate& a, const Estimate& b) {
  const double s = std::hypot(a.std_error, b.std_error);
  return s > 0.0 ? (a.mean - b.mean) / s : (a.mean == b.mean ? 0.0 : INFINITY);
}

}  // namespace

MeasureEquivalence measure_equivalence(const CoMembraneParams& p, std::span<const double> omega,
                                       const ChainSpec& chain, const StreamKey& key) {
  p.validate();
  const Interaction di = p.interaction(omega, CoMembraneForm::delta);
  const Interaction si = p.interaction(omega, CoMembraneForm::sign);
  MeasureEquivalence r;
  for (std::size_t k = 0; k < omega.size(); ++k) r.log_ratio += p.rho * (omega[k] + p.h);
  Philox r1 = key.with_purpose("chain-delta").engine();
  Philox r2 = key.with_purpose("chain-sign").engine();
  const ChainStats a = run_chain(p, di, chain, r1);
  const ChainStats b = run_chain(p, si, chain, r2);
  r.below_delta = series_estimate(a.below, "gibbs-delta");
  r.below_sign = series_estimate(b.below, "gibbs-sign");
  r.mean_delta = series_estimate(a.mean, "gibbs-delta");
  r.mean_sign = series_estimate(b.mean, "gibbs-sign");
  r.z_below = zscore(r.below_delta, r.below_sign);
  r.z_mean = zscore(r.mean_delta, r.mean_sign);
  // The two energies differ by a field-independent constant.
  Philox r3 = key.with_purpose("energy-gap").engine();
  FieldSampler fs(p.box(), p.m, p.u);
  fs.set_boundary(fs.resolve(p.bc, r3));
  std::vector<double> field(p.box().num_sites());
  for (int i = 0; i < 64; ++i) {
    fs.sample(r3, field);
    const double gap = si.energy(field) - di.energy(field) - r.log_ratio;
    r.max_energy_defect = std::max(r.max_energy_defect, std::abs(gap));
  }
  r.agree = std::abs(r.z_below) <= 3.0 && std::abs(r.z_mean) <= 3.0;
  return r;
}

}  // namespace gffpin

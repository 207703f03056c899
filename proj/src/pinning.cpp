#include "gffpin/pinning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gffpin/bounds.hpp"
#include "gffpin/errors.hpp"
#include "gffpin/green.hpp"
#include "gffpin/parallel.hpp"
#include "gffpin/special.hpp"

namespace gffpin {

void PinningParams::validate() const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (N < 2) throw ConfigError("N must be >= 2");
  if (beta < 0.0) throw ConfigError("beta must be >= 0");
  if (m < 0.0) throw ConfigError("mass must be >= 0");
  if (!std::isfinite(h)) throw ConfigError("h must be finite");
  law.lambda(beta);
}

std::vector<double> PinningParams::couplings(std::span<const double> omega) const {
  const Box b = box();
  const auto& reg = b.region(region);
  if (omega.size() != reg.size()) throw DomainError("omega does not match the sum region");
  const double shift = h - law.lambda(beta);
  std::vector<double> c(b.num_sites(), 0.0);
  for (std::size_t k = 0; k < reg.size(); ++k) c[reg[k]] = beta * omega[k] + shift;
  return c;
}

Interaction PinningParams::interaction(std::span<const double> omega) const {
  Interaction in;
  in.kind = InteractionKind::pinning;
  in.region = box().region(region);
  in.coupling = couplings(omega);
  return in;
}

double pinning_energy(std::span<const double> field, std::span<const double> omega, const PinningParams& p) {
  return p.interaction(omega).energy(field);
}

// ---------------------------------------------------------------------------

PartitionEstimate partition_mc_fixed(const FieldSampler& fs, const Interaction& inter, int M, Philox& rng) {
  if (M < 2) throw ConfigError("partition_mc: M must be >= 2");
  std::vector<double> field(fs.box().num_sites());
  std::vector<double> energies(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    fs.sample(rng, field);
    energies[std::size_t(i)] = inter.energy(field);
  }
  const LogMeanExp l = log_mean_exp(energies);
  PartitionEstimate r;
  r.z.mean = l.mean_exp;
  r.z.std_error = l.mean_exp_stderr;
  r.z.n_mc = std::uint64_t(M);
  r.z.seed = rng.stream();
  r.z.method = "mc-plain";
  r.log_z_raw = l.raw;
  r.log_z_jk = l.jackknife;
  r.jk_bias = l.raw - l.jackknife;
  r.log_z = r.z;
  r.log_z.mean = l.jackknife;
  r.log_z.std_error = l.jk_stderr;
  r.log_z.method = "mc-plain-jackknife";
  return r;
}

PartitionEstimate partition_mc(const PinningParams& p, std::span<const double> omega, int M, Philox& rng) {
  p.validate();
  FieldSampler fs(p.box(), p.m, p.u);
  fs.set_boundary(fs.resolve(p.bc, rng));
  return partition_mc_fixed(fs, p.interaction(omega), M, rng);
}

// ---------------------------------------------------------------------------

ExactPinningOracle::ExactPinningOracle(const PinningParams& p, int extra_nodes) : p_(p) {
  p.validate();
  if (p.bc.random()) throw DomainError("exact oracle needs a deterministic boundary condition");
  const Box box = p.box();
  const auto& reg = box.region(p.region);
  Philox dummy(0, 0);
  FieldSampler fs(box, p.m, p.u);
  const std::vector<double> bv = fs.resolve(p.bc, dummy);
  fs.set_boundary(bv);
  const std::vector<double>& mean = fs.mean();
  for (std::size_t k = 0; k < reg.size(); ++k) {
    const std::size_t x = reg[k];
    if (box.is_boundary(x)) {
      fixed_.push_back(x);
      fixed_pos_.push_back(k);
      fixed_delta_.push_back(std::abs(mean[x]) <= 1.0 ? 1.0 : 0.0);
    } else {
      fluct_.push_back(x);
      region_pos_.push_back(k);
    }
  }
  if (fluct_.size() > std::size_t(ContactPatternTable::kMaxSites))
    throw ConfigError("partition_exact_small: more than 10 fluctuating sites");
  const GreenTable g = green_box(box, p.m);
  const Eigen::Index n = Eigen::Index(fluct_.size());
  Eigen::VectorXd mu(n);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mu(i) = mean[fluct_[std::size_t(i)]];
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = g(fluct_[std::size_t(i)], fluct_[std::size_t(j)]);
  }
  table_ = std::make_shared<const ContactPatternTable>(mu, cov, -1.0, 1.0, extra_nodes);
}

const ContactPatternTable& ExactPinningOracle::table() const { return *table_; }

double ExactPinningOracle::partition(std::span<const double> omega) const {
  const std::vector<double> c = p_.couplings(omega);
  std::vector<double> xi(fluct_.size());
  for (std::size_t i = 0; i < fluct_.size(); ++i) xi[i] = std::expm1(c[fluct_[i]]);
  double fixed = 0.0;
  for (std::size_t i = 0; i < fixed_.size(); ++i) fixed += c[fixed_[i]] * fixed_delta_[i];
  return std::exp(fixed) * table_->subset_expansion(xi);
}

ExactResult partition_exact_small(const PinningParams& p, std::span<const double> omega) {
  const ExactPinningOracle a(p), b(p, 4);
  ExactResult r;
  r.z = b.partition(omega);
  r.error_estimate = std::abs(b.partition(omega) - a.partition(omega));
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// One transfer pass on a fixed node set; returns log of the integral.
double transfer_log_integral(const std::vector<double>& x, const std::vector<double>& wq, double left, double right,
                             int n_interior, double m, double u, const std::vector<double>& coupling_interior,
                             bool tilt) {
  const std::size_t n = x.size();
  std::vector<double> site(n), v(n), nv(n);
  double log_scale = 0.0;
  auto site_weight = [&](int i, std::size_t a) {
    double w = wq[a];
    if (m > 0.0) w *= std::exp(-0.5 * m * m * (x[a] - u) * (x[a] - u));
    if (tilt && std::abs(x[a]) <= 1.0) w *= std::exp(coupling_interior[std::size_t(i)]);
    return w;
  };
  for (std::size_t a = 0; a < n; ++a) v[a] = std::exp(-0.5 * (x[a] - left) * (x[a] - left)) * site_weight(0, a);
  for (int i = 1; i < n_interior; ++i) {
    double mx = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      double s = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double dx = x[a] - x[b];
        s += v[a] * std::exp(-0.5 * dx * dx);
      }
      nv[b] = s * site_weight(i, b);
      mx = std::max(mx, nv[b]);
    }
    for (std::size_t b = 0; b < n; ++b) v[b] = nv[b] / mx;
    log_scale += std::log(mx);
  }
  double s = 0.0;
  for (std::size_t a = 0; a < n; ++a) s += v[a] * std::exp(-0.5 * (x[a] - right) * (x[a] - right));
  return log_scale + std::log(s);
}

void transfer_nodes(double L, double step, int nodes, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  // Panel edges include +-1 so the contact indicator is smooth on each panel.
  std::vector<double> edges;
  auto add_range = [&](double a, double b) {
    const int np = std::max(1, int(std::ceil((b - a) / step - 1e-12)));
    for (int k = 0; k < np; ++k) edges.push_back(a + (b - a) * k / np);
  };
  add_range(-L, -1.0);
  add_range(-1.0, 1.0);
  add_range(1.0, L);
  edges.push_back(L);
  const QuadRule q = gauss_legendre(nodes);
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e], b = edges[e + 1];
    for (int t = 0; t < nodes; ++t) {
      x.push_back(0.5 * (a + b) + 0.5 * (b - a) * q.x[std::size_t(t)]);
      w.push_back(0.5 * (b - a) * q.w[std::size_t(t)]);
    }
  }
}

}  // namespace

TransferResult partition_transfer_1d(const PinningParams& p, std::span<const double> omega, TransferGrid grid) {
  p.validate();
  if (p.d != 1) throw DomainError("partition_transfer_1d: d must be 1");
  if (p.bc.random()) throw DomainError("partition_transfer_1d: needs a deterministic boundary");
  const Box box = p.box();
  Philox dummy(0, 0);
  FieldSampler fs(box, p.m, p.u);
  const std::vector<double> bv = fs.resolve(p.bc, dummy);
  const double left = bv[0], right = bv[1];
  const std::vector<double> c = p.couplings(omega);
  std::vector<double> ci(std::size_t(p.N - 1));
  for (int i = 1; i < p.N; ++i) ci[std::size_t(i - 1)] = c[std::size_t(i)];
  double fixed = 0.0;
  if (std::abs(left) <= 1.0) fixed += c[0];
  if (std::abs(right) <= 1.0) fixed += c[std::size_t(p.N)];
  double L = grid.L;
  if (L <= 0.0) {
    const double sd = std::sqrt(p.N / 4.0 + 1.0);
    L = std::max({std::abs(left), std::abs(right), std::abs(p.u)}) + 12.0 * sd + 2.0;
  }
  auto run = [&](double step) {
    std::vector<double> x, w;
    transfer_nodes(L, step, grid.nodes, x, w);
    const double num = transfer_log_integral(x, w, left, right, p.N - 1, p.m, p.u, ci, true);
    const double den = transfer_log_integral(x, w, left, right, p.N - 1, p.m, p.u, ci, false);
    return std::exp(num - den + fixed);
  };
  TransferResult r;
  r.z_coarse = run(grid.step);
  r.z_fine = run(0.5 * grid.step);
  // Extrapolate assuming the Gauss-Legendre order 2*nodes in the panel width.
  const double factor = std::pow(2.0, 2 * grid.nodes) - 1.0;
  r.z = r.z_fine + (r.z_fine - r.z_coarse) / factor;
  r.error_bound = std::abs(r.z_fine - r.z_coarse);
  if (r.error_bound > grid.tol * std::max(1.0, std::abs(r.z)))
    throw ConfigError("partition_transfer_1d: grid too coarse for the requested tolerance");
  return r;
}

// ---------------------------------------------------------------------------

QuenchedResult quenched_core(const Box& box, double m, double u, const BoundaryCondition& bc, const DisorderLaw& law,
                             std::size_t n_omega, const InteractionBuilder& build, int R, int M, const StreamKey& key,
                             int threads) {
  if (R < 2) throw ConfigError("quenched estimator: R must be >= 2");
  QuenchedResult q;
  q.log_z_raw.assign(std::size_t(R), 0.0);
  q.log_z_jk.assign(std::size_t(R), 0.0);
  q.seeds.assign(std::size_t(R), 0);
  // One sampler per replica keeps tasks independent of scheduling.
  parallel_for(std::size_t(R), threads, [&](std::size_t r) {
    const StreamKey rk = key.with_replica(r);
    Philox orng = rk.with_purpose("omega").engine();
    std::vector<double> omega(n_omega);
    for (double& w : omega) w = law.sample(orng);
    FieldSampler fs(box, m, u);
    Philox brng = rk.with_purpose("boundary").engine();
    fs.set_boundary(fs.resolve(bc, brng));
    Philox frng = rk.with_purpose("field").engine();
    const PartitionEstimate pe = partition_mc_fixed(fs, build(omega), M, frng);
    q.log_z_raw[r] = pe.log_z_raw;
    q.log_z_jk[r] = pe.log_z_jk;
    q.seeds[r] = rk.id();
  });
  double vol = 1.0;
  for (int a = 0; a < box.dim(); ++a) vol *= box.edge();
  std::vector<double> a(q.log_z_jk), b(q.log_z_raw);
  for (double& x : a) x /= vol;
  for (double& x : b) x /= vol;
  q.free_energy = {mean_of(a), stderr_of(a), std::uint64_t(R), std::uint64_t(M), key.master, "quenched-jackknife"};
  q.free_energy_raw = {mean_of(b), stderr_of(b), std::uint64_t(R), std::uint64_t(M), key.master, "quenched-plugin"};
  return q;
}

QuenchedResult quenched_free_energy(const PinningParams& p, int R, int M, const StreamKey& key, int threads) {
  p.validate();
  const Box box = p.box();
  const std::size_t n_omega = box.region(p.region).size();
  return quenched_core(box, p.m, p.u, p.bc, p.law, n_omega,
                       [&](std::span<const double> omega) { return p.interaction(omega); }, R, M, key, threads);
}

Estimate fractional_moment(const QuenchedResult& q, int volume) {
  std::vector<double> half(q.log_z_raw);
  for (double& x : half) x *= 0.5;
  const LogMeanExp l = log_mean_exp(half);
  Estimate e;
  e.mean = 2.0 / volume * l.raw;
  e.std_error = 2.0 / volume * (l.stderr_scaled / l.mean_exp_scaled);
  e.n_replicas = q.log_z_raw.size();
  e.method = "fractional-moment";
  return e;
}

// ---------------------------------------------------------------------------

Estimate contact_fraction(const PinningParams& p, std::span<const double> omega, const ChainSpec& chain, Philox& rng) {
  p.validate();
  if (chain.burn_in < 0 || chain.thin < 1 || chain.n_samples < 2) throw ConfigError("invalid chain spec");
  const Box box = p.box();
  FieldSampler fs(box, p.m, p.u);
  fs.set_boundary(fs.resolve(p.bc, rng));
  FieldSample st{box, std::vector<double>(box.num_sites()), rng.key(), rng.stream()};
  fs.sample(rng, st.values);
  const Interaction inter = p.interaction(omega);
  const double gu = p.m > 0.0 ? p.u : 0.0;
  for (int s = 0; s < chain.burn_in; ++s) gibbs_sweep(st, inter, p.m, gu, rng);
  std::vector<double> series;
  const auto& reg = inter.region;
  for (int k = 0; k < chain.n_samples; ++k) {
    for (int s = 0; s < chain.thin; ++s) gibbs_sweep(st, inter, p.m, gu, rng);
    double c = 0.0;
    for (std::size_t x : reg) c += std::abs(st.values[x]) <= 1.0 ? 1.0 : 0.0;
    series.push_back(c / double(reg.size()));
  }
  Estimate e;
  e.mean = mean_of(series);
  e.std_error = batch_means_stderr(series);
  e.n_mc = series.size();
  e.seed = rng.stream();
  e.method = "gibbs";
  return e;
}

// ---------------------------------------------------------------------------

LowerBoundResult finite_volume_lower_bound(const PinningParams& p, int R, int M, const StreamKey& key, double k,
                                           int threads) {
  p.validate();
  if (p.m == 0.0 && p.d <= 2) throw DomainError("finite_volume_lower_bound: d <= 2 needs m > 0");
  if (!p.bc.random()) throw DomainError("finite_volume_lower_bound: needs a stationary boundary condition");
  LowerBoundResult r;
  r.replicas = quenched_free_energy(p, R, M, key, threads);
  // The plug-in log Z is biased low, which keeps the certificate conservative.
  r.estimate = r.replicas.free_energy_raw;
  r.f_mass = p.m > 0.0 ? f_mass_d(p.d, p.m) : 0.0;
  r.k = k;
  r.value = r.estimate.mean - r.f_mass - k * r.estimate.std_error;
  r.certified = r.value > 0.0;
  r.certificate = {p.beta, p.h, p.m, p.u, p.d, p.N, k, r.estimate.mean, r.estimate.std_error, r.f_mass, r.value,
                   key.id(), "pinning"};
  return r;
}

double pilot_height(const PinningParams& p, std::span<const double> heights, int R, int M, const StreamKey& key,
                    double k, int threads) {
  if (heights.empty()) throw ConfigError("pilot_height: empty height list");
  double best = heights[0], best_value = -INFINITY;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    PinningParams q = p;
    q.u = heights[i];
    q.bc = p.m > 0.0 ? BoundaryCondition::stationary_massive(q.u, p.m) : BoundaryCondition::stationary(q.u);
    const QuenchedResult r = quenched_free_energy(q, R, M, key.with_experiment(key.experiment + 1 + i), threads);
    const double v = r.free_energy_raw.mean - k * r.free_energy_raw.std_error;
    if (v > best_value) {
      best_value = v;
      best = heights[i];
    }
  }
  return best;
}

double contact_constant(int d) {
  if (d < 3) return std::numeric_limits<double>::quiet_NaN();
  const double s = std::sqrt(green_infinite(d, Site(static_cast<std::size_t>(d), 0), 0.0));
  return norm_interval(-1.0 / s, 1.0 / s);
}

PureResult pure_free_energy(int d, int N, double h, int M, const StreamKey& key) {
  PinningParams p;
  p.d = d;
  p.N = N;
  p.h = h;
  const std::vector<double> omega(p.box().region(p.region).size(), 0.0);
  Philox rng = key.with_purpose("pure").engine();
  const PartitionEstimate pe = partition_mc(p, omega, M, rng);
  double vol = 1.0;
  for (int a = 0; a < d; ++a) vol *= N;
  PureResult r;
  r.free_energy = pe.log_z;
  r.free_energy.mean /= vol;
  r.free_energy.std_error /= vol;
  r.free_energy.method = "pure-mc";
  r.C_d = contact_constant(d);
  r.sigma2 = d >= 3 ? green_infinite(d, Site(static_cast<std::size_t>(d), 0), 0.0) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace gffpin

#include "gffpin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gffpin/errors.hpp"

namespace gffpin {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::E_u: return "E_u";
    case EventKind::A0: return "A0";
    case EventKind::A1_x: return "A1_x";
    case EventKind::A1: return "A1";
    case EventKind::A2: return "A2";
    case EventKind::B_u: return "B_u";
    case EventKind::A1_harmonic: return "A1_harmonic";
    case EventKind::A2_kappa: return "A2_kappa";
    case EventKind::F_N_eps: return "F_N_eps";
    case EventKind::H_threshold: return "H_threshold";
  }
  return "?";
}

EventKind event_kind_from_string(const std::string& s) {
  for (EventKind k : {EventKind::E_u, EventKind::A0, EventKind::A1_x, EventKind::A1, EventKind::A2, EventKind::B_u,
                      EventKind::A1_harmonic, EventKind::A2_kappa, EventKind::F_N_eps, EventKind::H_threshold})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown event kind: " + s);
}

double conjection_threshold(int d, double h) {
  if (!(h > 0.0 && h < 1.0)) throw DomainError("conjection_threshold: need 0 < h < 1");
  return std::sqrt(std::log(1.0 / h) / (4.0 * d));
}

// Harmonic extension inside a site set with the field outside as boundary data.
struct EventEvaluator::HaloSolver {
  std::vector<std::size_t> sites;
  std::vector<std::vector<std::size_t>> outside;  // outside neighbours per site
  std::vector<std::size_t> block_local;           // local index of the block sites
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;

  HaloSolver(const Box& box, const std::vector<Site>& halo, const std::vector<Site>& block) {
    std::unordered_map<std::size_t, std::size_t> local;
    for (const Site& s : halo) {
      local.emplace(box.index(s), sites.size());
      sites.push_back(box.index(s));
    }
    const Eigen::Index n = Eigen::Index(sites.size());
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::size_t> nb;
    outside.resize(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
      trip.emplace_back(Eigen::Index(i), Eigen::Index(i), 2.0 * box.dim());
      box.neighbors(sites[i], nb);
      for (std::size_t y : nb) {
        auto it = local.find(y);
        if (it != local.end())
          trip.emplace_back(Eigen::Index(i), Eigen::Index(it->second), -1.0);
        else
          outside[i].push_back(y);
      }
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    llt.compute(A);
    if (llt.info() != Eigen::Success) throw DomainError("halo solver: factorization failed");
    for (const Site& s : block) block_local.push_back(local.at(box.index(s)));
  }

  Eigen::VectorXd solve(std::span<const double> field) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(Eigen::Index(sites.size()));
    for (std::size_t i = 0; i < sites.size(); ++i)
      for (std::size_t y : outside[i]) rhs(Eigen::Index(i)) += field[y];
    return llt.solve(rhs);
  }
};

EventEvaluator::EventEvaluator(const EventSpec& spec, const Box& box) : spec_(spec), box_(box) {
  const int d = box.dim(), N = box.edge();
  switch (spec.kind) {
    case EventKind::A1_x:
      if (!box.in_tilde(spec.site)) throw ConfigError("A1_x: site must lie in the tilde region");
      break;
    case EventKind::B_u:
      if (spec.N0 < 2 || !(spec.rho > 0.0)) throw ConfigError("B_u: needs N0 >= 2 and rho > 0");
      for (std::size_t x = 0; x < box.num_sites(); ++x)
        if (box.dist_to_boundary(x) >= 0.5 * spec.N0) deep_.push_back(x);
      break;
    case EventKind::A1_harmonic:
    case EventKind::A2_kappa: {
      if (spec.kind == EventKind::A1_harmonic && !(spec.rho > 0.0)) throw ConfigError("A1_harmonic: needs rho > 0");
      const CoarseGrid grid(d, N, spec.N0);
      for (const auto& j : grid.blocks()) {
        const auto bs = grid.block_sites(j);
        std::vector<std::size_t> idx;
        for (const Site& s : bs) idx.push_back(box.index(s));
        blocks_.push_back(idx);
        if (spec.kind == EventKind::A1_harmonic)
          halos_.push_back(std::make_shared<HaloSolver>(box, grid.halo_sites(j), bs));
      }
      break;
    }
    case EventKind::F_N_eps: {
      threshold_ = conjection_threshold(d, spec.h);
      for (std::size_t x : box.interior()) {
        int s = 0;
        for (int c : box.site(x)) s += c;
        if (s % 2 == 0) even_.push_back(x);
      }
      break;
    }
    default: break;
  }
}

bool EventEvaluator::operator()(std::span<const double> field, std::span<const double> mean) const {
  auto contacts = [&]() {
    int c = 0;
    for (std::size_t x : box_.tilde()) c += std::abs(field[x]) <= 1.0 ? 1 : 0;
    return c;
  };
  const double volume = std::pow(double(box_.edge()), box_.dim());
  switch (spec_.kind) {
    case EventKind::E_u:
      for (std::size_t x : box_.boundary())
        if (!(field[x] > 0.5 * spec_.u)) return false;
      return true;
    case EventKind::A0: return contacts() == 0;
    case EventKind::A1: return contacts() == 1;
    case EventKind::A2: return contacts() >= 2;
    case EventKind::A1_x: return std::abs(field[spec_.site]) <= 1.0 && contacts() == 1;
    case EventKind::B_u: {
      const double tol = 0.5 * std::pow(spec_.rho, 0.125);
      for (std::size_t x : deep_)
        if (std::abs(mean[x] - spec_.u) > tol) return false;
      return true;
    }
    case EventKind::A1_harmonic: {
      const double tol = std::pow(spec_.rho, 0.125);
      for (const auto& hs : halos_) {
        const Eigen::VectorXd H = hs->solve(field);
        for (std::size_t l : hs->block_local)
          if (std::abs(H(Eigen::Index(l)) - spec_.u) > tol) return false;
      }
      return true;
    }
    case EventKind::A2_kappa:
      for (const auto& b : blocks_) {
        int c = 0;
        for (std::size_t x : b) c += std::abs(field[x]) <= 1.0 ? 1 : 0;
        if (c > spec_.kappa) return false;
      }
      return true;
    case EventKind::F_N_eps: {
      std::vector<std::size_t> nb;
      double count = 0.0;
      for (std::size_t x : even_) {
        box_.neighbors(x, nb);
        double s = 0.0;
        for (std::size_t y : nb) s += field[y];
        count += std::abs(s / (2.0 * box_.dim())) < threshold_ ? 1.0 : 0.0;
      }
      return count >= 0.25 * spec_.eps * volume;
    }
    case EventKind::H_threshold: return hamiltonian_statistic(box_, field) > spec_.C * volume;
  }
  return false;
}

EventReport event_probability(const EventSpec& spec, const FieldLaw& law, int M, const StreamKey& key) {
  if (M < 100) throw ConfigError("event_probability: M must be >= 100");
  const Box box = law.box();
  const EventEvaluator ev(spec, box);
  FieldSampler fs(box, law.m, law.u);
  Philox rng = key.engine();
  std::vector<double> field(box.num_sites());
  std::uint64_t hits = 0, a1_hits = 0;
  const bool fixed_bc = !law.bc.random();
  if (fixed_bc) fs.set_boundary(fs.resolve(law.bc, rng));
  for (int i = 0; i < M; ++i) {
    if (!fixed_bc) fs.set_boundary(fs.resolve(law.bc, rng));
    fs.sample(rng, field);
    hits += ev(field, fs.mean()) ? 1 : 0;
    if (spec.kind == EventKind::A2) {
      int c = 0;
      for (std::size_t x : box.tilde()) c += std::abs(field[x]) <= 1.0 ? 1 : 0;
      a1_hits += c == 1 ? 1 : 0;
    }
  }
  EventReport r;
  r.hits = hits;
  const double p = double(hits) / M;
  r.estimate = {p, std::sqrt(p * (1.0 - p) / M), 1, std::uint64_t(M), key.id(), "event-mc:" + to_string(spec.kind)};
  const Interval w = wilson_interval(hits, std::uint64_t(M));
  r.wilson_lo = w.lo;
  r.wilson_hi = w.hi;
  const double volume = std::pow(double(law.N), law.d);
  switch (spec.kind) {
    case EventKind::A2:
      r.bound = std::pow(double(law.N), -law.d) * double(a1_hits) / M;
      r.bound_formula = "N^-d P(A1)";
      break;
    case EventKind::B_u:
      r.bound = std::exp(-std::pow(spec.rho, -0.2));
      r.bound_on_complement = true;
      r.bound_formula = "exp(-rho^(-1/5))";
      break;
    case EventKind::A1_harmonic:
    case EventKind::A2_kappa:
      if (spec.h > 0.0 && spec.h < 1.0) {
        r.bound = std::pow(spec.h, std::pow(double(spec.kappa), 0.25));
        r.bound_on_complement = true;
        r.bound_formula = "h^(kappa^(1/4))";
      }
      break;
    case EventKind::H_threshold:
      r.bound = std::exp(std::pow(double(law.N - 1), law.d) * std::log(2.0) - 0.375 * spec.C * volume);
      r.bound_formula = "2^((N-1)^d) exp(-(3/8) C N^d)";
      break;
    default: break;
  }
  if (r.bound) {
    const double q = r.bound_on_complement ? 1.0 - p : p;
    r.bound_pass = q <= *r.bound + 3.0 * r.estimate.std_error;
  }
  return r;
}

GoodBoundaryContact contact_given_good_boundary(const FieldLaw& law, double u, std::size_t site, int boundaries,
                                                int M, const StreamKey& key) {
  if (boundaries < 2 || M < 1) throw ConfigError("contact_given_good_boundary: need >= 2 boundaries and M >= 1");
  const Box box = law.box();
  if (box.is_boundary(site)) throw ConfigError("contact_given_good_boundary: site must be interior");
  FieldSampler fs(box, law.m, law.u);
  Philox rng = key.engine();
  std::vector<double> field(box.num_sites());
  std::vector<double> per;
  for (int b = 0; b < boundaries; ++b) {
    const std::vector<double> bv = fs.resolve(law.bc, rng);
    if (!std::all_of(bv.begin(), bv.end(), [&](double v) { return v > 0.5 * u; })) continue;
    fs.set_boundary(bv);
    double c = 0.0;
    for (int i = 0; i < M; ++i) {
      fs.sample(rng, field);
      c += std::abs(field[site]) <= 1.0 ? 1.0 : 0.0;
    }
    per.push_back(c / M);
  }
  GoodBoundaryContact r;
  r.good_boundaries = per.size();
  r.contact.mean = per.empty() ? std::nan("") : mean_of(per);
  r.contact.std_error = per.size() >= 2 ? stderr_of(per) : std::nan("");
  r.contact.n_replicas = per.size();
  r.contact.n_mc = std::uint64_t(M);
  r.contact.seed = key.id();
  r.contact.method = "good-boundary-contact";
  r.bound = std::pow(double(law.N), -2.0 * law.d);
  return r;
}

OneContact one_contact_decomposition(const PinningParams& p, std::span<const double> omega) {
  const ExactPinningOracle oracle(p);
  const auto& pat = oracle.table().patterns();
  const auto& fl = oracle.fluctuating();
  const std::vector<double> c = p.couplings(omega);
  OneContact r;
  r.sites = fl;
  r.p_A0 = pat[0];
  std::vector<double> xi(fl.size());
  r.z_prime = 1.0;
  for (std::size_t i = 0; i < fl.size(); ++i) {
    const double q = pat[std::size_t(1) << i];
    r.p_A1_x.push_back(q);
    r.p_A1 += q;
    xi[i] = std::expm1(c[fl[i]]);
    r.z_prime += xi[i] * q;
  }
  r.p_A2 = 1.0 - r.p_A0 - r.p_A1;
  r.z_prime -= r.p_A2;
  r.z_interior = oracle.table().subset_expansion(xi);
  r.z_exact = oracle.partition(omega);
  return r;
}

HeightHistogram contact_height_histogram(const PinningParams& p, std::span<const double> omega,
                                         const ChainSpec& chain, Philox& rng, double threshold) {
  p.validate();
  HeightHistogram r;
  r.threshold = threshold > 0.0 ? threshold : conjection_threshold(p.d, p.h);
  const Box box = p.box();
  FieldSampler fs(box, p.m, p.u);
  fs.set_boundary(fs.resolve(p.bc, rng));
  FieldSample st{box, std::vector<double>(box.num_sites()), rng.key(), rng.stream()};
  fs.sample(rng, st.values);
  const Interaction inter = p.interaction(omega);
  const double gu = p.m > 0.0 ? p.u : 0.0;
  for (int s = 0; s < chain.burn_in; ++s) gibbs_sweep(st, inter, p.m, gu, rng);
  for (int k = 0; k < chain.n_samples; ++k) {
    for (int s = 0; s < chain.thin; ++s) gibbs_sweep(st, inter, p.m, gu, rng);
    double c = 0.0;
    for (std::size_t x : inter.region) c += std::abs(st.values[x]) <= r.threshold ? 1.0 : 0.0;
    r.series.push_back(c / double(inter.region.size()));
  }
  r.fraction = {mean_of(r.series), batch_means_stderr(r.series), 1, r.series.size(), rng.stream(), "gibbs-height"};
  return r;
}

double hamiltonian_statistic(const Box& box, std::span<const double> field) {
  std::vector<std::size_t> nb;
  double s = 0.0;
  for (std::size_t x = 0; x < box.num_sites(); ++x) {
    box.neighbors(x, nb);
    for (std::size_t y : nb)
      if (y > x) {
        const double g = field[x] - field[y];
        s += g * g;
      }
  }
  return s;
}

HamiltonianProbe hamiltonian_probe(int d, int N, double lambda, double C, int M, const StreamKey& key) {
  if (!(lambda < 0.5)) throw DomainError("hamiltonian_probe: lambda must be < 1/2");
  if (M < 2) throw ConfigError("hamiltonian_probe: M must be >= 2");
  const Box box(d, N);
  FieldSampler fs(box, 0.0, 0.0);
  fs.set_boundary(std::vector<double>(box.boundary().size(), 0.0));
  Philox rng = key.engine();
  std::vector<double> field(box.num_sites()), H(static_cast<std::size_t>(M)), E(static_cast<std::size_t>(M)), T(static_cast<std::size_t>(M));
  const double volume = std::pow(double(N), d);
  for (int i = 0; i < M; ++i) {
    fs.sample(rng, field);
    H[std::size_t(i)] = hamiltonian_statistic(box, field);
    E[std::size_t(i)] = std::exp(lambda * H[std::size_t(i)]);
    T[std::size_t(i)] = H[std::size_t(i)] > C * volume ? 1.0 : 0.0;
  }
  const double n = std::pow(double(N - 1), d);
  HamiltonianProbe r;
  r.mean_H = {mean_of(H), stderr_of(H), 1, std::uint64_t(M), key.id(), "hamiltonian-mean"};
  r.mgf = {mean_of(E), stderr_of(E), 1, std::uint64_t(M), key.id(), "hamiltonian-mgf"};
  r.mgf_closed = std::pow(1.0 - 2.0 * lambda, -0.5 * n);
  r.z_mgf = r.mgf.std_error > 0.0 ? (r.mgf.mean - r.mgf_closed) / r.mgf.std_error : 0.0;
  r.tail = {mean_of(T), stderr_of(T), 1, std::uint64_t(M), key.id(), "hamiltonian-tail"};
  r.tail_bound = std::exp(n * std::log(2.0) - 0.375 * C * volume);
  return r;
}

}  // namespace gffpin

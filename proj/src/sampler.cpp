#include "gffpin/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>
#include "json.hpp"

#include "gffpin/errors.hpp"
#include "gffpin/special.hpp"

namespace gffpin {

// ---------------------------------------------------------------------------
// Interaction

double Interaction::site_energy(std::size_t idx, double phi) const {
  const double c = coupling[idx];
  switch (kind) {
    case InteractionKind::pinning: return (phi >= -1.0 && phi <= 1.0) ? c : 0.0;
    case InteractionKind::comembrane_delta: return phi < 0.0 ? c : 0.0;
    case InteractionKind::comembrane_sign: return phi < 0.0 ? -c : c;
  }
  return 0.0;
}

double Interaction::energy(std::span<const double> field) const {
  // Sequential sum in canonical order keeps results bit-reproducible.
  double e = 0.0;
  for (std::size_t x : region) e += site_energy(x, field[x]);
  return e;
}

int Interaction::pieces(std::size_t idx, Piece* out) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double c = coupling[idx];
  switch (kind) {
    case InteractionKind::pinning:
      out[0] = {-inf, -1.0, 0.0};
      out[1] = {-1.0, 1.0, c};
      out[2] = {1.0, inf, 0.0};
      return 3;
    case InteractionKind::comembrane_delta:
      out[0] = {-inf, 0.0, c};
      out[1] = {0.0, inf, 0.0};
      return 2;
    case InteractionKind::comembrane_sign:
      out[0] = {-inf, 0.0, -c};
      out[1] = {0.0, inf, c};
      return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Boundary conditions

BoundaryCondition BoundaryCondition::constant(double u) {
  BoundaryCondition b;
  b.kind = BoundaryKind::constant;
  b.u = u;
  return b;
}

BoundaryCondition BoundaryCondition::explicit_values(std::vector<double> v) {
  BoundaryCondition b;
  b.kind = BoundaryKind::explicit_values;
  b.values = std::move(v);
  return b;
}

BoundaryCondition BoundaryCondition::stationary(double u) {
  BoundaryCondition b;
  b.kind = BoundaryKind::stationary;
  b.u = u;
  return b;
}

BoundaryCondition BoundaryCondition::stationary_massive(double u, double m) {
  if (!(m > 0.0)) throw DomainError("stationary_massive: m must be positive");
  BoundaryCondition b;
  b.kind = BoundaryKind::stationary_massive;
  b.u = u;
  b.m = m;
  return b;
}

std::string BoundaryCondition::describe() const {
  switch (kind) {
    case BoundaryKind::constant: return "constant";
    case BoundaryKind::explicit_values: return "explicit";
    case BoundaryKind::stationary: return "stationary";
    case BoundaryKind::stationary_massive: return "stationary_massive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Spectral sampler

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan dst_plan(int n) {
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(fftw_mutex());
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  double* in = fftw_alloc_real(static_cast<std::size_t>(n));
  double* out = fftw_alloc_real(static_cast<std::size_t>(n));
  fftw_plan p = fftw_plan_r2r_1d(n, in, out, FFTW_RODFT00, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(n, p);
  return p;
}

}  // namespace

SpectralSampler::SpectralSampler(int d, int N, double m) : d_(d), N_(N), m_(m) {
  if (N < 2) throw DomainError("spectral sampler: N < 2");
  if (m < 0.0) throw DomainError("spectral sampler: m < 0");
  const SpectralBasis b = spectral_basis(N);
  const std::size_t n1 = std::size_t(N - 1);
  n_ = 1;
  for (int a = 0; a < d; ++a) n_ *= n1;
  sd_.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t r = k;
    double lam = m * m;
    for (int a = 0; a < d; ++a) {
      lam += b.eigenvalues[r % n1];
      r /= n1;
    }
    sd_[k] = 1.0 / std::sqrt(lam);
  }
  if (!uses_fft()) U_ = b.U;
  else dst_plan(N - 1);
}

void SpectralSampler::transform_line(double* line) const {
  const int n1 = N_ - 1;
  if (!uses_fft()) {
    double tmp[64];
    for (int k = 0; k < n1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n1; ++i) s += U_(i, k) * line[i];
      tmp[k] = s;
    }
    std::copy(tmp, tmp + n1, line);
    return;
  }
  double* in = fftw_alloc_real(static_cast<std::size_t>(n1));
  double* out = fftw_alloc_real(static_cast<std::size_t>(n1));
  std::copy(line, line + n1, in);
  fftw_execute_r2r(dst_plan(n1), in, out);
  const double scale = 0.5 * std::sqrt(2.0 / N_);
  for (int k = 0; k < n1; ++k) line[k] = scale * out[k];
  fftw_free(in);
  fftw_free(out);
}

void SpectralSampler::transform(std::span<double> data) const {
  const std::size_t n1 = std::size_t(N_ - 1);
  std::vector<double> line(n1);
  std::size_t stride = 1;
  for (int a = d_ - 1; a >= 0; --a) {
    const std::size_t block = stride * n1;
    for (std::size_t base = 0; base < n_; base += block) {
      for (std::size_t off = 0; off < stride; ++off) {
        for (std::size_t i = 0; i < n1; ++i) line[i] = data[base + off + i * stride];
        transform_line(line.data());
        for (std::size_t i = 0; i < n1; ++i) data[base + off + i * stride] = line[i];
      }
    }
    stride = block;
  }
}

void SpectralSampler::sample(Philox& rng, std::span<double> out, std::vector<double>* coeffs) const {
  if (out.size() != n_) throw DomainError("spectral sampler: output size mismatch");
  for (std::size_t k = 0; k < n_; ++k) out[k] = sd_[k] * rng.normal();
  if (coeffs) coeffs->assign(out.begin(), out.end());
  transform(out);
}

FieldSample sample_zero_boundary(int N, int d, double m, Philox& rng) {
  const Box box(d, N);
  FieldSample s{box, std::vector<double>(box.num_sites(), 0.0), rng.key(), rng.stream()};
  const SpectralSampler sp(d, N, m);
  std::vector<double> in(sp.size());
  sp.sample(rng, in);
  const auto& interior = box.interior();
  for (std::size_t k = 0; k < interior.size(); ++k) s.values[interior[k]] = in[k];
  return s;
}

// ---------------------------------------------------------------------------
// Stationary boundary

StationaryBoundarySampler::StationaryBoundarySampler(int d, int N, double m) {
  if (m == 0.0 && d <= 2) throw DomainError("stationary boundary needs d >= 3 or m > 0");
  cov_ = boundary_covariance(Box(d, N), m);
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success) throw DomainError("stationary boundary: covariance not positive definite");
}

std::vector<double> StationaryBoundarySampler::draw(double u, Philox& rng) const {
  const Eigen::Index n = cov_.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  const Eigen::VectorXd x = llt_.matrixL() * z;
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[std::size_t(i)] = u + x(i);
  return out;
}

std::shared_ptr<const StationaryBoundarySampler> stationary_boundary_sampler(int d, int N, double m) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::shared_ptr<const StationaryBoundarySampler>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(d, N, m);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto s = std::make_shared<const StationaryBoundarySampler>(d, N, m);
  cache.emplace(key, s);
  return s;
}

std::vector<double> sample_stationary_boundary(int N, double u, double m, int d, Philox& rng) {
  return stationary_boundary_sampler(d, N, m)->draw(u, rng);
}

// ---------------------------------------------------------------------------
// Field sampler with boundary

FieldSampler::FieldSampler(const Box& box, double m, double u)
    : box_(box), m_(m), u_(u), spectral_(box.dim(), box.edge(), m), solver_(box, m) {
  set_boundary(std::vector<double>(box.boundary().size(), m > 0.0 ? u : 0.0));
}

void FieldSampler::set_boundary(std::span<const double> bv) { mean_ = solver_.extend(bv, m_ > 0.0 ? u_ : 0.0); }

std::vector<double> FieldSampler::resolve(const BoundaryCondition& bc, Philox& rng) const {
  const std::size_t nb = box_.boundary().size();
  switch (bc.kind) {
    case BoundaryKind::constant: return std::vector<double>(nb, bc.u);
    case BoundaryKind::explicit_values:
      if (bc.values.size() != nb) throw DomainError("explicit boundary values do not cover the boundary");
      return bc.values;
    case BoundaryKind::stationary:
      return stationary_boundary_sampler(box_.dim(), box_.edge(), 0.0)->draw(bc.u, rng);
    case BoundaryKind::stationary_massive:
      return stationary_boundary_sampler(box_.dim(), box_.edge(), bc.m)->draw(bc.u, rng);
  }
  return {};
}

void FieldSampler::sample(Philox& rng, std::span<double> out) const {
  const auto& interior = box_.interior();
  std::vector<double> z(spectral_.size());
  spectral_.sample(rng, z);
  std::copy(mean_.begin(), mean_.end(), out.begin());
  for (std::size_t k = 0; k < interior.size(); ++k) out[interior[k]] += z[k];
}

FieldSample sample_with_boundary(const Box& box, const BoundaryCondition& bc, double m, double u, Philox& rng) {
  FieldSampler fs(box, m, u);
  fs.set_boundary(fs.resolve(bc, rng));
  FieldSample s{box, std::vector<double>(box.num_sites()), rng.key(), rng.stream()};
  fs.sample(rng, s.values);
  return s;
}

// ---------------------------------------------------------------------------
// Heat bath

double tilted_normal_log_mass(double mu, double s, std::span<const Piece> pieces) {
  double mx = -std::numeric_limits<double>::infinity();
  double lm[4];
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    lm[k] = pieces[k].log_weight + log_norm_interval((pieces[k].lo - mu) / s, (pieces[k].hi - mu) / s);
    mx = std::max(mx, lm[k]);
  }
  double t = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) t += std::exp(lm[k] - mx);
  return mx + std::log(t);
}

double sample_tilted_normal(double mu, double s, std::span<const Piece> pieces, Philox& rng) {
  double lm[4];
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    lm[k] = pieces[k].log_weight + log_norm_interval((pieces[k].lo - mu) / s, (pieces[k].hi - mu) / s);
    mx = std::max(mx, lm[k]);
  }
  double p[4], tot = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) tot += (p[k] = std::exp(lm[k] - mx));
  const double u1 = rng.uniform() * tot;
  std::size_t pick = pieces.size() - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    acc += p[k];
    if (u1 < acc && p[k] > 0.0) {
      pick = k;
      break;
    }
  }
  while (p[pick] == 0.0 && pick > 0) --pick;
  const double a = (pieces[pick].lo - mu) / s, b = (pieces[pick].hi - mu) / s;
  return mu + s * truncated_norm_quantile(a, b, rng.uniform());
}

void gibbs_sweep(FieldSample& state, const Interaction& inter, double m, double u, Philox& rng) {
  const Box& box = state.box;
  for (std::size_t x : inter.region)
    if (!std::isfinite(inter.coupling[x])) throw DomainError("gibbs_sweep: non-finite coupling");
  const int d = box.dim();
  const double prec = 2.0 * d + m * m;
  const double s = 1.0 / std::sqrt(prec);
  std::vector<std::size_t> nb;
  Piece pc[4];
  for (std::size_t x : box.interior()) {
    box.neighbors(x, nb);
    double acc = m * m * u;
    for (std::size_t y : nb) acc += state.values[y];
    const double mu = acc / prec;
    const int np = inter.pieces(x, pc);
    state.values[x] = sample_tilted_normal(mu, s, std::span<const Piece>(pc, std::size_t(np)), rng);
  }
}

void save_field_snapshot(const std::string& prefix, const FieldSample& s, double m, double u) {
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("cannot write snapshot: " + prefix);
  for (double v : s.values) {
    unsigned char b[8];
    std::memcpy(b, &v, 8);
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
    bin.write(reinterpret_cast<const char*>(b), 8);
  }
  nlohmann::json h;
  h["d"] = s.box.dim();
  h["N"] = s.box.edge();
  h["m"] = m;
  h["u"] = u;
  h["seed"] = s.seed;
  h["stream"] = s.stream;
  h["count"] = s.values.size();
  h["dtype"] = "float64-le";
  h["order"] = "row-major, axis 0 slowest, sites {0..N}^d";
  std::ofstream(prefix + ".json") << h.dump(2) << "\n";
}

}  // namespace gffpin

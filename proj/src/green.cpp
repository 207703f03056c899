#include "gffpin/green.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gffpin/errors.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/special.hpp"

namespace gffpin {

double SpectralBasis::eigenvector(int i, int k) const {
  return std::sqrt(2.0 / N) * std::sin(double(i) * double(k) * std::numbers::pi / double(N));
}

SpectralBasis spectral_basis(int N) {
  if (N < 2) throw DomainError("spectral_basis: N < 2");
  SpectralBasis b;
  b.N = N;
  const int n = N - 1;
  b.eigenvalues.resize(static_cast<std::size_t>(n));
  b.U.resize(n, n);
  const double c = std::sqrt(2.0 / N);
  for (int i = 1; i <= n; ++i) {
    const double s = std::sin(double(i) * std::numbers::pi / (2.0 * N));
    b.eigenvalues[std::size_t(i - 1)] = 4.0 * s * s;
    for (int k = 1; k <= n; ++k) {
      // reduce i*k mod 2N before taking the sine
      const long ik = (long(i) * long(k)) % (2L * N);
      b.U(i - 1, k - 1) = c * std::sin(double(ik) * std::numbers::pi / double(N));
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

double GreenTable::operator()(std::size_t x_idx, std::size_t y_idx) const {
  const auto sx = box.interior_slot(x_idx), sy = box.interior_slot(y_idx);
  if (sx < 0 || sy < 0) return 0.0;
  return g(sx, sy);
}

double GreenTable::at(const Site& x, const Site& y) const { return (*this)(box.index(x), box.index(y)); }

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat dirichlet_matrix(const Box& box, double m) {
  const auto& in = box.interior();
  const int d = box.dim();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(in.size() * std::size_t(2 * d + 1));
  std::vector<std::size_t> nb;
  for (std::size_t s = 0; s < in.size(); ++s) {
    trip.emplace_back(int(s), int(s), 2.0 * d + m * m);
    box.neighbors(in[s], nb);
    for (std::size_t y : nb) {
      const auto t = box.interior_slot(y);
      if (t >= 0) trip.emplace_back(int(s), int(t), -1.0);
    }
  }
  SpMat A(Eigen::Index(in.size()), Eigen::Index(in.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Eigen::MatrixXd kron_power(const Eigen::MatrixXd& U, int d) {
  Eigen::MatrixXd V = U;
  for (int a = 1; a < d; ++a) {
    Eigen::MatrixXd W(V.rows() * U.rows(), V.cols() * U.cols());
    for (Eigen::Index i = 0; i < V.rows(); ++i)
      for (Eigen::Index j = 0; j < V.cols(); ++j) W.block(i * U.rows(), j * U.cols(), U.rows(), U.cols()) = V(i, j) * U;
    V = std::move(W);
  }
  return V;
}

}  // namespace

GreenTable green_box(const Box& box, double m, GreenMethod method) {
  if (m < 0.0) throw DomainError("green_box: m < 0");
  const std::size_t n = box.interior().size();
  if (n > kDenseGreenGuard) throw ConfigError("green_box: interior too large for dense table");
  GreenTable t{box, m, Eigen::MatrixXd()};
  if (n == 0) return t;
  const int d = box.dim();
  if (method == GreenMethod::spectral) {
    const SpectralBasis b = spectral_basis(box.edge());
    // U is symmetric; V(k, x) = prod_a U(k_a, x_a) with the same row-major ordering.
    const Eigen::MatrixXd V = kron_power(b.U, d);
    const int n1 = box.edge() - 1;
    Eigen::VectorXd inv(Eigen::Index(n), 1);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t r = k;
      double lam = m * m;
      for (int a = 0; a < d; ++a) {
        lam += b.eigenvalues[r % std::size_t(n1)];
        r /= std::size_t(n1);
      }
      inv(Eigen::Index(k)) = 1.0 / lam;
    }
    t.g = V.transpose() * inv.asDiagonal() * V;
    t.g = 0.5 * (t.g + t.g.transpose()).eval();
  } else {
    const SpMat A = dirichlet_matrix(box, m);
    Eigen::SimplicialLLT<SpMat> llt(A);
    if (llt.info() != Eigen::Success) throw DomainError("green_box: factorisation failed");
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
    t.g = llt.solve(I);
    t.g = 0.5 * (t.g + t.g.transpose()).eval();
  }
  return t;
}

double green_box_entry(const Box& box, double m, const Site& x, const Site& y) {
  const int d = box.dim(), N = box.edge();
  const auto cx = box.classify(x), cy = box.classify(y);
  if (!cx.interior() || !cy.interior()) return 0.0;
  const SpectralBasis b = spectral_basis(N);
  const int n1 = N - 1;
  // prod[a][i] = U(i, x_a) U(i, y_a)
  std::vector<std::vector<double>> prod(static_cast<std::size_t>(d), std::vector<double>(std::size_t(n1)));
  for (int a = 0; a < d; ++a) {
    const int xa = x[std::size_t(a)] - box.offset()[std::size_t(a)];
    const int ya = y[std::size_t(a)] - box.offset()[std::size_t(a)];
    for (int i = 0; i < n1; ++i) prod[std::size_t(a)][std::size_t(i)] = b.U(i, xa - 1) * b.U(i, ya - 1);
  }
  // Recursive sum; innermost axis accumulated in a flat loop.
  std::function<double(int, double, double)> rec = [&](int a, double lam, double w) -> double {
    double s = 0.0;
    if (a == d - 1) {
      for (int i = 0; i < n1; ++i) s += w * prod[std::size_t(a)][std::size_t(i)] / (lam + b.eigenvalues[std::size_t(i)]);
      return s;
    }
    for (int i = 0; i < n1; ++i) {
      const double p = prod[std::size_t(a)][std::size_t(i)];
      if (p == 0.0) continue;
      s += rec(a + 1, lam + b.eigenvalues[std::size_t(i)], w * p);
    }
    return s;
  };
  return rec(0, m * m, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

// Coefficients c1, c2 of prod_i exp(-2t) I_{n_i}(2t) ~ (4 pi t)^{-d/2}(1 + c1/t + c2/t^2).
std::pair<double, double> tail_coefficients(std::span<const int> n) {
  double c1 = 0.0, c2 = 0.0;
  for (int ni : n) {
    const double mu = 4.0 * double(ni) * double(ni);
    const double b1 = -(mu - 1.0) / 16.0;
    const double b2 = (mu - 1.0) * (mu - 9.0) / 512.0;
    c2 += b2 + c1 * b1;
    c1 += b1;
  }
  return {c1, c2};
}

double massless_tail(int d, std::span<const int> n, double T) {
  const auto [c1, c2] = tail_coefficients(n);
  const double h = 0.5 * d;
  return std::pow(4.0 * std::numbers::pi, -h) *
         (std::pow(T, 1.0 - h) / (h - 1.0) + c1 * std::pow(T, -h) / h + c2 * std::pow(T, -h - 1.0) / (h + 1.0));
}

double tail_start(int nmax) { return std::max(1.0e5, 100.0 * double(nmax) * double(nmax)); }

}  // namespace

double green_infinite(int d, const Site& x, double m) {
  if (d < 1 || int(x.size()) != d) throw DomainError("green_infinite: bad dimension");
  if (m < 0.0) throw DomainError("green_infinite: m < 0");
  if (m == 0.0 && d <= 2) throw DomainError("green_infinite: no infinite-volume massless field for d <= 2");
  std::vector<int> n(static_cast<std::size_t>(d));
  double norm2 = 0.0;
  int nmax = 0;
  for (int i = 0; i < d; ++i) {
    n[std::size_t(i)] = std::abs(x[std::size_t(i)]);
    nmax = std::max(nmax, n[std::size_t(i)]);
    norm2 += double(n[std::size_t(i)]) * n[std::size_t(i)];
  }
  const double m2 = m * m;
  auto f = [&](double t) {
    double v = std::exp(-m2 * t);
    for (int ni : n) v *= bessel_i_scaled(ni, 2.0 * t);
    return v;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double tstar = std::max(1.0, std::sqrt(norm2));
  double err = 0.0;
  double total = GK::integrate(f, 0.0, tstar, 20, 1e-14, &err);
  double a = tstar;
  const double T_end = (m == 0.0) ? tail_start(nmax) : std::numeric_limits<double>::infinity();
  while (true) {
    const double b = 2.0 * a;
    total += GK::integrate(f, a, b, 20, 1e-14, &err);
    a = b;
    if (m == 0.0 && a >= T_end) break;
    if (m > 0.0 && m2 * a > 60.0) break;
  }
  if (m == 0.0) total += massless_tail(d, n, a);
  return total;
}

GreenWindow::GreenWindow(int d, int R, double m) : d_(d), R_(R), m_(m) {
  if (d < 1 || R < 0) throw DomainError("GreenWindow: bad arguments");
  if (m < 0.0) throw DomainError("GreenWindow: m < 0");
  if (m == 0.0 && d <= 2) throw DomainError("GreenWindow: no infinite-volume massless field for d <= 2");
  std::size_t count = 1;
  for (int i = 0; i < d; ++i) count *= std::size_t(R + 1);
  table_.assign(count, 0.0);
  // Sorted offset tuples 0 <= n_0 <= ... <= n_{d-1} <= R.
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  std::function<void(int, int)> gen = [&](int pos, int lo) {
    if (pos == d) {
      tuples.push_back(cur);
      return;
    }
    for (int v = lo; v <= R; ++v) {
      cur[std::size_t(pos)] = v;
      gen(pos + 1, v);
    }
  };
  gen(0, 0);
  std::vector<double> acc(tuples.size(), 0.0);
  const QuadRule base = gauss_legendre(24);
  std::vector<double> bes(std::size_t(R) + 1);
  const double m2 = m * m;
  auto panel = [&](double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < base.x.size(); ++q) {
      const double t = mid + half * base.x[q];
      const double w = half * base.w[q] * std::exp(-m2 * t);
      bessel_i_scaled_all(R, 2.0 * t, bes);
      for (std::size_t k = 0; k < tuples.size(); ++k) {
        double v = w;
        for (int ni : tuples[k]) v *= bes[std::size_t(ni)];
        acc[k] += v;
      }
    }
  };
  panel(0.0, 0.125);
  double a = 0.125;
  const double T_end = (m == 0.0) ? tail_start(R) : std::numeric_limits<double>::infinity();
  while (true) {
    // split each doubling into two sub-panels for resolution at small t
    panel(a, 1.5 * a);
    panel(1.5 * a, 2.0 * a);
    a *= 2.0;
    if (m == 0.0 && a >= T_end) break;
    if (m > 0.0 && m2 * a > 60.0) break;
  }
  for (std::size_t k = 0; k < tuples.size(); ++k) {
    if (m == 0.0) acc[k] += massless_tail(d, tuples[k], a);
    // scatter to every permutation
    std::vector<int> p = tuples[k];
    do {
      table_[slot(p)] = acc[k];
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

std::size_t GreenWindow::slot(std::span<const int> offset) const {
  std::size_t s = 0;
  for (int i = 0; i < d_; ++i) {
    const int v = std::abs(offset[std::size_t(i)]);
    if (v > R_) throw DomainError("GreenWindow: offset outside window");
    s = s * std::size_t(R_ + 1) + std::size_t(v);
  }
  return s;
}

double GreenWindow::at(std::span<const int> offset) const { return table_[slot(offset)]; }

double GreenWindow::at(const Site& x, const Site& y) const {
  std::vector<int> off(static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i) off[std::size_t(i)] = x[std::size_t(i)] - y[std::size_t(i)];
  return at(off);
}

// ---------------------------------------------------------------------------

struct DirichletSolver::Impl {
  Eigen::SimplicialLLT<SpMat> llt;
};

DirichletSolver::DirichletSolver(const Box& box, double m) : box_(box), m_(m), impl_(std::make_unique<Impl>()) {
  if (m < 0.0) throw DomainError("DirichletSolver: m < 0");
  if (!box.interior().empty()) {
    impl_->llt.compute(dirichlet_matrix(box, m));
    if (impl_->llt.info() != Eigen::Success) throw DomainError("DirichletSolver: factorisation failed");
  }
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd& rhs) const {
  if (box_.interior().empty()) return Eigen::VectorXd();
  return impl_->llt.solve(rhs);
}

std::vector<double> DirichletSolver::extend(std::span<const double> bv, double u) const {
  const auto& bd = box_.boundary();
  if (bv.size() != bd.size()) throw DomainError("harmonic_extension: boundary values do not cover the boundary");
  std::vector<double> out(box_.num_sites(), 0.0);
  for (std::size_t k = 0; k < bd.size(); ++k) out[bd[k]] = bv[k];
  const auto& in = box_.interior();
  if (in.empty()) return out;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(Eigen::Index(in.size()));
  std::vector<std::size_t> nb;
  for (std::size_t s = 0; s < in.size(); ++s) {
    box_.neighbors(in[s], nb);
    for (std::size_t y : nb) {
      const auto k = box_.boundary_slot(y);
      if (k >= 0) rhs(Eigen::Index(s)) += bv[std::size_t(k)] - u;
    }
  }
  const Eigen::VectorXd h = solve(rhs);
  for (std::size_t s = 0; s < in.size(); ++s) out[in[s]] = u + h(Eigen::Index(s));
  return out;
}

std::vector<double> poisson_kernel(const Box& box, const Site& x, double m) {
  const std::size_t xi = box.index(x);
  const auto& bd = box.boundary();
  std::vector<double> p(bd.size(), 0.0);
  if (box.is_boundary(xi)) {
    p[std::size_t(box.boundary_slot(xi))] = 1.0;
    return p;
  }
  DirichletSolver solver(box, m);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(Eigen::Index(box.interior().size()));
  e(box.interior_slot(xi)) = 1.0;
  const Eigen::VectorXd w = solver.solve(e);
  std::vector<std::size_t> nb;
  for (std::size_t k = 0; k < bd.size(); ++k) {
    box.neighbors(bd[k], nb);
    for (std::size_t y : nb) {
      const auto s = box.interior_slot(y);
      if (s >= 0) p[k] += w(s);
    }
  }
  return p;
}

std::vector<double> harmonic_extension(const Box& box, std::span<const double> bv, double m, double u) {
  return DirichletSolver(box, m).extend(bv, u);
}

double harmonic_residual(const Box& box, std::span<const double> field, double m, double u) {
  double worst = 0.0;
  std::vector<std::size_t> nb;
  const int d = box.dim();
  for (std::size_t x : box.interior()) {
    box.neighbors(x, nb);
    double r = (2.0 * d + m * m) * (field[x] - u);
    for (std::size_t y : nb) r -= field[y] - u;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

Eigen::MatrixXd boundary_covariance(const Box& box, double m) {
  const auto& bd = box.boundary();
  const GreenWindow win(box.dim(), box.edge(), m);
  const Eigen::Index n = Eigen::Index(bd.size());
  Eigen::MatrixXd G(n, n);
  std::vector<int> ci(std::size_t(box.dim())), cj(std::size_t(box.dim())), off(std::size_t(box.dim()));
  for (Eigen::Index i = 0; i < n; ++i) {
    box.local_coords(bd[std::size_t(i)], ci);
    for (Eigen::Index j = 0; j <= i; ++j) {
      box.local_coords(bd[std::size_t(j)], cj);
      for (int a = 0; a < box.dim(); ++a) off[std::size_t(a)] = ci[std::size_t(a)] - cj[std::size_t(a)];
      G(i, j) = G(j, i) = win.at(off);
    }
  }
  return G;
}

double harmonic_variance(const Box& box, const Site& x, const Eigen::MatrixXd& gamma, double m) {
  const auto n = Eigen::Index(box.boundary().size());
  if (gamma.rows() != n || gamma.cols() != n) throw DomainError("harmonic_variance: covariance size mismatch");
  Eigen::MatrixXd shifted = gamma + 1e-8 * Eigen::MatrixXd::Identity(n, n);
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) throw DomainError("harmonic_variance: covariance not positive semidefinite");
  const std::vector<double> p = poisson_kernel(box, x, m);
  const Eigen::Map<const Eigen::VectorXd> pv(p.data(), n);
  return pv.dot(gamma * pv);
}

// ---------------------------------------------------------------------------

double fit_green_bound_constant(int d, int radius) {
  const GreenWindow win(d, radius, 0.0);
  double c = 0.0;
  std::vector<int> x(static_cast<std::size_t>(d), 0);
  std::size_t count = 1;
  for (int i = 0; i < d; ++i) count *= std::size_t(radius + 1);
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t r = k;
    double n2 = 0.0;
    for (int i = d - 1; i >= 0; --i) {
      x[std::size_t(i)] = int(r % std::size_t(radius + 1));
      r /= std::size_t(radius + 1);
      n2 += double(x[std::size_t(i)]) * x[std::size_t(i)];
    }
    const double nx = std::sqrt(n2);
    if (nx > radius) continue;
    c = std::max(c, win.at(x) * (1.0 + std::pow(nx, d - 2)));
  }
  return c;
}

GreenSumResult green_sum_sup(int d, int R, int kappa) {
  if (d < 3) throw DomainError("green_sum_sup: needs d >= 3");
  if (kappa < 1 || R < 0) throw ConfigError("green_sum_sup: bad arguments");
  const int w = 2 * R + 1;
  std::size_t nsite = 1;
  for (int i = 0; i < d; ++i) nsite *= std::size_t(w);
  // Number of subsets, checked against the budget before enumerating.
  double combos = 1.0;
  for (int k = 0; k < kappa; ++k) combos = combos * double(nsite - std::size_t(k)) / double(k + 1);
  if (kappa > int(nsite) || combos > double(kGreenSumBudget))
    throw ConfigError("green_sum_sup: combinatorial budget exceeded");
  const GreenWindow win(d, 2 * R, 0.0);
  std::vector<Site> sites(nsite, Site(std::size_t(d)));
  for (std::size_t k = 0; k < nsite; ++k) {
    std::size_t r = k;
    for (int i = d - 1; i >= 0; --i) {
      sites[k][std::size_t(i)] = int(r % std::size_t(w)) - R;
      r /= std::size_t(w);
    }
  }
  Eigen::MatrixXd G{Eigen::Index(nsite), Eigen::Index(nsite)};
  for (std::size_t i = 0; i < nsite; ++i)
    for (std::size_t j = 0; j < nsite; ++j) G(Eigen::Index(i), Eigen::Index(j)) = win.at(sites[i], sites[j]);

  GreenSumResult res;
  res.value = -1.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(kappa));
  for (int k = 0; k < kappa; ++k) idx[std::size_t(k)] = std::size_t(k);
  while (true) {
    double s = 0.0;
    for (std::size_t a : idx)
      for (std::size_t b : idx) s += G(Eigen::Index(a), Eigen::Index(b));
    ++res.subsets;
    if (s > res.value + 1e-15) {
      res.value = s;
      res.set.clear();
      for (std::size_t a : idx) res.set.push_back(sites[a]);
    }
    int k = kappa - 1;
    while (k >= 0 && idx[std::size_t(k)] == nsite - std::size_t(kappa - k)) --k;
    if (k < 0) break;
    ++idx[std::size_t(k)];
    for (int j = k + 1; j < kappa; ++j) idx[std::size_t(j)] = idx[std::size_t(j - 1)] + 1;
  }
  res.c_d = fit_green_bound_constant(d, 10);
  res.bound = std::pow(2.0, d + 4) * res.c_d * std::pow(double(kappa), 1.0 + 2.0 / d);
  return res;
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
bool get_le(std::istream& is, T& v) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  std::memcpy(&v, b, sizeof(T));
  return true;
}

constexpr char kMagic[8] = {'G', 'F', 'F', 'G', 'R', 'E', 'E', 'N'};
constexpr std::uint32_t kLayoutVersion = 1;

}  // namespace

std::uint64_t green_cache_hash() { return hash_tag("gffpin green table v1 spectral"); }

void save_green_table(const std::string& path, const GreenTable& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write green cache: " + path);
  os.write(kMagic, 8);
  put_le<std::uint32_t>(os, kLayoutVersion);
  put_le<std::uint64_t>(os, green_cache_hash());
  put_le<std::uint32_t>(os, std::uint32_t(t.box.dim()));
  put_le<std::uint32_t>(os, std::uint32_t(t.box.edge()));
  put_le<double>(os, t.mass);
  put_le<std::uint64_t>(os, std::uint64_t(t.g.rows()));
  for (Eigen::Index i = 0; i < t.g.rows(); ++i)
    for (Eigen::Index j = 0; j < t.g.cols(); ++j) put_le<double>(os, t.g(i, j));
}

std::optional<GreenTable> load_green_table(const std::string& path, int d, int N, double m) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
  std::uint32_t ver = 0, dd = 0, nn = 0;
  std::uint64_t hash = 0, n = 0;
  double mm = 0.0;
  if (!get_le(is, ver) || !get_le(is, hash) || !get_le(is, dd) || !get_le(is, nn) || !get_le(is, mm) || !get_le(is, n))
    return std::nullopt;
  if (ver != kLayoutVersion || hash != green_cache_hash() || int(dd) != d || int(nn) != N || mm != m) return std::nullopt;
  GreenTable t{Box(d, N), m, Eigen::MatrixXd(Eigen::Index(n), Eigen::Index(n))};
  if (t.box.interior().size() != n) return std::nullopt;
  for (Eigen::Index i = 0; i < t.g.rows(); ++i)
    for (Eigen::Index j = 0; j < t.g.cols(); ++j)
      if (!get_le(is, t.g(i, j))) return std::nullopt;
  return t;
}

}  // namespace gffpin

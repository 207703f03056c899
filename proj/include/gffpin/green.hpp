#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gffpin/lattice.hpp"

namespace gffpin {

// Sine eigenbasis of the one-dimensional Dirichlet Laplacian on {0..N}.
struct SpectralBasis {
  int N = 0;
  std::vector<double> eigenvalues;  // lambda_i, i = 1..N-1 stored at i-1
  Eigen::MatrixXd U;                // U(i-1, k-1) = sqrt(2/N) sin(i k pi / N)

  double eigenvalue(int i) const { return eigenvalues[std::size_t(i - 1)]; }
  double eigenvector(int i, int k) const;
};

SpectralBasis spectral_basis(int N);

enum class GreenMethod { spectral, direct };

// Dense G^m_Lambda over interior sites, indexed by interior slot.
struct GreenTable {
  Box box;
  double mass = 0.0;
  Eigen::MatrixXd g;

  double operator()(std::size_t x_idx, std::size_t y_idx) const;
  double at(const Site& x, const Site& y) const;
};

inline constexpr std::size_t kDenseGreenGuard = 100000;

GreenTable green_box(const Box& box, double m, GreenMethod method = GreenMethod::spectral);
// Single entry via the separable eigen-expansion, no dense table.
double green_box_entry(const Box& box, double m, const Site& x, const Site& y);

// Infinite-volume (massive) Green function G^m(0, x), adaptive panels.
double green_infinite(int d, const Site& x, double m);

// G^m(0, x) for all |x_i| <= R, computed in one pass over a fixed rule.
class GreenWindow {
 public:
  GreenWindow(int d, int R, double m);
  int dim() const { return d_; }
  int radius() const { return R_; }
  double mass() const { return m_; }
  double at(std::span<const int> offset) const;
  double at(const Site& x, const Site& y) const;

 private:
  std::size_t slot(std::span<const int> offset) const;
  int d_, R_;
  double m_;
  std::vector<double> table_;
};

// Sparse Cholesky of (-Delta + m^2) on the interior of a box.
class DirichletSolver {
 public:
  DirichletSolver(const Box& box, double m);
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  const Box& box() const { return box_; }
  double mass() const { return m_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  // Interior mean u + H_m[phihat - u]; boundary values in box.boundary() order.
  std::vector<double> extend(std::span<const double> boundary_values, double u) const;

 private:
  struct Impl;
  Box box_;
  double m_;
  std::unique_ptr<Impl> impl_;
};

// Hitting weights on box.boundary(); a boundary x yields the delta at x.
std::vector<double> poisson_kernel(const Box& box, const Site& x, double m);

// Values on all sites: boundary copied, interior u + H_m[phihat - u].
std::vector<double> harmonic_extension(const Box& box, std::span<const double> boundary_values, double m,
                                       double u = 0.0);
// Max |(-Delta + m^2)(H - u)| over interior sites of a full field.
double harmonic_residual(const Box& box, std::span<const double> field, double m, double u);

// Restriction of the infinite-volume Green matrix to the boundary of a box.
Eigen::MatrixXd boundary_covariance(const Box& box, double m);

double harmonic_variance(const Box& box, const Site& x, const Eigen::MatrixXd& gamma, double m = 0.0);

struct GreenSumResult {
  std::vector<Site> set;
  double value = 0.0;
  double bound = 0.0;
  double c_d = 0.0;
  std::uint64_t subsets = 0;
};

inline constexpr std::uint64_t kGreenSumBudget = 50'000'000;

double fit_green_bound_constant(int d, int radius);
GreenSumResult green_sum_sup(int d, int R, int kappa);

// Binary cache. Layout (little-endian): "GFFGREEN", u32 layout version,
// u64 code hash, u32 d, u32 N, f64 m, u64 n, then n*n f64 row-major.
std::uint64_t green_cache_hash();
void save_green_table(const std::string& path, const GreenTable& t);
std::optional<GreenTable> load_green_table(const std::string& path, int d, int N, double m);

}  // namespace gffpin

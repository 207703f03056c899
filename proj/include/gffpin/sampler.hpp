#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gffpin/green.hpp"
#include "gffpin/interaction.hpp"
#include "gffpin/lattice.hpp"
#include "gffpin/rng.hpp"

namespace gffpin {

struct FieldSample {
  Box box;
  std::vector<double> values;  // all sites, canonical order
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

enum class BoundaryKind { constant, explicit_values, stationary, stationary_massive };

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::constant;
  double u = 0.0;
  double m = 0.0;              // stationary_massive only
  std::vector<double> values;  // explicit_values only, box.boundary() order

  static BoundaryCondition constant(double u);
  static BoundaryCondition explicit_values(std::vector<double> v);
  static BoundaryCondition stationary(double u);
  static BoundaryCondition stationary_massive(double u, double m);
  bool random() const { return kind == BoundaryKind::stationary || kind == BoundaryKind::stationary_massive; }
  std::string describe() const;
};

// Zero-boundary (massive) field on the interior via independent sine coefficients.
class SpectralSampler {
 public:
  SpectralSampler(int d, int N, double m);
  int dim() const { return d_; }
  int edge() const { return N_; }
  std::size_t size() const { return n_; }
  // Interior values in interior-slot order; coefficients optionally returned.
  void sample(Philox& rng, std::span<double> out, std::vector<double>* coeffs = nullptr) const;
  // Apply the orthonormal d-dimensional sine transform in place.
  void transform(std::span<double> data) const;
  bool uses_fft() const { return N_ >= 64; }

 private:
  void transform_line(double* line) const;
  int d_, N_;
  double m_;
  std::size_t n_;
  std::vector<double> sd_;
  Eigen::MatrixXd U_;
};

FieldSample sample_zero_boundary(int N, int d, double m, Philox& rng);

// Cholesky factor of the infinite-volume Green matrix on a box boundary.
class StationaryBoundarySampler {
 public:
  StationaryBoundarySampler(int d, int N, double m);
  std::vector<double> draw(double u, Philox& rng) const;
  const Eigen::MatrixXd& covariance() const { return cov_; }
  Eigen::MatrixXd factor() const { return llt_.matrixL(); }

 private:
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Process-wide cache keyed by (d, N, m); safe to call from worker threads.
std::shared_ptr<const StationaryBoundarySampler> stationary_boundary_sampler(int d, int N, double m);

std::vector<double> sample_stationary_boundary(int N, double u, double m, int d, Philox& rng);

// Reference field law P^{phihat} with mass m recentred at u.
class FieldSampler {
 public:
  FieldSampler(const Box& box, double m, double u);
  const Box& box() const { return box_; }
  double mass() const { return m_; }
  double centre() const { return u_; }
  void set_boundary(std::span<const double> boundary_values);
  // Boundary draw for a condition; constant and explicit kinds are deterministic.
  std::vector<double> resolve(const BoundaryCondition& bc, Philox& rng) const;
  const std::vector<double>& mean() const { return mean_; }
  void sample(Philox& rng, std::span<double> out) const;

 private:
  Box box_;
  double m_, u_;
  SpectralSampler spectral_;
  DirichletSolver solver_;
  std::vector<double> mean_;
};

FieldSample sample_with_boundary(const Box& box, const BoundaryCondition& bc, double m, double u, Philox& rng);

// Heat-bath kernel: N(mu, s^2) reweighted by a piecewise potential.
double tilted_normal_log_mass(double mu, double s, std::span<const Piece> pieces);
double sample_tilted_normal(double mu, double s, std::span<const Piece> pieces, Philox& rng);

// One sweep over the interior in canonical order.
void gibbs_sweep(FieldSample& state, const Interaction& inter, double m, double u, Philox& rng);

struct ChainSpec {
  int burn_in = 100;
  int thin = 10;
  int n_samples = 200;
};

// Flat little-endian f64 values plus a JSON header next to it.
void save_field_snapshot(const std::string& prefix, const FieldSample& s, double m, double u);

}  // namespace gffpin

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"

#include "gffpin/green.hpp"

using namespace gffpin;

namespace {

// (-Delta + m^2)^{-1} on the interior by dense inversion.
Eigen::MatrixXd brute_green(const Box& b, double m) {
  const auto& in = b.interior();
  const Eigen::Index n = Eigen::Index(in.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::size_t> nb;
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, i) = 2.0 * b.dim() + m * m;
    b.neighbors(in[std::size_t(i)], nb);
    for (std::size_t y : nb) {
      const auto j = b.interior_slot(y);
      if (j >= 0) A(i, j) = -1.0;
    }
  }
  return A.inverse();
}

}  // namespace

TEST_CASE("one-dimensional Green function is the tent function") {
  const int N = 9;
  const GreenTable t = green_box(Box(1, N), 0.0);
  for (int x = 1; x < N; ++x)
    for (int y = 1; y < N; ++y) {
      const double want = double(std::min(x, y)) * (N - std::max(x, y)) / N;
      CHECK(t.at(Site{x}, Site{y}) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("box Green table equals the inverse Laplacian") {
  for (double m : {0.0, 0.3}) {
    const Box b(2, 5);
    const Eigen::MatrixXd want = brute_green(b, m);
    for (auto method : {GreenMethod::spectral, GreenMethod::direct}) {
      const GreenTable t = green_box(b, m, method);
      CHECK((t.g - want).cwiseAbs().maxCoeff() < 1e-12);
    }
    const Box b3(3, 4);
    const GreenTable t3 = green_box(b3, m);
    CHECK((t3.g - brute_green(b3, m)).cwiseAbs().maxCoeff() < 1e-12);
    const Site x{1, 2, 2}, y{3, 1, 2};
    CHECK(green_box_entry(b3, m, x, y) == doctest::Approx(t3.at(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("spectral basis is orthonormal with eigenvalues in (0, 4)") {
  const SpectralBasis s = spectral_basis(12);
  const Eigen::MatrixXd I = s.U.transpose() * s.U;
  CHECK((I - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 1; i < 12; ++i) {
    CHECK(s.eigenvalue(i) > 0.0);
    CHECK(s.eigenvalue(i) < 4.0);
    if (i > 1) CHECK(s.eigenvalue(i) > s.eigenvalue(i - 1));
  }
}

TEST_CASE("infinite-volume Green function closed forms") {
  // d = 1 massive: 1 / sqrt(m^4 + 4 m^2).
  for (double m : {0.1, 1.0}) CHECK(green_infinite(1, Site{0}, m) == doctest::Approx(1 / std::sqrt(std::pow(m, 4) + 4 * m * m)).epsilon(1e-10));
  // d = 1 off-diagonal: r^|x| / sqrt(a^2 - 4), r the small root of r^2 - a r + 1.
  const double m = 0.5, a = 2 + m * m, r = (a - std::sqrt(a * a - 4)) / 2;
  CHECK(green_infinite(1, Site{3}, m) == doctest::Approx(std::pow(r, 3) / std::sqrt(a * a - 4)).epsilon(1e-10));
  // Watson's integral for the simple cubic lattice, divided by 2d.
  const double watson = 1.5163860591519780;
  CHECK(green_infinite(3, Site{0, 0, 0}, 0.0) == doctest::Approx(watson / 6).epsilon(1e-9));
  // Harmonicity away from the origin.
  const double g0 = green_infinite(3, Site{0, 0, 0}, 0.0);
  CHECK(6 * g0 - 6 * green_infinite(3, Site{1, 0, 0}, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Green window agrees with pointwise evaluation") {
  const GreenWindow w(3, 2, 0.0);
  for (const Site& x : {Site{0, 0, 0}, Site{1, 0, 0}, Site{2, 1, -1}})
    CHECK(w.at(x, Site{0, 0, 0}) == doctest::Approx(green_infinite(3, x, 0.0)).epsilon(1e-8));
}

TEST_CASE("Poisson kernel is a probability and reproduces harmonic functions") {
  const Box b(2, 6);
  const auto k = poisson_kernel(b, Site{2, 3}, 0.0);
  double s = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    CHECK(k[i] >= -1e-14);
    s += k[i];
    const Site y = b.site(b.boundary()[i]);
    lin += k[i] * (2.0 * y[0] - y[1]);
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin == doctest::Approx(2.0 * 2 - 3).epsilon(1e-12));
  // Massive kernel loses mass.
  double sm = 0.0;
  for (double v : poisson_kernel(b, Site{2, 3}, 0.5)) sm += v;
  CHECK(sm < 1.0);
}

TEST_CASE("harmonic extension solves the Dirichlet problem") {
  const Box b(3, 5);
  std::vector<double> bv(b.boundary().size());
  for (std::size_t i = 0; i < bv.size(); ++i) bv[i] = std::sin(double(i));
  for (double m : {0.0, 0.4}) {
    const auto f = harmonic_extension(b, bv, m, 0.7);
    CHECK(harmonic_residual(b, f, m, 0.7) < 1e-10);
  }
}

TEST_CASE("planar diagonal grows like log N / (2 pi)") {
  const double a = green_box_entry(Box(2, 64), 0.0, Site{32, 32}, Site{32, 32});
  const double b = green_box_entry(Box(2, 128), 0.0, Site{64, 64}, Site{64, 64});
  CHECK((b - a) / std::log(2.0) == doctest::Approx(1 / (2 * std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("Green table cache round trip and mismatch rejection") {
  const auto dir = std::filesystem::temp_directory_path() / "gffpin_test_cache";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "g.bin").string();
  const GreenTable t = green_box(Box(2, 6), 0.2);
  save_green_table(path, t);
  const auto back = load_green_table(path, 2, 6, 0.2);
  REQUIRE(back.has_value());
  CHECK((back->g - t.g).cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(load_green_table(path, 2, 7, 0.2).has_value());
  CHECK_FALSE(load_green_table(path, 2, 6, 0.3).has_value());
  CHECK_FALSE(load_green_table((dir / "missing.bin").string(), 2, 6, 0.2).has_value());
}

TEST_CASE("boundary covariance is symmetric positive definite") {
  const Eigen::MatrixXd c = boundary_covariance(Box(3, 3), 0.0);
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(c).info() == Eigen::Success);
}

TEST_CASE("small Green-sum supremum respects its bound") {
  const GreenSumResult r = green_sum_sup(3, 1, 2);
  CHECK(r.subsets > 0);
  CHECK(r.value <= r.bound);
}

TEST_CASE("single-site Green sum is the diagonal") {
  CHECK(green_sum_sup(3, 1, 1).value == doctest::Approx(green_infinite(3, Site{0, 0, 0}, 0.0)).epsilon(1e-8));
}

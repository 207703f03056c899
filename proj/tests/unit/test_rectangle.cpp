#include <cmath>
#include <vector>

#include "doctest.h"

#include "gffpin/rectangle.hpp"
#include "gffpin/special.hpp"

using namespace gffpin;

namespace {

// Bivariate standard normal with correlation r on [-1,1]^2, composite Simpson in x.
double bivariate_square(double r) {
  const int n = 4000;
  const double h = 2.0 / n, s = std::sqrt(1 - r * r);
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -1.0 + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * norm_pdf(x) * norm_interval((-1 - r * x) / s, (1 - r * x) / s);
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("one-dimensional rectangle is an interval probability") {
  Eigen::VectorXd mu(1);
  mu << 0.3;
  Eigen::MatrixXd S(1, 1);
  S << 2.0;
  const double lo[] = {-1.0}, hi[] = {1.0};
  CHECK(rectangle_probability(mu, S, lo, hi) == doctest::Approx(gauss_interval(0.3, std::sqrt(2.0), -1, 1)).epsilon(1e-12));
}

TEST_CASE("independent coordinates factorise") {
  Eigen::VectorXd mu(3);
  mu << 0.0, 1.0, -0.5;
  const Eigen::MatrixXd S = Eigen::Vector3d(1.0, 0.5, 2.0).asDiagonal();
  const double lo[] = {-1, -1, -1}, hi[] = {1, 1, 1};
  double want = 1.0;
  for (int i = 0; i < 3; ++i) want *= gauss_interval(mu(i), std::sqrt(S(i, i)), -1, 1);
  CHECK(rectangle_probability(mu, S, lo, hi) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("correlated pair matches direct integration") {
  for (double r : {-0.6, 0.3, 0.9}) {
    Eigen::MatrixXd S(2, 2);
    S << 1, r, r, 1;
    const double lo[] = {-1, -1}, hi[] = {1, 1};
    CHECK(rectangle_probability(Eigen::Vector2d::Zero(), S, lo, hi) == doctest::Approx(bivariate_square(r)).epsilon(1e-8));
  }
}

TEST_CASE("contact pattern law sums to one and reproduces expectations") {
  Eigen::MatrixXd S(3, 3);
  S << 1.0, 0.4, 0.1, 0.4, 1.2, 0.3, 0.1, 0.3, 0.9;
  const Eigen::Vector3d mu(0.2, -0.1, 0.5);
  const ContactPatternTable t(mu, S);
  double total = 0.0;
  for (double p : t.patterns()) {
    CHECK(p >= -1e-12);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.rect(0) == doctest::Approx(1.0));
  const std::vector<double> zeta{0.3, -0.2, 0.7};
  std::vector<double> xi(3);
  for (int i = 0; i < 3; ++i) xi[std::size_t(i)] = std::expm1(zeta[std::size_t(i)]);
  CHECK(t.pattern_expectation(zeta) == doctest::Approx(t.subset_expansion(xi)).epsilon(1e-12));
  // Marginal of site 0 is a one-dimensional interval.
  double m0 = 0.0;
  for (std::uint32_t mask = 0; mask < 8; ++mask)
    if (mask & 1u) m0 += t.patterns()[mask];
  CHECK(m0 == doctest::Approx(gauss_interval(0.2, 1.0, -1, 1)).epsilon(1e-10));
}

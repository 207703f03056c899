#include <cmath>
#include <vector>

#include "doctest.h"

#include "gffpin/bounds.hpp"
#include "gffpin/comembrane.hpp"
#include "gffpin/green.hpp"

using namespace gffpin;

TEST_CASE("critical curve") {
  for (double rho : {0.1, 0.5, 2.0}) {
    CHECK(critical_curve(DisorderLaw::gaussian(), rho) == rho);
    CHECK(critical_curve(DisorderLaw::rademacher(), rho) ==
          doctest::Approx(std::log(std::cosh(2 * rho)) / (2 * rho)).epsilon(1e-14));
  }
}

TEST_CASE("sign and delta energies differ by a field-independent constant") {
  CoMembraneParams p;
  p.d = 2;
  p.N = 4;
  p.rho = 0.7;
  p.h = 0.2;
  const Box b = p.box();
  const auto om = sample_disorder(p.law, b.tilde(), StreamKey{1, 2, 3, 4}).omega;
  double shift = 0.0;
  for (double w : om) shift += p.rho * (w + p.h);
  Philox rng(1, 1);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> f(b.num_sites());
    for (auto& x : f) x = rng.normal();
    CHECK(comembrane_sign_energy(f, om, p) - comembrane_energy(f, om, p) == doctest::Approx(shift).epsilon(1e-12));
  }
}

TEST_CASE("delta energy rewards negative sites") {
  CoMembraneParams p;
  p.d = 1;
  p.N = 3;
  p.rho = 0.5;
  p.h = 0.0;
  const std::vector<double> om{1.0, 2.0, 3.0};
  std::vector<double> f{0.0, -1.0, 1.0, 1.0};
  CHECK(comembrane_energy(f, om, p) == doctest::Approx(-2 * 0.5 * 1.0));
}

TEST_CASE("below-tail ratio tends to one") {
  const double s = std::sqrt(green_infinite(3, Site{0, 0, 0}, 0.0));
  CHECK(below_tail_check(1.0, 1e-6, s, 0.0) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("constant boundary far above zero gives zero free energy") {
  CoMembraneParams p;
  p.d = 3;
  p.N = 4;
  p.rho = 0.5;
  p.h = 3.0;
  p.bc = BoundaryCondition::constant(50.0);
  const QuenchedResult q = comembrane_free_energy(p, 2, 20, StreamKey{1, 1, 0, 0});
  CHECK(q.free_energy.mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("measure equivalence on a tiny system") {
  CoMembraneParams p;
  p.d = 2;
  p.N = 3;
  p.rho = 0.5;
  p.h = 0.1;
  const auto om = sample_disorder(p.law, p.box().tilde(), StreamKey{2, 2, 0, 0}).omega;
  const MeasureEquivalence m = measure_equivalence(p, om, ChainSpec{100, 2, 3000}, StreamKey{3, 3, 0, 0});
  CHECK(m.max_energy_defect < 1e-10);
  CHECK(std::abs(m.z_below) < 4.0);
  CHECK(std::abs(m.z_mean) < 4.0);
}

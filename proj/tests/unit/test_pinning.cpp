#include <cmath>
#include <vector>

#include "doctest.h"

#include "gffpin/errors.hpp"
#include "gffpin/green.hpp"
#include "gffpin/pinning.hpp"
#include "gffpin/special.hpp"

using namespace gffpin;

namespace {

PinningParams small(int d, int N, double beta, double h) {
  PinningParams p;
  p.d = d;
  p.N = N;
  p.beta = beta;
  p.h = h;
  return p;
}

std::vector<double> omega_for(const PinningParams& p, std::uint64_t seed) {
  return sample_disorder(p.law, p.box().region(p.region), StreamKey{seed, 1, 0, 0}).omega;
}

}  // namespace

TEST_CASE("couplings and energy") {
  PinningParams p = small(1, 4, 0.5, 0.2);
  const std::vector<double> om{1.0, -1.0, 0.0, 2.0};
  const auto c = p.couplings(om);
  const Box b = p.box();
  const auto& reg = b.tilde();
  for (std::size_t i = 0; i < reg.size(); ++i)
    CHECK(c[reg[i]] == doctest::Approx(0.5 * om[i] - 0.125 + 0.2));
  CHECK(c[0] == 0.0);
  std::vector<double> field(b.num_sites(), 5.0);
  field[1] = 0.5;  // contact at site 1 only
  CHECK(pinning_energy(field, om, p) == doctest::Approx(c[1]));
}

TEST_CASE("parameter validation") {
  PinningParams p = small(3, 8, -0.1, 0.0);
  CHECK_THROWS(p.validate());
  p = small(3, 1, 0.5, 0.0);
  CHECK_THROWS(p.validate());
  p = small(3, 8, 0.5, 0.0);
  p.m = -1.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("zero coupling gives Z = 1 on every route") {
  PinningParams p = small(1, 5, 0.0, 0.0);
  const std::vector<double> om(5, 0.0);
  CHECK(partition_exact_small(p, om).z == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(partition_transfer_1d(p, om).z == doctest::Approx(1.0).epsilon(1e-8));
  Philox rng(1, 1);
  const PartitionEstimate e = partition_mc(p, om, 50, rng);
  CHECK(e.z.mean == doctest::Approx(1.0));
  CHECK(e.log_z.mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single interior site has a closed form") {
  // d = 1, N = 2, sum region = interior: one Gaussian site of variance 1/2.
  PinningParams p = small(1, 2, 0.0, 0.7);
  p.region = SumRegion::interior;
  const std::vector<double> om{0.0};
  const double q = gauss_interval(0.0, std::sqrt(0.5), -1, 1);
  const double want = 1 + std::expm1(0.7) * q;
  CHECK(partition_exact_small(p, om).z == doctest::Approx(want).epsilon(1e-12));
  CHECK(partition_transfer_1d(p, om).z == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("exact oracle and transfer operator agree in one dimension") {
  for (std::uint64_t s = 1; s <= 4; ++s) {
    PinningParams p = small(1, 6, 0.3 + 0.2 * double(s), 0.1 * double(s) - 0.2);
    p.bc = BoundaryCondition::constant(0.4 * double(s) - 1.0);
    const auto om = omega_for(p, s);
    CHECK(partition_exact_small(p, om).z == doctest::Approx(partition_transfer_1d(p, om).z).epsilon(1e-6));
  }
}

TEST_CASE("Monte Carlo brackets the exact value") {
  PinningParams p = small(2, 3, 0.6, 0.2);
  const auto om = omega_for(p, 9);
  const double z = partition_exact_small(p, om).z;
  Philox rng(3, 3);
  const PartitionEstimate e = partition_mc(p, om, 20000, rng);
  CHECK(std::abs(e.z.mean - z) < 4 * e.z.std_error);
  CHECK(std::abs(e.log_z.mean - std::log(z)) < 4 * e.log_z.std_error);
}

TEST_CASE("log Z is nondecreasing in h") {
  PinningParams p = small(1, 5, 0.5, -0.3);
  const auto om = omega_for(p, 2);
  double prev = -1e300;
  for (double h = -0.3; h <= 0.5; h += 0.1) {
    p.h = h;
    const double z = partition_exact_small(p, om).z;
    CHECK(z >= prev);
    prev = z;
  }
}

TEST_CASE("quenched estimator is independent of the thread count") {
  PinningParams p = small(2, 4, 0.5, 0.1);
  const StreamKey k{17, 2, 0, 0};
  const QuenchedResult a = quenched_free_energy(p, 6, 100, k, 1);
  const QuenchedResult b = quenched_free_energy(p, 6, 100, k, 3);
  CHECK(a.log_z_raw == b.log_z_raw);
  CHECK(a.free_energy.mean == b.free_energy.mean);
  CHECK(a.free_energy.std_error == b.free_energy.std_error);
}

TEST_CASE("fractional moment never exceeds twice the annealed log mean") {
  PinningParams p = small(2, 4, 0.5, 0.1);
  const QuenchedResult q = quenched_free_energy(p, 8, 200, StreamKey{3, 3, 0, 0});
  const Estimate f = fractional_moment(q, 16);
  CHECK(std::isfinite(f.mean));
  CHECK(f.std_error >= 0.0);
}

TEST_CASE("lower bound requires a random boundary") {
  PinningParams p = small(3, 4, 0.5, 0.2);
  CHECK_THROWS(finite_volume_lower_bound(p, 4, 10, StreamKey{1, 1, 0, 0}));
  p.bc = BoundaryCondition::stationary(0.0);
  p.d = 2;
  CHECK_THROWS(finite_volume_lower_bound(p, 4, 10, StreamKey{1, 1, 0, 0}));
}

TEST_CASE("certificate value is estimate minus k stderr") {
  PinningParams p = small(3, 4, 0.5, 0.3);
  p.bc = BoundaryCondition::stationary(0.0);
  const LowerBoundResult r = finite_volume_lower_bound(p, 8, 100, StreamKey{5, 5, 0, 0}, 3.0);
  CHECK(r.f_mass == 0.0);
  CHECK(r.value == doctest::Approx(r.estimate.mean - 3.0 * r.estimate.std_error));
  CHECK(r.certified == (r.value > 0.0));
}

TEST_CASE("contact constant") {
  const double s = std::sqrt(green_infinite(3, Site{0, 0, 0}, 0.0));
  CHECK(contact_constant(3) == doctest::Approx(norm_interval(-1 / s, 1 / s)).epsilon(1e-12));
}

TEST_CASE("pilot height returns one of the candidates") {
  PinningParams p = small(3, 4, 0.5, 0.3);
  const std::vector<double> hs{0.0, 1.0};
  const double u = pilot_height(p, hs, 4, 50, StreamKey{2, 2, 0, 0});
  CHECK((u == 0.0 || u == 1.0));
}

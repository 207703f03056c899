#include <cmath>
#include <vector>

#include "doctest.h"

#include "gffpin/diagnostics.hpp"
#include "gffpin/errors.hpp"

using namespace gffpin;

TEST_CASE("event names round trip") {
  for (EventKind k : {EventKind::E_u, EventKind::A0, EventKind::A1_x, EventKind::A1, EventKind::A2, EventKind::B_u,
                      EventKind::A1_harmonic, EventKind::A2_kappa, EventKind::F_N_eps, EventKind::H_threshold})
    CHECK(event_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(event_kind_from_string("nope"));
}

TEST_CASE("Hamiltonian statistic of a linear field") {
  const Box b(2, 4);
  std::vector<double> f(b.num_sites());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 2.0 * b.site(i)[0];
  // Each of the 4 * 5 edges along axis 0 contributes 4.
  CHECK(hamiltonian_statistic(b, f) == doctest::Approx(80.0));
}

TEST_CASE("Hamiltonian mean and moment generating function") {
  const HamiltonianProbe r = hamiltonian_probe(2, 5, 0.1, 6.0, 8000, StreamKey{1, 1, 0, 0});
  CHECK(std::abs(r.mean_H.mean - 16.0) < 4 * r.mean_H.std_error);
  CHECK(r.mgf_closed == doctest::Approx(std::pow(0.8, -8.0)));
  CHECK(std::abs(r.z_mgf) < 4.0);
  CHECK(r.tail.mean <= r.tail_bound + 1e-12);
}

TEST_CASE("one-contact decomposition is consistent") {
  PinningParams p;
  p.d = 1;
  p.N = 5;
  p.beta = 0.5;
  p.h = 0.2;
  const auto om = sample_disorder(p.law, p.box().tilde(), StreamKey{4, 4, 0, 0}).omega;
  const OneContact o = one_contact_decomposition(p, om);
  double s = 0.0;
  for (double v : o.p_A1_x) s += v;
  CHECK(s == doctest::Approx(o.p_A1).epsilon(1e-12));
  CHECK(o.p_A0 + o.p_A1 + o.p_A2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(o.z_exact == doctest::Approx(partition_exact_small(p, om).z).epsilon(1e-10));
}

TEST_CASE("event probability of the sure event and interval coverage") {
  FieldLaw law;
  law.d = 2;
  law.N = 4;
  EventSpec s;
  s.kind = EventKind::A0;
  law.bc = BoundaryCondition::constant(100.0);
  const EventReport r = event_probability(s, law, 200, StreamKey{1, 2, 0, 0});
  CHECK(r.estimate.mean == doctest::Approx(1.0));
  CHECK(r.wilson_lo <= 1.0);
  CHECK(r.wilson_hi == doctest::Approx(1.0));
  CHECK_THROWS(event_probability(s, law, 10, StreamKey{1, 2, 0, 0}));
}

TEST_CASE("conjectured threshold") {
  CHECK(conjection_threshold(3, 1e-3) == doctest::Approx(std::sqrt(std::log(1e3) / 12)));
}

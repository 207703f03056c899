#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "json.hpp"

#include "gffpin/green.hpp"
#include "gffpin/sampler.hpp"
#include "gffpin/special.hpp"
#include "gffpin/stats.hpp"

using namespace gffpin;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("spectral sampler covariance matches the Green table") {
  const int d = 2, N = 6, M = 20000;
  const Box b(d, N);
  const GreenTable g = green_box(b, 0.0);
  const SpectralSampler s(d, N, 0.0);
  std::vector<double> z(s.size());
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 0}, {0, 1}, {7, 7}, {3, 20}, {12, 12}};
  std::vector<std::vector<double>> prod(pairs.size(), std::vector<double>(M));
  Philox rng(1, 1);
  for (int k = 0; k < M; ++k) {
    s.sample(rng, z);
    for (std::size_t p = 0; p < pairs.size(); ++p) prod[p][std::size_t(k)] = z[pairs[p].first] * z[pairs[p].second];
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double want = g.g(Eigen::Index(pairs[p].first), Eigen::Index(pairs[p].second));
    CHECK(std::abs(mean_of(prod[p]) - want) < 4.5 * stderr_of(prod[p]));
  }
}

TEST_CASE("sine transform is an involution on both code paths") {
  for (int N : {8, 64}) {
    const SpectralSampler s(2, N, 0.0);
    std::vector<double> x(s.size()), y;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(0.37 * double(i));
    y = x;
    s.transform(y);
    s.transform(y);
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
    CHECK(err < 1e-11);
    CHECK(s.uses_fft() == (N >= 64));
  }
}

TEST_CASE("stationary boundary law has the infinite-volume covariance") {
  const auto s = stationary_boundary_sampler(3, 3, 0.0);
  const Eigen::MatrixXd c = boundary_covariance(Box(3, 3), 0.0);
  CHECK((s->covariance() - c).cwiseAbs().maxCoeff() < 1e-14);
  const Eigen::MatrixXd L = s->factor();
  CHECK((L * L.transpose() - c).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(stationary_boundary_sampler(3, 3, 0.0).get() == s.get());
}

TEST_CASE("field with constant boundary is centred at the boundary value") {
  const Box b(2, 5);
  Philox rng(4, 4);
  std::vector<double> centre;
  for (int k = 0; k < 4000; ++k) {
    const FieldSample f = sample_with_boundary(b, BoundaryCondition::constant(2.0), 0.0, 0.0, rng);
    centre.push_back(f.values[b.index(Site{2, 2})]);
    CHECK(f.values[b.index(Site{0, 3})] == 2.0);
  }
  CHECK(std::abs(mean_of(centre) - 2.0) < 4 * stderr_of(centre));
}

TEST_CASE("massive field relaxes towards the recentring height") {
  const Box b(1, 40);
  FieldSampler fs(b, 1.0, 3.0);
  fs.set_boundary(std::vector<double>(b.boundary().size(), 0.0));
  CHECK(fs.mean()[b.index(Site{20})] == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("tilted normal mass and sampling") {
  const Piece flat[] = {{-kInf, kInf, 0.0}};
  CHECK(tilted_normal_log_mass(0.3, 1.2, flat) == doctest::Approx(0.0).epsilon(1e-14));
  const double c = 0.8, mu = 0.4, s = 0.9;
  const Piece pin[] = {{-kInf, -1.0, 0.0}, {-1.0, 1.0, c}, {1.0, kInf, 0.0}};
  const double p = gauss_interval(mu, s, -1.0, 1.0);
  CHECK(tilted_normal_log_mass(mu, s, pin) == doctest::Approx(std::log1p((std::exp(c) - 1) * p)).epsilon(1e-13));
  Philox rng(9, 9);
  const int M = 40000;
  std::vector<double> in(M);
  for (int k = 0; k < M; ++k) {
    const double x = sample_tilted_normal(mu, s, pin, rng);
    in[std::size_t(k)] = std::abs(x) <= 1.0;
  }
  const double want = p * std::exp(c) / (1 + (std::exp(c) - 1) * p);
  CHECK(std::abs(mean_of(in) - want) < 4 * stderr_of(in));
}

TEST_CASE("heat bath with no interaction has Green-function variance") {
  const Box b(1, 6);
  FieldSample st{b, std::vector<double>(b.num_sites(), 0.0)};
  Interaction none;
  none.coupling.assign(b.num_sites(), 0.0);
  Philox rng(2, 3);
  std::vector<double> v;
  for (int k = 0; k < 200; ++k) gibbs_sweep(st, none, 0.0, 0.0, rng);
  for (int k = 0; k < 40000; ++k) {
    gibbs_sweep(st, none, 0.0, 0.0, rng);
    const double x = st.values[3];
    v.push_back(x * x);
  }
  const double want = 3.0 * 3.0 / 6.0;
  CHECK(mean_of(v) == doctest::Approx(want).epsilon(4 * batch_means_stderr(v) / want));
}

TEST_CASE("field snapshot writes raw values and a header") {
  const auto dir = std::filesystem::temp_directory_path() / "gffpin_test_snap";
  std::filesystem::create_directories(dir);
  Philox rng(1, 2);
  const FieldSample f = sample_with_boundary(Box(2, 4), BoundaryCondition::constant(0.0), 0.0, 0.0, rng);
  const std::string prefix = (dir / "s").string();
  save_field_snapshot(prefix, f, 0.0, 0.0);
  CHECK(std::filesystem::file_size(prefix + ".bin") == f.values.size() * sizeof(double));
  std::ifstream in(prefix + ".json");
  const auto h = nlohmann::json::parse(in);
  CHECK(h.at("count").get<std::size_t>() == f.values.size());
  std::ifstream raw(prefix + ".bin", std::ios::binary);
  std::vector<double> back(f.values.size());
  raw.read(reinterpret_cast<char*>(back.data()), std::streamsize(back.size() * sizeof(double)));
  CHECK(back == f.values);
}

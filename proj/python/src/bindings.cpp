#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "json.hpp"

#include "gffpin/bounds.hpp"
#include "gffpin/comembrane.hpp"
#include "gffpin/errors.hpp"
#include "gffpin/experiments.hpp"
#include "gffpin/green.hpp"
#include "gffpin/pinning.hpp"
#include "gffpin/sampler.hpp"
#include "gffpin/version.hpp"

namespace py = pybind11;
using namespace gffpin;

namespace {

DisorderLaw law_from(const std::string& name) { return parse_law(nlohmann::json(name)); }

PinningParams pinning(int d, int N, double beta, double h, double u, const std::string& law) {
  PinningParams p;
  p.d = d;
  p.N = N;
  p.beta = beta;
  p.h = h;
  p.bc = BoundaryCondition::constant(u);
  p.law = law_from(law);
  p.validate();
  return p;
}

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["mean"] = e.mean;
  d["stderr"] = e.std_error;
  d["n_replicas"] = e.n_replicas;
  d["n_mc"] = e.n_mc;
  d["method"] = e.method;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice Gaussian free field pinning: numerical core";
  m.attr("__version__") = kCodeVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<BudgetExhausted>(m, "BudgetExhausted", PyExc_RuntimeError);

  m.def("cumulant", [](const std::string& law, double beta) { return law_from(law).lambda(beta); },
        py::arg("law"), py::arg("beta"), "log E exp(beta omega)");

  m.def("green_infinite",
        [](int d, std::vector<int> x, double mass) { return green_infinite(d, x, mass); },
        py::arg("d"), py::arg("x"), py::arg("mass") = 0.0);
  m.def("green_box", [](int d, int N, double mass) { return green_box(Box(d, N), mass).g; }, py::arg("d"),
        py::arg("N"), py::arg("mass") = 0.0, "dense Green matrix over interior sites");

  m.def(
      "sample_field",
      [](int d, int N, double mass, double u, std::uint64_t seed) {
        Philox rng(seed, 0);
        const FieldSample s = sample_with_boundary(Box(d, N), BoundaryCondition::constant(u), mass, u, rng);
        std::vector<py::ssize_t> shape(static_cast<std::size_t>(d), N + 1);
        py::array_t<double> out(shape);
        std::copy(s.values.begin(), s.values.end(), out.mutable_data());
        return out;
      },
      py::arg("d"), py::arg("N"), py::arg("mass") = 0.0, py::arg("u") = 0.0, py::arg("seed") = 1,
      "field on {0..N}^d with constant boundary u");

  m.def(
      "partition_exact",
      [](int d, int N, double beta, double h, std::vector<double> omega, double u, const std::string& law) {
        return partition_exact_small(pinning(d, N, beta, h, u, law), omega).z;
      },
      py::arg("d"), py::arg("N"), py::arg("beta"), py::arg("h"), py::arg("omega"), py::arg("u") = 0.0,
      py::arg("law") = "gaussian");

  m.def(
      "partition_mc",
      [](int d, int N, double beta, double h, std::vector<double> omega, int M, std::uint64_t seed, double u,
         const std::string& law) {
        Philox rng(seed, 0);
        const PartitionEstimate e = partition_mc(pinning(d, N, beta, h, u, law), omega, M, rng);
        py::dict r;
        r["z"] = estimate_dict(e.z);
        r["log_z"] = estimate_dict(e.log_z);
        r["log_z_raw"] = e.log_z_raw;
        return r;
      },
      py::arg("d"), py::arg("N"), py::arg("beta"), py::arg("h"), py::arg("omega"), py::arg("M"), py::arg("seed") = 1,
      py::arg("u") = 0.0, py::arg("law") = "gaussian");

  m.def(
      "quenched_free_energy",
      [](int d, int N, double beta, double h, int R, int M, std::uint64_t seed, int threads, const std::string& law) {
        const QuenchedResult q =
            quenched_free_energy(pinning(d, N, beta, h, 0.0, law), R, M, StreamKey{seed, 0, 0, 0}, threads);
        return estimate_dict(q.free_energy);
      },
      py::arg("d"), py::arg("N"), py::arg("beta"), py::arg("h"), py::arg("R"), py::arg("M"), py::arg("seed") = 1,
      py::arg("threads") = 1, py::arg("law") = "gaussian");

  m.def("fractional_upper_bound",
        [](const std::string& law, double beta, double h) { return fractional_upper_bound(law_from(law), beta, h); },
        py::arg("law"), py::arg("beta"), py::arg("h"));
  m.def("alpha_root", [](const std::string& law, double beta, double h) { return alpha_root(law_from(law), beta, h); },
        py::arg("law"), py::arg("beta"), py::arg("h"));
  m.def("critical_curve", [](const std::string& law, double rho) { return critical_curve(law_from(law), rho); },
        py::arg("law"), py::arg("rho"));
  m.def("f_mass", &f_mass, py::arg("m"));
  m.def("log_W_finite", &log_W_finite, py::arg("N"), py::arg("m"));
  m.def(
      "u_mass",
      [](double mass) {
        const MassiveHeight h = u_mass(mass);
        py::dict r;
        r["sigma2"] = h.sigma2;
        r["u"] = h.u;
        r["residual"] = h.residual;
        return r;
      },
      py::arg("m"));
  m.def("contact_constant", &contact_constant, py::arg("d"));

  m.def(
      "run_experiment",
      [](const std::string& kind, const std::string& config_json, const std::string& out, std::uint64_t seed,
         int threads, double budget_minutes) {
        ConfigOverrides o;
        o.out_dir = out;
        o.seed = seed;
        o.threads = threads;
        o.budget_minutes = budget_minutes;
        const ExperimentConfig c = make_config(kind, nlohmann::json::parse(config_json), o);
        std::ostringstream log;
        const int rc = run_experiment(c, log);
        return py::make_tuple(rc, log.str());
      },
      py::arg("kind"), py::arg("config_json"), py::arg("out"), py::arg("seed") = 1, py::arg("threads") = 1,
      py::arg("budget_minutes") = 0.0, "returns (exit_code, log)");
}

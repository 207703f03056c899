#include "gffpin/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "gffpin/bounds.hpp"
#include "gffpin/comembrane.hpp"
#include "gffpin/diagnostics.hpp"
#include "gffpin/errors.hpp"
#include "gffpin/green.hpp"
#include "gffpin/pinning.hpp"
#include "gffpin/replica.hpp"
#include "gffpin/special.hpp"
#include "gffpin/version.hpp"

namespace gffpin {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"sample",     "green",      "free-energy", "pure-curve", "bounds",
                                          "hc2-scan",   "comembrane", "diagnostics", "replica"};
  return k;
}

// ---------------------------------------------------------------------------
// Configuration

std::string config_hash(const ExperimentConfig& c) {
  const json canon = {{"kind", c.kind}, {"params", c.params}, {"seed", c.seed}, {"k", c.k}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_tag(canon.dump())));
  return buf;
}

ExperimentConfig make_config(const std::string& kind, const json& doc, const ConfigOverrides& o) {
  ExperimentConfig c;
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const std::string doc_kind = doc.value("experiment", std::string());
  c.kind = kind.empty() ? doc_kind : kind;
  if (!doc_kind.empty() && doc_kind != c.kind)
    throw ConfigError("config is for experiment '" + doc_kind + "', not '" + c.kind + "'");
  bool known = false;
  for (const auto& k : experiment_kinds()) known = known || k == c.kind;
  if (!known) throw ConfigError("unknown experiment: '" + c.kind + "'");
  if (doc.contains("params")) c.params = doc.at("params");
  if (!c.params.is_object()) throw ConfigError("params must be an object");
  c.seed = doc.value("seed", std::uint64_t(1));
  c.k = doc.value("k", 3.0);
  c.threads = doc.value("threads", 1);
  c.out_dir = doc.value("out", std::string("out"));
  c.budget_minutes = doc.value("budget_minutes", 0.0);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.budget_minutes) c.budget_minutes = *o.budget_minutes;
  if (o.beta) c.params["beta"] = *o.beta;
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (!(c.k > 0.0)) throw ConfigError("k must be > 0");
  if (c.budget_minutes < 0.0) throw ConfigError("budget must be >= 0");
  c.hash = config_hash(c);
  return c;
}

ExperimentConfig load_config(const std::string& kind, const std::string& path, const ConfigOverrides& o) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path);
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  return make_config(kind, doc, o);
}

DisorderLaw parse_law(const json& j) {
  if (j.is_null()) return DisorderLaw::gaussian();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "gaussian") return DisorderLaw::gaussian();
    if (s == "rademacher") return DisorderLaw::rademacher();
    throw ConfigError("unknown disorder law: " + s);
  }
  if (j.is_object() && j.contains("values"))
    return DisorderLaw::finite_support(j.at("values").get<std::vector<double>>(),
                                       j.at("probs").get<std::vector<double>>());
  throw ConfigError("law must be \"gaussian\", \"rademacher\" or {values, probs}");
}

BoundaryCondition parse_bc(const json& j) {
  if (j.is_null()) return BoundaryCondition::constant(0.0);
  const std::string kind = j.value("kind", std::string("constant"));
  const double u = j.value("u", 0.0);
  if (kind == "constant") return BoundaryCondition::constant(u);
  if (kind == "stationary") return BoundaryCondition::stationary(u);
  if (kind == "stationary_massive") return BoundaryCondition::stationary_massive(u, j.value("m", 0.0));
  if (kind == "explicit") return BoundaryCondition::explicit_values(j.at("values").get<std::vector<double>>());
  throw ConfigError("unknown boundary kind: " + kind);
}

std::vector<double> parse_list(const json& p, const std::string& key, std::vector<double> fallback) {
  if (!p.contains(key)) return fallback;
  const json& v = p.at(key);
  std::vector<double> out = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
  if (out.empty()) throw ConfigError("grid '" + key + "' is empty");
  return out;
}

// ---------------------------------------------------------------------------
// Output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(const std::string& path, std::vector<std::string> header) : out_(path), width_(header.size()) {
  if (!out_) throw ConfigError("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
  out_.flush();
}

void CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> s;
  for (double v : values) s.push_back(format_double(v));
  row_text(s);
}

void CsvTable::row_text(const std::vector<std::string>& values) {
  if (values.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
  out_ << '\n';
  out_.flush();
}

ResultWriter::ResultWriter(const ExperimentConfig& cfg) : cfg_(cfg), dir_(cfg.out_dir) {
  fs::create_directories(fs::path(dir_) / "tables");
  jsonl_.open(fs::path(dir_) / "results.jsonl", std::ios::trunc);
  if (!jsonl_) throw ConfigError("cannot write results.jsonl in " + dir_);
}

namespace {

// Numbers are stored as canonical strings when non-finite so the JSON stays valid.
ojson clean(const ojson& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    return std::isfinite(v) ? j : ojson(format_double(v));
  }
  if (j.is_object() || j.is_array()) {
    ojson out = j.is_object() ? ojson::object() : ojson::array();
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (j.is_object())
        out[it.key()] = clean(it.value());
      else
        out.push_back(clean(*it));
    }
    return out;
  }
  return j;
}

}  // namespace

void ResultWriter::record(const ojson& point, const ojson& estimates, const ojson& seeds, double wall_seconds) {
  ojson r;
  r["config_hash"] = cfg_.hash;
  r["code_version"] = kCodeVersion;
  r["experiment"] = cfg_.kind;
  r["index"] = n_;
  r["point"] = clean(point);
  r["estimates"] = clean(estimates);
  r["seeds"] = seeds;
  r["wall_time_s"] = wall_seconds;
  jsonl_ << r.dump() << '\n';
  jsonl_.flush();
  ++n_;
}

CsvTable& ResultWriter::table(const std::string& name, const std::vector<std::string>& header) {
  auto it = tables_.find(name);
  if (it == tables_.end())
    it = tables_.emplace(name, std::make_unique<CsvTable>((fs::path(dir_) / "tables" / (name + ".csv")).string(), header))
             .first;
  return *it->second;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

template <class T>
T get(const json& p, const char* key, T fallback) {
  return p.contains(key) ? p.at(key).get<T>() : fallback;
}

int positive(const json& p, const char* key, int fallback) {
  const int v = get<int>(p, key, fallback);
  if (v < 1) throw ConfigError(std::string(key) + " must be >= 1");
  return v;
}

ojson estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"stderr", e.std_error}, {"n_replicas", e.n_replicas}, {"n_mc", e.n_mc},
          {"method", e.method}};
}

struct Context {
  const ExperimentConfig& cfg;
  ResultWriter& out;
  const Deadline& deadline;
  std::ostream& log;
  StreamKey base;

  // Independent stream family per grid point.
  StreamKey point_key(std::uint64_t idx) const {
    return base.with_experiment(base.experiment ^ splitmix64(0x9e3779b97f4a7c15ULL * (idx + 1)));
  }
  ojson seeds(const StreamKey& k) const {
    return {{"master", k.master}, {"experiment", k.experiment}, {"stream_id", k.id()}};
  }
};

Box box_from(const json& p, int d_default, int N_default) {
  return Box(positive(p, "d", d_default), get<int>(p, "N", N_default));
}

SumRegion region_from(const json& p) { return sum_region_from_string(get<std::string>(p, "region", "tilde")); }

void run_sample(Context& c) {
  const json& p = c.cfg.params;
  const Box box = box_from(p, 3, 8);
  const double m = get(p, "m", 0.0), u = get(p, "u", 0.0);
  const BoundaryCondition bc = parse_bc(p.value("bc", json()));
  const int count = positive(p, "count", 1);
  const bool snapshot = get(p, "snapshot", true);
  if (snapshot) fs::create_directories(fs::path(c.out.out_dir()) / "fields");
  auto& tab = c.out.table("samples", {"index", "mean", "sd", "contact_fraction", "min", "max"});
  for (int i = 0; i < count; ++i) {
    c.deadline.check("sample");
    const auto t0 = Clock::now();
    const StreamKey key = c.base.with_replica(std::uint64_t(i));
    Philox rng = key.engine();
    const FieldSample s = sample_with_boundary(box, bc, m, u, rng);
    std::vector<double> in;
    for (std::size_t x : box.interior()) in.push_back(s.values[x]);
    double contacts = 0.0;
    for (std::size_t x : box.tilde()) contacts += std::abs(s.values[x]) <= 1.0 ? 1.0 : 0.0;
    contacts /= double(box.tilde().size());
    const double mn = *std::min_element(s.values.begin(), s.values.end());
    const double mx = *std::max_element(s.values.begin(), s.values.end());
    std::string prefix;
    if (snapshot) {
      prefix = (fs::path(c.out.out_dir()) / "fields" / ("sample_" + std::to_string(i))).string();
      save_field_snapshot(prefix, s, m, u);
    }
    tab.row({double(i), mean_of(in), sample_sd(in), contacts, mn, mx});
    c.out.record({{"d", box.dim()}, {"N", box.edge()}, {"m", m}, {"u", u}, {"bc", bc.describe()}, {"index", i}},
                 {{"mean", mean_of(in)}, {"sd", sample_sd(in)}, {"contact_fraction", contacts},
                  {"snapshot", snapshot ? fs::path(prefix).filename().string() : ""}},
                 c.seeds(key), seconds_since(t0));
  }
}

void run_green(Context& c) {
  const json& p = c.cfg.params;
  const int d = positive(p, "d", 3);
  const double m = get(p, "m", 0.0);
  const bool cache = get(p, "cache", false);
  auto& tab = c.out.table("green", {"d", "N", "m", "G_center", "sigma2_inf", "log_N_over_2pi"});
  if (cache) fs::create_directories(fs::path(c.out.out_dir()) / "cache");
  const double s2 = (d >= 3 || m > 0.0) ? green_infinite(d, Site(static_cast<std::size_t>(d), 0), m) : kNaN;
  for (double Nd : parse_list(p, "N", {8})) {
    c.deadline.check("green");
    const auto t0 = Clock::now();
    const int N = int(Nd);
    const Box box(d, N);
    const Site centre(static_cast<std::size_t>(d), N / 2);
    const double g = green_box_entry(box, m, centre, centre);
    const double ref = std::log(double(N)) / (2.0 * std::numbers::pi);
    ojson est = {{"G_center", g}, {"sigma2_inf", s2}};
    if (cache && box.num_sites() <= 5000) {
      const std::string path =
          (fs::path(c.out.out_dir()) / "cache" / ("green_d" + std::to_string(d) + "_N" + std::to_string(N) + ".bin"))
              .string();
      const GreenTable t = green_box(box, m);
      save_green_table(path, t);
      est["cache"] = fs::path(path).filename().string();
      est["cache_roundtrip"] = load_green_table(path, d, N, m).has_value();
    }
    tab.row({double(d), double(N), m, g, s2, ref});
    c.out.record({{"d", d}, {"N", N}, {"m", m}}, est, c.seeds(c.base), seconds_since(t0));
  }
}

PinningParams pinning_from(const json& p) {
  PinningParams q;
  q.d = positive(p, "d", 3);
  q.N = get(p, "N", 10);
  q.m = get(p, "m", 0.0);
  q.u = get(p, "u", 0.0);
  q.bc = parse_bc(p.value("bc", json()));
  q.law = parse_law(p.value("law", json()));
  q.region = region_from(p);
  return q;
}

void run_free_energy(Context& c) {
  const json& p = c.cfg.params;
  PinningParams base = pinning_from(p);
  const int R = positive(p, "R", 16), M = positive(p, "M", 500);
  const int pure_R = std::max(2, get(p, "pure_R", 4)), pure_M = positive(p, "pure_M", M);
  const double vol = std::pow(double(base.N), base.d);
  auto& tab = c.out.table("free_energy", {"beta", "h", "F", "F_se", "F_raw", "F_raw_se", "pure_lower", "pure_lower_se",
                                          "pure_upper", "pure_upper_se", "frac", "frac_se", "frac_bound",
                                          "h2_over_beta2", "lambda_beta"});
  std::uint64_t idx = 0;
  for (double beta : parse_list(p, "beta", {0.5})) {
    for (double h : parse_list(p, "h", {0.1})) {
      c.deadline.check("free-energy");
      const auto t0 = Clock::now();
      const StreamKey key = c.point_key(idx++);
      PinningParams q = base;
      q.beta = beta;
      q.h = h;
      const double lam = q.law.lambda(beta);
      const QuenchedResult qr = quenched_free_energy(q, R, M, key, c.cfg.threads);
      PinningParams pure = base;
      pure.h = h;
      const QuenchedResult up = quenched_free_energy(pure, pure_R, pure_M, key.with_purpose("pure-upper"), c.cfg.threads);
      pure.h = h - lam;
      const QuenchedResult lo = quenched_free_energy(pure, pure_R, pure_M, key.with_purpose("pure-lower"), c.cfg.threads);
      const Estimate fm = fractional_moment(qr, int(vol));
      double fb = kNaN;
      if (beta > 0.0 && h > 0.0 && h < lam + q.law.lambda(-beta)) fb = fractional_upper_bound(q.law, beta, h);
      const double h2b2 = (q.law.kind() == DisorderKind::gaussian && beta > 0.0) ? h * h / (beta * beta) : kNaN;
      tab.row({beta, h, qr.free_energy.mean, qr.free_energy.std_error, qr.free_energy_raw.mean,
               qr.free_energy_raw.std_error, lo.free_energy.mean, lo.free_energy.std_error, up.free_energy.mean,
               up.free_energy.std_error, fm.mean, fm.std_error, fb, h2b2, lam});
      c.out.record({{"d", q.d}, {"N", q.N}, {"beta", beta}, {"h", h}, {"m", q.m}, {"law", q.law.name()},
                    {"bc", q.bc.describe()}, {"region", to_string(q.region)}, {"R", R}, {"M", M}},
                   {{"F", estimate_json(qr.free_energy)}, {"F_raw", estimate_json(qr.free_energy_raw)},
                    {"pure_lower", estimate_json(lo.free_energy)}, {"pure_upper", estimate_json(up.free_energy)},
                    {"fractional_moment", estimate_json(fm)}, {"fractional_bound", fb}, {"h2_over_beta2", h2b2},
                    {"lambda_beta", lam}},
                   c.seeds(key), seconds_since(t0));
    }
  }
  if (!p.contains("certify")) return;
  const json& cp = p.at("certify");
  const std::vector<double> heights = parse_list(cp, "heights", {0.0, 0.5, 1.0, 1.5, 2.0});
  const int pR = positive(cp, "pilot_R", 32), pM = positive(cp, "pilot_M", 500);
  const int cR = positive(cp, "R", 256), cM = positive(cp, "M", 1000);
  auto& ct = c.out.table("certificates", {"beta", "h", "u", "estimate", "stderr", "f_mass", "k", "value", "certified"});
  for (double beta : parse_list(cp, "beta", {0.5})) {
    for (double h : parse_list(cp, "h", {0.08})) {
      c.deadline.check("certify");
      const auto t0 = Clock::now();
      const StreamKey key = c.point_key(idx++);
      PinningParams q = base;
      q.beta = beta;
      q.h = h;
      const double u = pilot_height(q, heights, pR, pM, key.with_purpose("pilot"), c.cfg.k, c.cfg.threads);
      q.u = u;
      q.bc = q.m > 0.0 ? BoundaryCondition::stationary_massive(u, q.m) : BoundaryCondition::stationary(u);
      const LowerBoundResult lb = finite_volume_lower_bound(q, cR, cM, key, c.cfg.k, c.cfg.threads);
      ct.row({beta, h, u, lb.estimate.mean, lb.estimate.std_error, lb.f_mass, lb.k, lb.value, lb.certified ? 1.0 : 0.0});
      c.out.record({{"d", q.d}, {"N", q.N}, {"beta", beta}, {"h", h}, {"m", q.m}, {"u", u}, {"law", q.law.name()},
                    {"R", cR}, {"M", cM}},
                   {{"certificate_estimate", estimate_json(lb.estimate)}, {"f_mass", lb.f_mass}, {"k", lb.k},
                    {"value", lb.value}, {"certified", lb.certified}},
                   c.seeds(key), seconds_since(t0));
    }
  }
}

void run_pure_curve(Context& c) {
  const json& p = c.cfg.params;
  const int d = positive(p, "d", 3), N = get(p, "N", 12), M = positive(p, "M", 2000);
  auto& tab = c.out.table("pure_curve", {"h", "F", "F_se", "F_over_h", "C_d"});
  std::uint64_t idx = 0;
  for (double h : parse_list(p, "h", {0.02, 0.05, 0.1})) {
    c.deadline.check("pure-curve");
    const auto t0 = Clock::now();
    const StreamKey key = c.point_key(idx++);
    const PureResult r = pure_free_energy(d, N, h, M, key);
    const double ratio = h != 0.0 ? r.free_energy.mean / h : kNaN;
    tab.row({h, r.free_energy.mean, r.free_energy.std_error, ratio, r.C_d});
    c.out.record({{"d", d}, {"N", N}, {"h", h}, {"M", M}},
                 {{"F", estimate_json(r.free_energy)}, {"F_over_h", ratio}, {"C_d", r.C_d}, {"sigma2", r.sigma2}},
                 c.seeds(key), seconds_since(t0));
  }
}

void run_bounds(Context& c) {
  const json& p = c.cfg.params;
  const DisorderLaw law = parse_law(p.value("law", json()));
  const ojson none = ojson::object();
  auto t0 = Clock::now();
  auto emit = [&](const ojson& point, const ojson& est) {
    c.out.record(point, est, none, seconds_since(t0));
    t0 = Clock::now();
  };
  {
    auto& t = c.out.table("fractional", {"beta", "h", "alpha", "bound", "h2_over_beta2"});
    for (double beta : parse_list(p, "beta", {0.5, 1.0}))
      for (double h : parse_list(p, "h", {0.01, 0.05, 0.1, 0.2})) {
        c.deadline.check("bounds");
        double a = kNaN, b = kNaN;
        try {
          a = alpha_root(law, beta, h);
          b = fractional_upper_bound(law, beta, h);
        } catch (const DomainError&) {
        }
        const double g = law.kind() == DisorderKind::gaussian ? h * h / (beta * beta) : kNaN;
        t.row({beta, h, a, b, g});
        emit({{"section", "fractional"}, {"law", law.name()}, {"beta", beta}, {"h", h}},
             {{"alpha", a}, {"bound", b}, {"h2_over_beta2", g}});
      }
  }
  {
    auto& t = c.out.table("tail", {"a", "h", "sigma", "u", "tail_ratio", "tail_ratio_shifted", "below_ratio"});
    const double a = get(p, "a", 1.0);
    const int d = positive(p, "tail_d", 3);
    const double sigma = std::sqrt(green_infinite(d, Site(static_cast<std::size_t>(d), 0), 0.0));
    for (double h : parse_list(p, "tail_h", {1e-3, 1e-4, 1e-5})) {
      const double u = u_of_ah(a, h, sigma);
      const double v = 1.0 / std::log(1.0 / h);
      const double r0 = tail_check(a, h, sigma, 0.0), r1 = tail_check(a, h, sigma, v);
      const double rb = below_tail_check(a, h, sigma, 0.0);
      t.row({a, h, sigma, u, r0, r1, rb});
      emit({{"section", "tail"}, {"a", a}, {"h", h}, {"d", d}},
           {{"u", u}, {"tail_ratio", r0}, {"tail_ratio_shifted", r1}, {"below_ratio", rb}});
    }
  }
  {
    auto& t = c.out.table("f_mass", {"m", "f", "f_direct", "ratio_to_cW", "sigma2_m", "sigma2_ratio"});
    for (double m : parse_list(p, "m", {1e-1, 1e-2, 1e-3, 1e-4})) {
      c.deadline.check("bounds");
      const double f = f_mass(m), fd = f_mass_direct(m);
      const double L = std::abs(std::log(m));
      const double s2 = green_infinite(2, Site{0, 0}, m);
      const double ratio = f / (m * m * L) * 4.0 * std::numbers::pi;
      const double sr = s2 / (L / (2.0 * std::numbers::pi));
      t.row({m, f, fd, ratio, s2, sr});
      emit({{"section", "f_mass"}, {"m", m}},
           {{"f", f}, {"f_direct", fd}, {"ratio_to_cW", ratio}, {"sigma2_m", s2}, {"sigma2_ratio", sr}});
    }
    auto& w = c.out.table("log_w", {"N", "m", "log_W", "defect"});
    const double mw = get(p, "w_m", 0.1);
    const double f = f_mass(mw);
    for (double Nd : parse_list(p, "w_N", {64, 128, 256, 512})) {
      const double lw = log_W_finite(int(Nd), mw);
      w.row({Nd, mw, lw, lw + f});
      emit({{"section", "log_w"}, {"N", int(Nd)}, {"m", mw}}, {{"log_W", lw}, {"defect", lw + f}});
    }
  }
  {
    auto& t = c.out.table("u_mass", {"m", "sigma2", "u", "residual", "asymptotic_ratio", "contact_ratio"});
    for (double m : parse_list(p, "u_m", {1e-4, 1e-10, 1e-20})) {
      try {
        const MassiveHeight mh = u_mass(m);
        const double asym = mh.u / (std::sqrt(2.0 / std::numbers::pi) * std::abs(std::log(m)));
        const double cr = massive_contact_ratio(mh);
        t.row({m, mh.sigma2, mh.u, mh.residual, asym, cr});
        emit({{"section", "u_mass"}, {"m", m}},
             {{"sigma2", mh.sigma2}, {"u", mh.u}, {"residual", mh.residual}, {"asymptotic_ratio", asym},
              {"contact_ratio", cr}});
      } catch (const DomainError& e) {
        emit({{"section", "u_mass"}, {"m", m}}, {{"error", e.what()}});
      }
    }
  }
  {
    auto& t = c.out.table("gs1gs2", {"m", "eta2", "eps", "lhs", "rhs", "holds"});
    const double eps = get(p, "eps", 0.1);
    for (double m : parse_list(p, "gs_m", {1e-20, 1e-40, 1e-80}))
      for (double e2 : parse_list(p, "gs_eta2", {2.0, 3.0, 4.0})) {
        const Gs1Gs2 g = gs1gs2_check(m, std::sqrt(e2), eps);
        t.row({m, e2, eps, g.lhs, g.rhs, g.holds ? 1.0 : 0.0});
        emit({{"section", "gs1gs2"}, {"m", m}, {"eta2", e2}, {"eps", eps}},
             {{"lhs", g.lhs}, {"rhs", g.rhs}, {"holds", g.holds}});
      }
  }
  {
    auto& t = c.out.table("indep", {"beta", "h", "a", "value", "leading", "ratio"});
    for (double beta : parse_list(p, "indep_beta", {1.0}))
      for (double h : parse_list(p, "indep_h", {1e-2, 1e-3})) {
        const double cb = c_beta(law, beta), a = 1.0 / cb;
        const double v = indep_free_energy(law, beta, h, a), lead = h * h / (2.0 * cb);
        t.row({beta, h, a, v, lead, v / lead});
        emit({{"section", "indep"}, {"beta", beta}, {"h", h}}, {{"a", a}, {"value", v}, {"ratio", v / lead}});
      }
  }
  {
    auto& t = c.out.table("rough", {"d", "N", "u", "log_prob", "log_floor"});
    for (const auto& dn : p.value("rough", json::array({{3, 10}, {3, 100}, {4, 10}}))) {
      const int d = dn.at(0).get<int>(), N = dn.at(1).get<int>();
      const RoughContact r = rough_contact(d, N);
      t.row({double(d), double(N), r.u, r.log_prob, r.log_floor});
      emit({{"section", "rough"}, {"d", d}, {"N", N}}, {{"u", r.u}, {"log_prob", r.log_prob}, {"log_floor", r.log_floor}});
    }
  }
  {
    auto& t = c.out.table("coarse", {"h", "rho", "N0", "N1", "kappa"});
    for (double h : parse_list(p, "coarse_h", {1e-2, 1e-3})) {
      const CoarseScales s = coarse_scales(h, get(p, "kappa", 5));
      t.row({h, s.rho, double(s.N0), double(s.N1), double(s.kappa)});
      emit({{"section", "coarse"}, {"h", h}},
           {{"rho", s.rho}, {"N0", s.N0}, {"N1", s.N1}, {"kappa", s.kappa}, {"rounding", s.rounding}});
    }
  }
}

void run_hc2(Context& c) {
  const json& p = c.cfg.params;
  HcScanSpec spec;
  spec.h_grid = parse_list(p, "h", {0.3, 0.2, 0.15, 0.1});
  spec.m_grid = parse_list(p, "m", {1e-2});
  const std::string rule = get<std::string>(p, "height", "independent");
  if (rule == "u_mass")
    spec.height = HeightRule::u_mass;
  else if (rule == "independent")
    spec.height = HeightRule::independent;
  else
    throw ConfigError("height must be u_mass or independent");
  spec.law = parse_law(p.value("law", json()));
  spec.N = get(p, "N", 0);
  spec.R = positive(p, "R", 16);
  spec.M = positive(p, "M", 256);
  spec.k = c.cfg.k;
  spec.eps = get(p, "eps", 0.1);
  spec.threads = c.cfg.threads;
  auto& tab = c.out.table("hc2_scan", {"beta", "h", "m", "u", "N", "estimate", "stderr", "f_mass", "value", "certified"});
  auto& sum = c.out.table("hc2_summary", {"beta", "lambda_beta", "certified_h", "bound", "beta_pow_3_minus_eps"});
  std::uint64_t idx = 0;
  for (double beta : parse_list(p, "beta", {0.5})) {
    const auto t0 = Clock::now();
    const StreamKey key = c.point_key(idx++);
    const HcScanResult r = hc2_scan(beta, spec, key, c.deadline);
    ojson entries = ojson::array();
    for (const auto& e : r.entries) {
      if (!e.skipped.empty()) {
        entries.push_back({{"h", e.h}, {"m", e.m}, {"skipped", e.skipped}});
        continue;
      }
      tab.row({beta, e.h, e.m, e.u, double(e.N), e.result.estimate.mean, e.result.estimate.std_error, e.result.f_mass,
               e.result.value, e.result.certified ? 1.0 : 0.0});
      entries.push_back({{"h", e.h}, {"m", e.m}, {"u", e.u}, {"N", e.N}, {"estimate", estimate_json(e.result.estimate)},
                         {"f_mass", e.result.f_mass}, {"value", e.result.value}, {"certified", e.result.certified},
                         {"stream_id", e.result.certificate.seed}});
    }
    const double ch = r.certified_h ? *r.certified_h : kNaN;
    sum.row({beta, r.lambda_beta, ch, r.bound, r.comparison});
    c.out.record({{"beta", beta}, {"height", rule}, {"R", spec.R}, {"M", spec.M}},
                 {{"lambda_beta", r.lambda_beta}, {"certified_h", ch}, {"bound", r.bound},
                  {"beta_pow_3_minus_eps", r.comparison}, {"note", r.note}, {"entries", entries}},
                 c.seeds(key), seconds_since(t0));
  }
}

void run_comembrane(Context& c) {
  const json& p = c.cfg.params;
  CoMembraneParams base;
  base.d = positive(p, "d", 3);
  base.N = get(p, "N", 8);
  base.m = get(p, "m", 0.0);
  base.u = get(p, "u", 0.0);
  base.bc = parse_bc(p.value("bc", json()));
  base.law = parse_law(p.value("law", json()));
  base.region = region_from(p);
  const int R = positive(p, "R", 32), M = positive(p, "M", 1000);
  auto& tab = c.out.table("comembrane", {"rho", "h", "curve", "F", "F_se", "F_raw", "F_raw_se", "bound_value", "certified"});
  std::uint64_t idx = 0;
  for (double rho : parse_list(p, "rho", {0.5})) {
    for (double h : parse_list(p, "h", {0.0})) {
      c.deadline.check("comembrane");
      const auto t0 = Clock::now();
      const StreamKey key = c.point_key(idx++);
      CoMembraneParams q = base;
      q.rho = rho;
      q.h = h;
      const double curve = rho > 0.0 ? critical_curve(q.law, rho) : 0.0;
      ojson est;
      double value = kNaN, certified = kNaN;
      QuenchedResult qr;
      if (q.bc.random() && (q.d >= 3 || q.m > 0.0)) {
        const LowerBoundResult lb = comembrane_lower_bound(q, R, M, key, c.cfg.k, c.cfg.threads);
        qr = lb.replicas;
        value = lb.value;
        certified = lb.certified ? 1.0 : 0.0;
        est["certificate_value"] = value;
        est["certified"] = lb.certified;
      } else {
        qr = comembrane_free_energy(q, R, M, key, c.cfg.threads);
      }
      est["curve"] = curve;
      est["F"] = estimate_json(qr.free_energy);
      est["F_raw"] = estimate_json(qr.free_energy_raw);
      tab.row({rho, h, curve, qr.free_energy.mean, qr.free_energy.std_error, qr.free_energy_raw.mean,
               qr.free_energy_raw.std_error, value, certified});
      c.out.record({{"d", q.d}, {"N", q.N}, {"rho", rho}, {"h", h}, {"m", q.m}, {"bc", q.bc.describe()},
                    {"law", q.law.name()}, {"R", R}, {"M", M}},
                   est, c.seeds(key), seconds_since(t0));
    }
  }
  if (!p.contains("equivalence")) return;
  const json& ep = p.at("equivalence");
  CoMembraneParams q = base;
  q.d = positive(ep, "d", 2);
  q.N = get(ep, "N", 4);
  q.rho = get(ep, "rho", 0.5);
  q.h = get(ep, "h", 0.1);
  q.bc = parse_bc(ep.value("bc", json()));
  ChainSpec chain{get(ep, "burn_in", 200), get(ep, "thin", 2), get(ep, "n_samples", 4000)};
  const auto t0 = Clock::now();
  const StreamKey key = c.point_key(idx++);
  const auto& reg = q.box().region(q.region);
  const DisorderSample om = sample_disorder(q.law, reg, key.with_purpose("omega"));
  const MeasureEquivalence me = measure_equivalence(q, om.omega, chain, key);
  c.out.table("equivalence", {"below_delta", "below_sign", "z_below", "mean_delta", "mean_sign", "z_mean",
                              "max_energy_defect"})
      .row({me.below_delta.mean, me.below_sign.mean, me.z_below, me.mean_delta.mean, me.mean_sign.mean, me.z_mean,
            me.max_energy_defect});
  c.out.record({{"section", "equivalence"}, {"d", q.d}, {"N", q.N}, {"rho", q.rho}, {"h", q.h}},
               {{"below_delta", estimate_json(me.below_delta)}, {"below_sign", estimate_json(me.below_sign)},
                {"mean_delta", estimate_json(me.mean_delta)}, {"mean_sign", estimate_json(me.mean_sign)},
                {"z_below", me.z_below}, {"z_mean", me.z_mean}, {"log_ratio", me.log_ratio},
                {"max_energy_defect", me.max_energy_defect}, {"agree", me.agree}},
               c.seeds(key), seconds_since(t0));
}

void run_diagnostics(Context& c) {
  const json& p = c.cfg.params;
  FieldLaw law;
  law.d = positive(p, "d", 3);
  law.N = get(p, "N", 6);
  law.m = get(p, "m", 0.0);
  law.u = get(p, "u", 0.0);
  law.bc = parse_bc(p.value("bc", json()));
  const int M = get(p, "M", 2000);
  std::uint64_t idx = 0;
  auto& ev = c.out.table("events", {"kind", "probability", "stderr", "wilson_lo", "wilson_hi", "bound", "bound_pass"});
  for (const auto& e : p.value("events", json::array({{{"kind", "A0"}}, {{"kind", "A1"}}, {{"kind", "A2"}}}))) {
    c.deadline.check("diagnostics");
    const auto t0 = Clock::now();
    EventSpec s;
    s.kind = event_kind_from_string(e.at("kind").get<std::string>());
    s.u = e.value("u", 0.0);
    s.site = e.value("site", std::size_t(0));
    s.rho = e.value("rho", 0.0);
    s.N0 = e.value("N0", 0);
    s.kappa = e.value("kappa", 5);
    s.h = e.value("h", 0.0);
    s.eps = e.value("eps", 0.1);
    s.C = e.value("C", 6.0);
    const StreamKey key = c.point_key(idx++);
    const EventReport r = event_probability(s, law, M, key);
    const double b = r.bound ? *r.bound : kNaN;
    ev.row_text({to_string(s.kind), format_double(r.estimate.mean), format_double(r.estimate.std_error),
                 format_double(r.wilson_lo), format_double(r.wilson_hi), format_double(b), r.bound_pass ? "1" : "0"});
    c.out.record({{"event", to_string(s.kind)}, {"d", law.d}, {"N", law.N}, {"bc", law.bc.describe()}, {"M", M}},
                 {{"probability", estimate_json(r.estimate)}, {"wilson", {r.wilson_lo, r.wilson_hi}}, {"bound", b},
                  {"bound_on_complement", r.bound_on_complement}, {"bound_formula", r.bound_formula},
                  {"bound_pass", r.bound_pass}},
                 c.seeds(key), seconds_since(t0));
  }
  if (p.contains("histogram")) {
    const json& hp = p.at("histogram");
    PinningParams q = pinning_from(hp);
    q.beta = get(hp, "beta", 0.5);
    const ChainSpec chain{get(hp, "burn_in", 50), get(hp, "thin", 2), get(hp, "n_samples", 200)};
    auto& ht = c.out.table("height_histogram", {"h", "threshold", "fraction", "stderr"});
    auto& hs = c.out.table("height_series", {"h", "sweep", "fraction"});
    for (double h : parse_list(hp, "h", {0.5, 0.05})) {
      c.deadline.check("histogram");
      const auto t0 = Clock::now();
      q.h = h;
      const StreamKey key = c.point_key(idx++);
      const DisorderSample om = sample_disorder(q.law, q.box().region(q.region), key.with_purpose("omega"));
      Philox rng = key.with_purpose("chain").engine();
      const HeightHistogram hh = contact_height_histogram(q, om.omega, chain, rng);
      ht.row({h, hh.threshold, hh.fraction.mean, hh.fraction.std_error});
      for (std::size_t i = 0; i < hh.series.size(); ++i) hs.row({h, double(i), hh.series[i]});
      c.out.record({{"section", "histogram"}, {"d", q.d}, {"N", q.N}, {"beta", q.beta}, {"h", h}},
                   {{"threshold", hh.threshold}, {"fraction", estimate_json(hh.fraction)}}, c.seeds(key),
                   seconds_since(t0));
    }
  }
  if (p.contains("hamiltonian")) {
    const json& hp = p.at("hamiltonian");
    const auto t0 = Clock::now();
    const StreamKey key = c.point_key(idx++);
    const int d = positive(hp, "d", 2), N = get(hp, "N", 6);
    const double lambda = get(hp, "lambda", 0.1), C = get(hp, "C", 6.0);
    const HamiltonianProbe r = hamiltonian_probe(d, N, lambda, C, positive(hp, "M", 10000), key);
    c.out.table("hamiltonian", {"d", "N", "lambda", "mean_H", "mean_H_se", "mgf", "mgf_se", "mgf_closed", "tail",
                                "tail_bound"})
        .row({double(d), double(N), lambda, r.mean_H.mean, r.mean_H.std_error, r.mgf.mean, r.mgf.std_error,
              r.mgf_closed, r.tail.mean, r.tail_bound});
    c.out.record({{"section", "hamiltonian"}, {"d", d}, {"N", N}, {"lambda", lambda}, {"C", C}},
                 {{"mean_H", estimate_json(r.mean_H)}, {"mgf", estimate_json(r.mgf)}, {"mgf_closed", r.mgf_closed},
                  {"z_mgf", r.z_mgf}, {"tail", estimate_json(r.tail)}, {"tail_bound", r.tail_bound}},
                 c.seeds(key), seconds_since(t0));
  }
}

void run_replica(Context& c) {
  const json& p = c.cfg.params;
  PinningParams q = pinning_from(p);
  q.d = positive(p, "d", 1);
  q.N = get(p, "N", 5);
  q.beta = get(p, "beta", 0.5);
  q.h = get(p, "h", 0.1);
  ReplicaEvent ev = ReplicaEvent::full();
  if (p.contains("event")) {
    const std::string k = p.at("event").value("kind", std::string("full"));
    if (k == "max_contacts")
      ev = ReplicaEvent::max_contacts(p.at("event").value("kappa", 2));
    else if (k != "full")
      throw ConfigError("event kind must be full or max_contacts");
  }
  ReplicaSpec spec;
  spec.R = positive(p, "R", 400);
  spec.t = get(p, "t", 1.0);
  spec.lambda = get(p, "lambda", 0.0);
  spec.grid = positive(p, "grid", 5);
  c.deadline.check("replica");
  const auto t0 = Clock::now();
  const StreamKey key = c.point_key(0);
  const ReplicaTerms r = replica_terms(q, ev, spec, key);
  auto& tab = c.out.table("replica_psi", {"s", "psi", "psi_se", "step", "step_se"});
  ojson psi = ojson::array();
  for (std::size_t i = 0; i < r.psi.size(); ++i) {
    const double st = i ? r.psi_steps[i - 1].mean : kNaN, sse = i ? r.psi_steps[i - 1].std_error : kNaN;
    tab.row({r.s_grid[i], r.psi[i].mean, r.psi[i].std_error, st, sse});
    psi.push_back({{"s", r.s_grid[i]}, {"psi", estimate_json(r.psi[i])}});
  }
  c.out.record({{"d", q.d}, {"N", q.N}, {"beta", q.beta}, {"h", q.h}, {"R", spec.R}, {"t", spec.t}},
               {{"T1", r.T1}, {"T2", r.T2}, {"rhs", r.rhs}, {"prob_A", r.prob_A},
                {"quenched", estimate_json(r.quenched)}, {"inequality_holds", r.inequality_holds},
                {"monotone", r.monotone}, {"psi", psi}},
               c.seeds(key), seconds_since(t0));
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    const Deadline deadline(cfg.budget_minutes);
    ResultWriter out(cfg);
    Context c{cfg, out, deadline, log, StreamKey{cfg.seed, hash_tag(cfg.kind), 0, 0}};
    if (cfg.kind == "sample") run_sample(c);
    else if (cfg.kind == "green") run_green(c);
    else if (cfg.kind == "free-energy") run_free_energy(c);
    else if (cfg.kind == "pure-curve") run_pure_curve(c);
    else if (cfg.kind == "bounds") run_bounds(c);
    else if (cfg.kind == "hc2-scan") run_hc2(c);
    else if (cfg.kind == "comembrane") run_comembrane(c);
    else if (cfg.kind == "diagnostics") run_diagnostics(c);
    else if (cfg.kind == "replica") run_replica(c);
    else throw ConfigError("unknown experiment: " + cfg.kind);
    log << cfg.kind << ": " << out.count() << " records in " << out.out_dir() << '\n';
    return kExitOk;
  } catch (const BudgetExhausted& e) {
    log << "budget: " << e.what() << '\n';
    return kExitBudget;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    log << "domain error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace gffpin

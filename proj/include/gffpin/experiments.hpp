#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gffpin/budget.hpp"
#include "gffpin/disorder.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/sampler.hpp"

namespace gffpin {

using ojson = nlohmann::ordered_json;

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitBudget = 3 };

const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 1;
  double k = 3.0;
  int threads = 1;
  std::string out_dir = "out";
  double budget_minutes = 0.0;
  std::string hash;  // over kind, params, seed and k; threads and paths excluded
};

// Command line values override the document; kind must match the document's if both are set.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<double> budget_minutes;
  std::optional<double> beta;
};

ExperimentConfig make_config(const std::string& kind, const nlohmann::json& doc, const ConfigOverrides& o);
ExperimentConfig load_config(const std::string& kind, const std::string& path, const ConfigOverrides& o);
std::string config_hash(const ExperimentConfig& c);

// Parsers for the shared configuration fragments.
DisorderLaw parse_law(const nlohmann::json& j);
BoundaryCondition parse_bc(const nlohmann::json& j);
std::vector<double> parse_list(const nlohmann::json& p, const std::string& key, std::vector<double> fallback);

// Canonical number formatting shared by JSON-lines and CSV output.
std::string format_double(double v);

class CsvTable {
 public:
  CsvTable(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<double>& values);
  void row_text(const std::vector<std::string>& values);

 private:
  std::ofstream out_;
  std::size_t width_;
};

// Single writer for results.jsonl and tables/*.csv; every record is flushed.
class ResultWriter {
 public:
  explicit ResultWriter(const ExperimentConfig& cfg);
  void record(const ojson& point, const ojson& estimates, const ojson& seeds, double wall_seconds);
  CsvTable& table(const std::string& name, const std::vector<std::string>& header);
  const std::string& out_dir() const { return dir_; }
  std::size_t count() const { return n_; }

 private:
  const ExperimentConfig& cfg_;
  std::string dir_;
  std::ofstream jsonl_;
  std::map<std::string, std::unique_ptr<CsvTable>> tables_;
  std::size_t n_ = 0;
};

// Runs one experiment; validation problems return 2, budget exhaustion 3.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace gffpin

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "curio/agent.hpp"
#include "curio/envs.hpp"
#include "curio/model.hpp"

namespace curio {

inline constexpr const char* kConfigSchema = "curio-experiment/1";
inline constexpr int kSummarySchemaVersion = 1;
/// Relative output directories are resolved against this variable when set.
inline constexpr const char* kOutputRootVariable = "CURIO_OUTPUT_ROOT";

struct EnvConfig {
  enum class Type { bandit, rooms };
  Type type = Type::bandit;
  std::uint32_t alphabet_size = 4;
  std::vector<GeneratorSpec> channels;  // bandit
  RoomsSpec rooms;                      // rooms (alphabet kept in sync)
};

struct ExperimentConfig {
  std::string name;
  EnvConfig env;
  ModelSpec model;
  RewardConfig reward;
  ControllerConfig controller;  // rng_seed is derived per seed
  OrchestrationConfig orchestration;
  Timestep lifetime = 1000;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "runs";
  bool write_history = true;
  bool plots = false;
};

/// Thrown with every problem found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Semantic checks against the environment's own description.
std::vector<std::string> validate(const ExperimentConfig& config);

std::unique_ptr<Environment> make_environment(const EnvConfig& env, std::uint64_t seed);

/// Controller seed for a run seed; kept apart from the environment seed.
std::uint64_t controller_seed(std::uint64_t seed);

/// One lifetime for one seed, no files written.
Lifetime run_seed(const ExperimentConfig& config, std::uint64_t seed);

struct SeedSummary {
  std::uint64_t seed = 0;
  double pure_curiosity_return = 0.0;
  double r_ext_total = 0.0;
  /// Step of the first external reward, lifetime + 1 when it never came.
  /// Empty for environments without a goal.
  std::optional<Timestep> steps_to_first_goal;
  bool goal_reached = false;
  std::vector<std::uint64_t> action_visits;
  bool incomplete = false;
};

SeedSummary summarize(const ExperimentConfig& config, std::uint64_t seed, const Lifetime& life);

void write_summary_csv(std::ostream& out, const std::vector<SeedSummary>& rows, std::uint32_t action_count);

/// Static SVG plots: binned mean r_int over time, and action occupancy.
void write_reward_plot(std::ostream& out, const MetricsLog& log, std::size_t bins = 100);
void write_occupancy_plot(std::ostream& out, const MetricsLog& log, std::uint32_t action_count,
                          std::size_t bins = 100);

std::filesystem::path resolve_output_dir(const std::string& dir);

struct RunResult {
  std::filesystem::path directory;
  std::vector<SeedSummary> seeds;
};

/// Validates, then writes seed-N/metrics.csv (+ history.csv, plots) per seed,
/// summary.csv and a normalized config.json. Throws ConfigError before
/// touching the disk when the config is invalid.
RunResult run_experiment(const ExperimentConfig& config);

/// Aggregate statistics of one summary column across seeds.
struct ColumnStats {
  std::string column;
  std::size_t n = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0, min = 0.0, max = 0.0;
};

/// Element at floor(p * (n - 1)) of the sorted values, so the median of an
/// even count is the lower of the two middle values.
double lower_quantile(std::vector<double> values, double p);

/// Reads summary files; rejects mismatched headers or schema versions.
std::vector<ColumnStats> aggregate_summaries(const std::vector<std::filesystem::path>& files);
void write_report_csv(std::ostream& out, const std::vector<ColumnStats>& stats);

}  // namespace curio

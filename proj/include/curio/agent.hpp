#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "curio/envs.hpp"
#include "curio/history.hpp"
#include "curio/model.hpp"
#include "curio/reward.hpp"

namespace curio {

struct ControllerConfig {
  double epsilon = 0.1;
  double alpha = 0.5;
  double gamma = 0.95;
  std::uint64_t rng_seed = 0;
  /// When > 0, the state seen by the policy is (env state, bucket of the last
  /// intrinsic reward) with this many buckets.
  std::uint32_t progress_buckets = 0;
};

/// Tabular epsilon-greedy Q-learner.
class Controller {
 public:
  Controller(std::uint32_t state_count, std::uint32_t action_count, ControllerConfig config);

  std::uint32_t state_count() const noexcept { return states_; }
  std::uint32_t action_count() const noexcept { return actions_; }
  const ControllerConfig& config() const noexcept { return config_; }

  double q(StateId s, ActionId a) const;
  double max_q(StateId s) const;
  /// Lowest action id among the maximizers.
  ActionId greedy(StateId s) const;

  ActionId select_action(StateId s, std::mt19937_64& rng) const;

  /// One-step TD update; terminal transitions bootstrap from 0.
  void q_update(StateId s, ActionId a, double reward, StateId s_next, bool terminal = false);

  std::span<const double> q_table() const noexcept { return q_; }

 private:
  std::size_t index(StateId s, ActionId a) const;
  std::uint32_t states_;
  std::uint32_t actions_;
  ControllerConfig config_;
  std::vector<double> q_;
};

enum class RewardEngine { progress, prediction_error, bayesian_surprise };
enum class PerformanceMeasure { l, ltau };

std::string to_string(RewardEngine e);
RewardEngine parse_reward_engine(const std::string& s);

struct RewardConfig {
  RewardEngine engine = RewardEngine::progress;
  PerformanceMeasure measure = PerformanceMeasure::l;
  ProgressConfig progress;
  KlDirection kl_direction = KlDirection::posterior_prior;
  CombineWeights weights;
};

enum class OrchestrationMode { synchronous, asynchronous };

struct OrchestrationConfig {
  OrchestrationMode mode = OrchestrationMode::synchronous;
  /// Synchronous mode runs the compressor every N controller steps.
  std::uint64_t eval_cadence = 1;
  /// Score on the last W steps; 0 scores the full history.
  std::uint64_t eval_window = 512;
  /// Model updates per compressor round; 0 consumes everything not yet learned.
  /// In synchronous mode the compressor repeats rounds at a boundary until it
  /// has caught up, all of them scored against the same snapshot.
  std::uint64_t improver_steps_per_round = 0;
};

/// The compressor side of the framework: owns the current compressor, learns
/// from history snapshots and turns improvements into reward events.
class CompressorProcess {
 public:
  CompressorProcess(Model initial, RewardConfig reward, OrchestrationConfig orchestration);

  /// Number of history steps already learned from.
  Timestep consumed() const noexcept { return consumed_; }
  const Model& model() const noexcept { return model_; }

  /// One round on the snapshot whose steps [tail_start, tail_start + tail.size())
  /// are given in `tail`. The tail must cover every unlearned step and the
  /// evaluation window. Returns nothing when there is nothing new to learn.
  std::optional<RewardEvent> round(std::span<const Step> tail, Timestep tail_start, Timestep now);

 private:
  double measure(const CodeLengthReport& r) const;
  Model model_;
  RewardConfig reward_;
  OrchestrationConfig orchestration_;
  Timestep consumed_ = 0;
};

struct MetricsRow {
  Timestep t = 0;
  StateId env_state = 0;
  ActionId action = 0;
  Symbol observation = 0;
  double r_ext = 0.0;
  double r_int = 0.0;
  double combined = 0.0;
  /// Present when an event was consumed at this step.
  std::optional<double> c_old, c_new;
  std::optional<Timestep> eval_window_end;
  double cumulative_bits_saved = 0.0;
  bool terminal = false;
};

struct ConsumedEvent {
  RewardEvent event;
  Timestep consumed_at = 0;
};

struct MetricsLog {
  static constexpr const char* kCsvHeader =
      "t,env_state,action,r_ext,r_int,combined,c_old,c_new,eval_window_end,cumulative_bits_saved";

  std::vector<MetricsRow> rows;
  std::vector<ConsumedEvent> consumed;
  std::uint64_t emitted = 0;
  std::uint64_t pending_discarded = 0;
  bool incomplete = false;
  std::string abort_reason;

  void write_csv(std::ostream& out) const;
};

struct Lifetime {
  MetricsLog metrics;
  History history;
  Model final_model;
};

/// Runs exactly T controller steps (fewer only if the environment faults,
/// in which case the log is flagged incomplete).
Lifetime run_lifetime(Environment& env, Controller& controller, const Model& model,
                      const RewardConfig& reward, const OrchestrationConfig& orchestration,
                      Timestep T);

struct PureCuriosityReturn {
  double value = 0.0;
  /// Set when the log contains external reward, i.e. the run was not pure curiosity.
  bool external_reward_seen = false;
};

PureCuriosityReturn pure_curiosity_return(const MetricsLog& metrics);

}  // namespace curio

#include "curio/agent.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "curio/errors.hpp"
#include "curio/textio.hpp"

namespace curio {

Controller::Controller(std::uint32_t state_count, std::uint32_t action_count,
                       ControllerConfig config)
    : states_(state_count), actions_(action_count), config_(config) {
  if (state_count == 0 || action_count == 0) throw DomainError("controller needs states and actions");
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) throw DomainError("epsilon must lie in [0,1]");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0)) throw DomainError("gamma must lie in [0,1]");
  q_.assign(static_cast<std::size_t>(states_) * actions_, 0.0);
}

std::size_t Controller::index(StateId s, ActionId a) const {
  if (s >= states_) throw DomainError("state " + std::to_string(s) + " out of range");
  if (a >= actions_) throw DomainError("action " + std::to_string(a) + " out of range");
  return static_cast<std::size_t>(s) * actions_ + a;
}

double Controller::q(StateId s, ActionId a) const { return q_[index(s, a)]; }

double Controller::max_q(StateId s) const { return q(s, greedy(s)); }

ActionId Controller::greedy(StateId s) const {
  const std::size_t base = index(s, 0);
  ActionId best = 0;
  for (ActionId a = 1; a < actions_; ++a) {
    if (q_[base + a] > q_[base + best]) best = a;
  }
  return best;
}

ActionId Controller::select_action(StateId s, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < config_.epsilon) {
    std::uniform_int_distribution<ActionId> pick(0, actions_ - 1);
    return pick(rng);
  }
  return greedy(s);
}

void Controller::q_update(StateId s, ActionId a, double reward, StateId s_next, bool terminal) {
  if (!std::isfinite(reward)) throw DomainError("reward must be finite");
  const double target = reward + (terminal ? 0.0 : config_.gamma * max_q(s_next));
  double& entry = q_[index(s, a)];
  entry += config_.alpha * (target - entry);
}

std::string to_string(RewardEngine e) {
  switch (e) {
    case RewardEngine::progress: return "progress";
    case RewardEngine::prediction_error: return "prediction_error";
    case RewardEngine::bayesian_surprise: return "bayesian_surprise";
  }
  return "?";
}

RewardEngine parse_reward_engine(const std::string& s) {
  for (auto e : {RewardEngine::progress, RewardEngine::prediction_error,
                 RewardEngine::bayesian_surprise}) {
    if (to_string(e) == s) return e;
  }
  throw DomainError("unknown reward engine '" + s + "'");
}

CompressorProcess::CompressorProcess(Model initial, RewardConfig reward,
                                     OrchestrationConfig orchestration)
    : model_(std::move(initial)), reward_(std::move(reward)), orchestration_(orchestration) {}

double CompressorProcess::measure(const CodeLengthReport& r) const {
  return reward_.measure == PerformanceMeasure::ltau ? performance_ltau(r) : r.total_bits;
}

namespace {

void add_to(std::vector<double>& v, ActionId a, double x) {
  if (a >= v.size()) v.resize(static_cast<std::size_t>(a) + 1, 0.0);
  v[a] += x;
}

}  // namespace

std::optional<RewardEvent> CompressorProcess::round(std::span<const Step> tail,
                                                    Timestep tail_start, Timestep now) {
  const Timestep end = tail_start + tail.size() - 1;  // h_old = h(<= end)
  if (tail.empty() || consumed_ >= end) return std::nullopt;
  if (consumed_ + 1 < tail_start) throw DomainError("snapshot does not cover unlearned steps");

  const Timestep budget = orchestration_.improver_steps_per_round;
  const Timestep learn_to = budget == 0 ? end : std::min(end, consumed_ + budget);
  auto at = [&](Timestep t) -> const Step& { return tail[t - tail_start]; };

  RewardEvent ev;
  ev.issued_at = now;
  ev.evaluated_history_end = end;
  const double eta = reward_.progress.eta;

  if (reward_.engine == RewardEngine::progress) {
    const Timestep window = orchestration_.eval_window;
    Timestep window_start = 1;
    if (window > 0 && end > window) window_start = end - window + 1;
    if (window_start < tail_start) throw DomainError("snapshot does not cover evaluation window");
    const auto scored = tail.subspan(window_start - tail_start);

    const CodeLengthReport before = code_length(model_, scored);  // p_old on h_old
    std::vector<ActionId> learned_actions;
    for (Timestep t = consumed_ + 1; t <= learn_to; ++t) {
      model_.update(at(t));
      learned_actions.push_back(at(t).action);
    }
    consumed_ = learn_to;
    const CodeLengthReport after = code_length(model_, scored);  // p_new on h_old

    ev.c_old = measure(before);
    ev.c_new = measure(after);
    ev.value = compression_progress(ev.c_old, ev.c_new, reward_.progress);
    // Attribution: data-bit savings go to the action of each scored step, the
    // model-bit change is shared equally by the steps just learned.
    for (std::size_t a = 0; a < before.data_bits_by_action.size(); ++a) {
      const double after_bits = a < after.data_bits_by_action.size() ? after.data_bits_by_action[a] : 0.0;
      add_to(ev.by_action, static_cast<ActionId>(a), eta * (before.data_bits_by_action[a] - after_bits));
    }
    const double model_delta = before.model_bits - after.model_bits;
    for (ActionId a : learned_actions) {
      add_to(ev.by_action, a, eta * model_delta / static_cast<double>(learned_actions.size()));
    }
    return ev;
  }

  ev.c_old = std::numeric_limits<double>::quiet_NaN();
  ev.c_new = std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (Timestep t = consumed_ + 1; t <= learn_to; ++t) {
    const Step& s = at(t);
    double r = 0.0;
    if (reward_.engine == RewardEngine::prediction_error) {
      r = prediction_error_reward(model_.predict(s.action), s.observation);
      model_.update(s);
    } else {
      const Distribution prior = model_.predict(s.action);
      model_.learn(s);
      const Distribution posterior = model_.predict(s.action);
      model_.advance(s);
      r = bayesian_surprise(prior, posterior, reward_.kl_direction);
    }
    total += r;
    add_to(ev.by_action, s.action, eta * r);
  }
  consumed_ = learn_to;
  ev.value = eta * total;
  return ev;
}

namespace {

StateId augmented_state(StateId env_state, double last_r_int, std::uint32_t buckets) {
  if (buckets <= 1) return env_state;
  std::uint32_t b = 0;
  if (last_r_int > 0.0) {
    b = 1 + static_cast<std::uint32_t>(std::floor(std::log2(1.0 + last_r_int)));
    if (b >= buckets) b = buckets - 1;
  }
  return env_state * buckets + b;
}

std::string opt_double(const std::optional<double>& v) {
  if (!v || std::isnan(*v)) return "";
  return format_double(*v);
}

struct StepOutcome {
  double r_int = 0.0;
  std::optional<double> c_old, c_new;
  std::optional<Timestep> eval_end;
  double bits_saved = 0.0;
};

StepOutcome consume(std::deque<RewardEvent>& queue, Timestep t, MetricsLog& log) {
  StepOutcome out;
  while (!queue.empty()) {
    RewardEvent ev = std::move(queue.front());
    queue.pop_front();
    out.r_int += ev.value;
    if (!out.c_old) out.c_old = ev.c_old;
    out.c_new = ev.c_new;
    out.eval_end = ev.evaluated_history_end;
    if (!std::isnan(ev.c_old) && !std::isnan(ev.c_new)) out.bits_saved += ev.c_old - ev.c_new;
    log.consumed.push_back({std::move(ev), t});
  }
  return out;
}

}  // namespace

void MetricsLog::write_csv(std::ostream& out) const {
  out << kCsvHeader << '\n';
  std::string line;
  for (const MetricsRow& r : rows) {
    line.clear();
    line += std::to_string(r.t);
    line += ',';
    line += std::to_string(r.env_state);
    line += ',';
    line += std::to_string(r.action);
    line += ',';
    line += format_double(r.r_ext);
    line += ',';
    line += format_double(r.r_int);
    line += ',';
    line += format_double(r.combined);
    line += ',';
    line += opt_double(r.c_old);
    line += ',';
    line += opt_double(r.c_new);
    line += ',';
    if (r.eval_window_end) line += std::to_string(*r.eval_window_end);
    line += ',';
    line += format_double(r.cumulative_bits_saved);
    line += '\n';
    out << line;
  }
}

Lifetime run_lifetime(Environment& env, Controller& controller, const Model& model,
                      const RewardConfig& reward, const OrchestrationConfig& orchestration,
                      Timestep T) {
  if (T < 1) throw DomainError("lifetime T must be at least 1");
  if (orchestration.eval_cadence < 1) throw DomainError("eval_cadence must be at least 1");
  const EnvDescription desc = env.describe();
  if (desc.alphabet_size != model.alphabet_size()) {
    throw DomainError("environment alphabet " + std::to_string(desc.alphabet_size) +
                      " does not match model alphabet " + std::to_string(model.alphabet_size()));
  }
  const std::uint32_t buckets = controller.config().progress_buckets;
  const std::uint32_t policy_states = desc.state_count * std::max<std::uint32_t>(buckets, 1);
  if (controller.state_count() < policy_states || controller.action_count() != desc.action_count) {
    throw DomainError("controller table does not match environment");
  }

  Lifetime life{MetricsLog{}, History(desc.alphabet_size), model};
  MetricsLog& log = life.metrics;
  log.rows.reserve(T);
  std::mt19937_64 policy_rng(controller.config().rng_seed);
  CompressorProcess compressor(model, reward, orchestration);
  double last_r_int = 0.0;
  double cumulative_saved = 0.0;

  // Controller step shared by both modes; `poll` supplies r_int(t).
  auto controller_step = [&](Timestep t, auto&& publish, auto&& poll) -> bool {
    const StateId env_s = env.state();
    const StateId s = augmented_state(env_s, last_r_int, buckets);
    const ActionId a = controller.select_action(s, policy_rng);
    EnvStep es;
    try {
      es = env.step(a);
    } catch (const std::exception& e) {
      log.incomplete = true;
      log.abort_reason = e.what();
      return false;
    }
    publish(Step{t, es.observation, a, es.reward_ext, 0.0});
    const StepOutcome got = poll(t);
    const double combined = combine(es.reward_ext, got.r_int, reward.weights);
    last_r_int = got.r_int;
    const StateId s_next = augmented_state(es.state, last_r_int, buckets);
    controller.q_update(s, a, combined, s_next, es.terminal);
    cumulative_saved += got.bits_saved;
    MetricsRow row;
    row.t = t;
    row.env_state = env_s;
    row.action = a;
    row.observation = es.observation;
    row.r_ext = es.reward_ext;
    row.r_int = got.r_int;
    row.combined = combined;
    row.c_old = got.c_old;
    row.c_new = got.c_new;
    row.eval_window_end = got.eval_end;
    row.cumulative_bits_saved = cumulative_saved;
    row.terminal = es.terminal;
    log.rows.push_back(row);
    return true;
  };

  if (orchestration.mode == OrchestrationMode::synchronous) {
    std::vector<Step> observed;  // the compressor's view of h(<= t)
    observed.reserve(T);
    std::deque<RewardEvent> queue;
    for (Timestep t = 1; t <= T; ++t) {
      const bool ok = controller_step(
          t, [&](const Step& s) { observed.push_back(s); },
          [&](Timestep now) {
            if (now % orchestration.eval_cadence == 0) {
              while (auto ev = compressor.round(observed, 1, now)) {
                queue.push_back(std::move(*ev));
                ++log.emitted;
              }
            }
            return consume(queue, now, log);
          });
      if (!ok) break;
      const MetricsRow& r = log.rows.back();
      life.history.append(r.observation, r.action, r.r_ext, r.r_int);
    }
    log.pending_discarded = queue.size();
    life.final_model = compressor.model();
    return life;
  }

  // Asynchronous: the compressor runs on its own thread and sees the history
  // only through snapshots; rewards flow back through an ordered queue.
  std::mutex history_mutex;
  std::condition_variable history_grew;
  std::vector<Step> shared_steps;
  shared_steps.reserve(T);
  std::mutex queue_mutex;
  std::deque<RewardEvent> queue;
  std::atomic<Timestep> now{0};
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> emitted{0};

  std::thread worker([&] {
    const Timestep window = orchestration.eval_window;
    while (true) {
      std::vector<Step> tail;
      Timestep tail_start = 1;
      {
        std::unique_lock lock(history_mutex);
        history_grew.wait(lock, [&] { return stop.load() || shared_steps.size() > compressor.consumed(); });
        if (stop.load()) return;
        const Timestep end = shared_steps.size();
        Timestep from = compressor.consumed() + 1;
        if (window > 0) from = std::min(from, end > window ? end - window + 1 : Timestep{1});
        else from = 1;
        tail_start = from;
        tail.assign(shared_steps.begin() + static_cast<std::ptrdiff_t>(from - 1), shared_steps.end());
      }
      auto ev = compressor.round(tail, tail_start, now.load());
      if (ev) {
        ev->issued_at = std::max(now.load(), ev->evaluated_history_end);
        std::lock_guard lock(queue_mutex);
        queue.push_back(std::move(*ev));
        emitted.fetch_add(1);
      }
    }
  });

  Step pending;
  for (Timestep t = 1; t <= T; ++t) {
    now.store(t);
    const bool ok = controller_step(
        t, [&](const Step& s) { pending = s; },
        [&](Timestep at) {
          std::deque<RewardEvent> ready;
          {
            std::lock_guard lock(queue_mutex);
            ready.swap(queue);
          }
          return consume(ready, at, log);
        });
    if (!ok) break;
    const MetricsRow& r = log.rows.back();
    life.history.append(r.observation, r.action, r.r_ext, r.r_int);
    {
      std::lock_guard lock(history_mutex);
      pending.reward_int = r.r_int;
      shared_steps.push_back(pending);
    }
    history_grew.notify_one();
  }
  {
    std::lock_guard lock(history_mutex);
    stop.store(true);
  }
  history_grew.notify_one();
  worker.join();
  log.emitted = emitted.load();
  log.pending_discarded = queue.size();
  life.final_model = compressor.model();
  return life;
}

PureCuriosityReturn pure_curiosity_return(const MetricsLog& metrics) {
  PureCuriosityReturn out;
  for (const MetricsRow& r : metrics.rows) {
    out.value += r.r_int;
    if (r.r_ext != 0.0) out.external_reward_seen = true;
  }
  return out;
}

}  // namespace curio

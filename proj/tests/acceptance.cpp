// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curio/art.hpp"
#include "curio/experiment.hpp"

using namespace curio;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr double kOracleTolerance = 1e-9;
constexpr double kOracleSeconds = 1.0;
constexpr double kTelescopeTolerance = 1e-9;
constexpr double kBoredomRatio = 0.01;
constexpr double kPhaseFraction = 0.2;
constexpr double kErrorPersistence = 0.5;
constexpr double kInterestingnessBound = 1e-3;
constexpr double kKlValue = 0.18872;
constexpr double kKlTolerance = 1e-5;
constexpr double kKlZero = 1e-12;
constexpr int kKlPairs = 100000;
constexpr double kRoomsSeconds = 300.0;
constexpr double kArtTolerance = 1e-9;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) { return lower_quantile(std::move(v), 0.5); }

template <class F>
auto parallel_over(const std::vector<std::uint64_t>& seeds, F f) {
  using R = decltype(f(seeds.front()));
  std::vector<std::future<R>> jobs;
  for (auto s : seeds) jobs.push_back(std::async(std::launch::async, f, s));
  std::vector<R> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

ExperimentConfig config(const char* name) { return load_config(fs::path(CURIO_CONFIG_DIR) / name); }

std::vector<Step> steps_of(const History& h) { return h.slice(1, h.length()).steps; }

double log2_factorial(unsigned n) { return std::lgamma(n + 1.0) / std::log(2.0); }

void mdl_oracle() {
  ModelSpec spec;  // markov(0), alpha 1
  const Model m(spec, 2);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (unsigned bits = 0; bits < 1024; ++bits) {
    std::vector<Step> steps;
    unsigned ones = 0;
    for (unsigned i = 0; i < 10; ++i) {
      const Symbol s = (bits >> i) & 1u;
      ones += s;
      steps.push_back(Step{i + 1, s, 0, 0, 0});
    }
    // Laplace: P = n0! n1! / (n+1)!, i.e. bits = log2((n+1) * C(n, n1))
    const double closed = std::log2(11.0) + log2_factorial(10) - log2_factorial(ones) - log2_factorial(10 - ones);
    worst = std::max(worst, std::abs(code_length(m, steps).data_bits - closed));
  }
  const double secs = seconds_since(t0);
  report(1, "MDL oracle equivalence", worst <= kOracleTolerance && secs < kOracleSeconds,
         fmt("max |diff| %.3g bits over 1024 sequences (tol %.0e), %.3f s", worst, kOracleTolerance, secs));
}

void telescoping() {
  struct Case {
    std::string label;
    std::function<std::unique_ptr<Environment>()> env;
    ModelSpec model;
    std::uint32_t states, actions;
  };
  ModelSpec channel;
  channel.order = 1;
  channel.conditioning = Conditioning::channel;
  ModelSpec transition;
  transition.order = 1;
  transition.conditioning = Conditioning::transition;
  ModelSpec dict;
  dict.kind = ModelKind::dictionary;
  RoomsSpec rooms;
  rooms.map = {"S.a.", ".N..", "b..G"};
  rooms.patterns['a'] = GeneratorSpec::periodic_of({1, 2});
  rooms.patterns['b'] = GeneratorSpec::biased_coin_of(0.8, 1, 2);
  rooms.alphabet_size = 4;
  rooms.goal_symbol = 3;

  const std::vector<Case> cases = {
      {"bandit/markov1-channel",
       [] {
         return std::make_unique<ChannelBanditEnv>(
             4,
             std::vector<GeneratorSpec>{GeneratorSpec::constant_of(0), GeneratorSpec::periodic_of({0, 1, 2, 3}),
                                        GeneratorSpec::biased_coin_of(0.9), GeneratorSpec::iid_uniform()},
             11);
       },
       channel, 1, 4},
      {"rooms/markov1-transition", [&] { return std::make_unique<RoomsWorldEnv>(rooms, 12); }, transition, 12, 4},
      {"pi-bandit/dictionary",
       [] {
         return std::make_unique<ChannelBanditEnv>(
             2, std::vector<GeneratorSpec>{GeneratorSpec::pi_digits(), GeneratorSpec::periodic_of({0, 0, 1})}, 13);
       },
       dict, 1, 2},
  };

  const Timestep T = 400;
  OrchestrationConfig orch;
  orch.eval_window = 0;
  orch.eval_cadence = T;
  orch.improver_steps_per_round = 7;
  RewardConfig reward;  // f = a - b, eta 1, no clipping

  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    auto env = c.env();
    ControllerConfig cc;
    cc.rng_seed = 5;
    Controller ctl(c.states, c.actions, cc);
    const Model initial(c.model, env->describe().alphabet_size);
    const Lifetime life = run_lifetime(*env, ctl, initial, reward, orch, T);
    double sum = 0.0;
    for (const auto& row : life.metrics.rows) sum += row.r_int;
    const auto h = steps_of(life.history);
    const double expected = performance_l(initial, h) - performance_l(life.final_model, h);
    const double diff = std::abs(sum - expected);
    pass = pass && diff <= kTelescopeTolerance && life.metrics.consumed.size() > 1;
    detail += fmt("%s %zu rounds |diff| %.2g; ", c.label.c_str(), life.metrics.consumed.size(), diff);
  }
  report(2, "Telescoping identity", pass, detail + fmt("tol %.0e", kTelescopeTolerance));
}

struct BanditStats {
  double constant_ratio = 0.0, noise_ratio = 0.0;
  std::vector<double> early_fraction, total_fraction;
  double noise_error_ratio = 0.0;
};

// Per-seed bandit measurements shared by the boredom and pathology criteria.
BanditStats bandit_stats(const Lifetime& life, Timestep T) {
  BanditStats s;
  const auto& ev = life.metrics.consumed;
  const std::size_t E = ev.size(), fifth = E / 5;
  const std::size_t A = 4;
  std::vector<double> peak(A, 0.0), late(A, 0.0);
  for (std::size_t i = 0; i < E; ++i) {
    const auto& by = ev[i].event.by_action;
    for (std::size_t a = 0; a < by.size() && a < A; ++a) {
      if (i < fifth) peak[a] = std::max(peak[a], by[a]);
      if (i >= E - fifth) late[a] += by[a] / static_cast<double>(fifth);
    }
  }
  s.constant_ratio = late[0] / peak[0];
  s.noise_ratio = late[3] / peak[3];

  // Mean reward per noise-channel evaluation, first vs last fifth.
  double first = 0.0, last = 0.0;
  int n_first = 0, n_last = 0;
  for (std::size_t i = 0; i < E; ++i) {
    const Timestep t = ev[i].event.evaluated_history_end;
    if (life.metrics.rows[t - 1].action != 3 || ev[i].event.by_action.size() < 4) continue;
    if (i < fifth) first += ev[i].event.by_action[3], ++n_first;
    if (i >= E - fifth) last += ev[i].event.by_action[3], ++n_last;
  }
  s.noise_error_ratio = n_first && n_last ? (last / n_last) / (first / n_first) : 0.0;

  std::vector<double> early(A, 0.0), total(A, 0.0);
  const Timestep phase = static_cast<Timestep>(kPhaseFraction * T);
  for (const auto& r : life.metrics.rows) {
    total[r.action] += 1.0 / T;
    if (r.t <= phase) early[r.action] += 1.0 / phase;
  }
  s.early_fraction = early;
  s.total_fraction = total;
  return s;
}

std::size_t modal(const std::vector<BanditStats>& runs, bool early) {
  std::size_t best = 0;
  double best_v = -1.0;
  for (std::size_t a = 0; a < 4; ++a) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(early ? r.early_fraction[a] : r.total_fraction[a]);
    if (median(v) > best_v) best_v = median(v), best = a;
  }
  return best;
}

std::vector<double> column(const std::vector<BanditStats>& runs, double BanditStats::*field) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.*field);
  return v;
}

void bandit_criteria() {
  const auto progress = config("bandit_progress.json");
  const auto error = config("bandit_error.json");
  auto run = [](const ExperimentConfig& c) {
    return parallel_over(c.seeds, [&c](std::uint64_t seed) { return bandit_stats(run_seed(c, seed), c.lifetime); });
  };
  const auto p = run(progress);
  const auto e = run(error);
  static const char* names[] = {"constant", "periodic", "biased_coin", "iid_uniform"};

  const auto cr = column(p, &BanditStats::constant_ratio), nr = column(p, &BanditStats::noise_ratio);
  const double cm = median(cr), nm = median(nr);
  report(3, "Boredom at both extremes", cm < kBoredomRatio && nm < kBoredomRatio,
         fmt("%zu seeds; final/peak attributable r_int median constant %.4f%% (max %.4f%%), noise %.4f%% "
             "(max %.4f%%), bound %.0f%%",
             p.size(), 100 * cm, 100 * *std::max_element(cr.begin(), cr.end()), 100 * nm,
             100 * *std::max_element(nr.begin(), nr.end()), 100 * kBoredomRatio));

  const double persist = median(column(e, &BanditStats::noise_error_ratio));
  const std::size_t error_modal = modal(e, false);
  const std::size_t progress_modal = modal(p, true);
  const bool learnable = progress_modal == 1 || progress_modal == 2;
  report(4, "Error-reward pathology", persist > kErrorPersistence && error_modal == 3 && learnable,
         fmt("%zu seeds; error engine noise reward final/initial %.3f (need > %.2f), modal channel %s; "
             "progress engine modal channel in first %.0f%% is %s",
             e.size(), persist, kErrorPersistence, names[error_modal], 100 * kPhaseFraction, names[progress_modal]));
}

void interestingness_decay() {
  const std::uint32_t A = 8;
  StreamGenerator gen(GeneratorSpec::periodic_of({0, 1, 2, 3, 4, 5, 6, 7}), A, 0);
  ModelSpec spec;
  spec.order = 1;
  Model observer(spec, A);
  std::vector<Step> stream;
  for (Timestep t = 1; t <= 4000; ++t) stream.push_back(Step{t, gen.next(), 0, 0, 0});
  // Beauty of a fixed stretch of data under the observer as it keeps learning.
  const std::span<const Step> data = std::span<const Step>(stream).first(64);
  std::vector<double> b;
  for (Timestep t = 1; t <= stream.size(); ++t) {
    observer.update(stream[t - 1]);
    if (t % 8 == 0) b.push_back(beauty(observer, data));
  }
  const auto in = interestingness(b);
  const std::size_t from = in.size() - in.size() / 5;
  double mean_abs = 0.0;
  for (std::size_t i = from; i < in.size(); ++i) mean_abs += std::abs(in[i]) / static_cast<double>(in.size() - from);
  const double early = std::abs(in.front());
  report(5, "Interestingness decays to zero", mean_abs < kInterestingnessBound,
         fmt("final-window mean |I| %.3g (bound %.0e), first |I| %.3g, final beauty %.4f bits/symbol", mean_abs,
             kInterestingnessBound, early, b.back()));
}

void kl_engine() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> dim(2, 10);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  auto draw = [&](std::size_t n) {
    Distribution d(n);
    double s = 0.0;
    for (auto& v : d) s += v = u(rng);
    for (auto& v : d) v /= s;
    return d;
  };
  int negative = 0, zero_unequal = 0, nonzero_equal = 0;
  for (int i = 0; i < kKlPairs; ++i) {
    const auto p = draw(dim(rng));
    const auto q = i % 10 == 0 ? p : draw(p.size());
    const double kl = bayesian_surprise(p, q);
    if (kl < 0.0) ++negative;
    if (p == q && kl > kKlZero) ++nonzero_equal;
    if (p != q && kl <= kKlZero) ++zero_unequal;
  }
  const double v = bayesian_surprise({0.5, 0.5}, {0.75, 0.25});
  const bool pass = negative == 0 && nonzero_equal == 0 && zero_unequal == 0 && std::abs(v - kKlValue) <= kKlTolerance;
  report(6, "KL engine correctness", pass,
         fmt("%d pairs: %d negative, %d equal pairs nonzero, %d unequal pairs zero; (0.5,0.5)->(0.75,0.25) = %.6f", kKlPairs,
             negative, nonzero_equal, zero_unequal, v));
}

void rooms_speedup() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto curious = config("rooms_curious.json");
  const auto baseline = config("rooms_baseline.json");
  auto steps = [](const ExperimentConfig& c) {
    const auto rows = parallel_over(c.seeds, [&c](std::uint64_t seed) {
      return summarize(c, seed, run_seed(c, seed));
    });
    std::vector<double> v;
    int reached = 0;
    for (const auto& r : rows) {
      v.push_back(static_cast<double>(*r.steps_to_first_goal));
      reached += r.goal_reached;
    }
    return std::pair{v, reached};
  };
  const auto [with, reached_with] = steps(curious);
  const auto [without, reached_without] = steps(baseline);
  const double secs = seconds_since(t0);
  const double m1 = median(with), m0 = median(without);
  report(7, "Curiosity speeds external reward", m1 < m0 && secs < kRoomsSeconds && with.size() >= 30,
         fmt("%zu seeds; median steps-to-goal lambda=1 %.0f (%d reached) vs lambda=0 %.0f (%d reached), "
             "ratio %.3f, censored at %llu, %.1f s",
             with.size(), m1, reached_with, m0, reached_without, m1 / m0,
             static_cast<unsigned long long>(curious.lifetime + 1), secs));
}

void art_invariants() {
  namespace art = curio::art;
  std::vector<std::string> problems;
  auto svg = [](const art::Drawing& d) {
    std::ostringstream a, b;
    art::write_svg(d, a);
    art::write_report_json(d, b);
    return a.str() + b.str();
  };

  for (unsigned depth = 0; depth <= 4; ++depth) {
    const auto face = art::face_grid(depth);
    for (const auto& side : art::side_intervals(face)) {
      if (side.size() != art::kGridIntervals) problems.push_back(fmt("face %u: %zu intervals on a side", depth, side.size()));
    }
    for (const auto& p : face.primitives) {
      if (p.provenance->rule == art::Rule::frame) continue;
      const double compressed = (p.b.y - p.a.y) / (p.b.x - p.a.x);
      const double m = compressed / art::kVerticalScale;
      bool known = false;
      for (double s : {1.0, -1.0, 8.0, -8.0, 0.125, -0.125}) known |= std::abs(m - s) <= kArtTolerance;
      if (!known) problems.push_back(fmt("face %u: slope %.12g", depth, m));
      if (std::abs(compressed - art::kVerticalScale * art::family_slope(p.provenance->family)) > kArtTolerance)
        problems.push_back(fmt("face %u: compressed slope %.12g", depth, compressed));
    }
    for (const auto& f : art::verify_provenance(face)) problems.push_back(fmt("face %u: %s", depth, f.c_str()));
    if (svg(face) != svg(art::face_grid(depth))) problems.push_back(fmt("face %u: rerun differs", depth));
  }

  const auto zero = art::fractal_circles(0);
  const auto& c0 = zero.primitives[0];
  const auto& c1 = zero.primitives[1];
  if (zero.count(art::PrimitiveKind::circle) != 2) problems.push_back("depth-0 circle count");
  if (std::abs(c0.radius - c1.radius) > kArtTolerance) problems.push_back("depth-0 radii differ");
  if (std::abs(c1.center.x - (c0.center.x - c0.radius)) > kArtTolerance || std::abs(c1.center.y - c0.center.y) > kArtTolerance)
    problems.push_back("depth-0 second circle not on the leftmost point");
  for (unsigned depth = 0; depth <= 3; ++depth) {
    const auto d = art::fractal_circles(depth);
    for (const auto& f : art::verify_provenance(d)) problems.push_back(fmt("circles %u: %s", depth, f.c_str()));
    if (svg(d) != svg(art::fractal_circles(depth))) problems.push_back(fmt("circles %u: rerun differs", depth));
  }
  report(8, "Art construction invariants", problems.empty(),
         problems.empty() ? fmt("face grid depths 0-4 and fractal circles depths 0-3 clean (tol %.0e)", kArtTolerance)
                          : fmt("%zu problems, first: %s", problems.size(), problems.front().c_str()));
}

std::vector<std::pair<std::string, std::string>> directory_bytes(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    // config.json records its own output_dir, so only the CSVs are compared
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out.emplace_back(fs::relative(e.path(), root).string(), s.str());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void determinism() {
  const fs::path tmp = fs::temp_directory_path() / fmt("curio-acceptance-%llu",
                                                       static_cast<unsigned long long>(std::random_device{}()));
  bool pass = true;
  std::size_t files = 0;
  std::string detail;
  for (const char* name : {"bandit_progress.json", "bandit_surprise.json", "rooms_curious.json"}) {
    ExperimentConfig c = config(name);
    c.lifetime = 3000;
    c.seeds = {c.seeds.at(0), c.seeds.at(1)};
    std::vector<std::pair<std::string, std::string>> runs[2];
    for (int k = 0; k < 2; ++k) {
      c.output_dir = (tmp / name / std::to_string(k)).string();
      run_experiment(c);
      runs[k] = directory_bytes(c.output_dir);
    }
    const bool same = runs[0] == runs[1] && !runs[0].empty();
    pass = pass && same;
    files += runs[0].size();
    detail += fmt("%s %s; ", name, same ? "identical" : "DIFFERS");
  }
  std::error_code ec;
  fs::remove_all(tmp, ec);
  report(9, "Determinism", pass, detail + fmt("%zu CSV files compared byte for byte", files));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  mdl_oracle();
  telescoping();
  bandit_criteria();
  interestingness_decay();
  kl_engine();
  rooms_speedup();
  art_invariants();
  determinism();
  std::printf("%d of 9 criteria failed (%.1f s)\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}

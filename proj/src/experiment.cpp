#include "curio/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "curio/errors.hpp"
#include "curio/textio.hpp"

namespace curio {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid experiment config (" + std::to_string(errors.size()) + " problem" +
                    (errors.size() == 1 ? "" : "s") + ")";
  for (const auto& e : errors) out += "\n  - " + e;
  return out;
}

// Collects typed fields from a JSON object, recording every problem.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    error(path, "expected an object");
    return false;
  }

  void only(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        error(path + "." + k, "unknown key");
    }
  }

  template <class T>
  bool get(const json& obj, const std::string& path, const char* key, T& out, bool required = false) {
    const auto it = obj.find(key);
    const std::string where = path.empty() ? key : path + "." + key;
    if (it == obj.end()) {
      if (required) error(where, "missing");
      return false;
    }
    const json& v = *it;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return error(where, "expected true or false"), false;
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return error(where, "expected a string"), false;
      out = v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return error(where, "expected a number"), false;
      out = v.get<T>();
    } else {
      static_assert(std::is_unsigned_v<T>);
      if (!v.is_number_unsigned()) return error(where, "expected a non-negative integer"), false;
      const auto raw = v.get<std::uint64_t>();
      if (raw > std::numeric_limits<T>::max()) return error(where, "value too large"), false;
      out = static_cast<T>(raw);
    }
    return true;
  }

  template <class Parse, class T>
  void get_enum(const json& obj, const std::string& path, const char* key, T& out, Parse parse) {
    std::string s;
    if (!get(obj, path, key, s)) return;
    try {
      out = parse(s);
    } catch (const DomainError& e) {
      error(path + "." + key, e.what());
    }
  }

 private:
  std::vector<std::string>& errors_;
};

std::vector<Symbol> parse_symbols(const json& v, const std::string& where, Reader& r) {
  std::vector<Symbol> out;
  if (!v.is_array()) {
    r.error(where, "expected an array of symbols");
    return out;
  }
  for (const auto& s : v) {
    if (!s.is_number_unsigned()) {
      r.error(where, "symbols are non-negative integers");
      return {};
    }
    out.push_back(static_cast<Symbol>(s.get<std::uint64_t>()));
  }
  return out;
}

GeneratorSpec parse_generator(const json& j, const std::string& path, Reader& r) {
  GeneratorSpec g;
  if (!r.object(j, path)) return g;
  r.only(j, path, {"kind", "symbol", "pattern", "p", "heads", "tails", "transition", "start"});
  std::string kind;
  if (!r.get(j, path, "kind", kind, true)) return g;
  try {
    g.kind = parse_generator_kind(kind);
  } catch (const DomainError& e) {
    r.error(path + ".kind", e.what());
    return g;
  }
  r.get(j, path, "symbol", g.symbol);
  if (j.contains("pattern")) g.pattern = parse_symbols(j["pattern"], path + ".pattern", r);
  r.get(j, path, "p", g.p);
  r.get(j, path, "heads", g.heads);
  r.get(j, path, "tails", g.tails);
  r.get(j, path, "start", g.start);
  if (j.contains("transition")) {
    const json& t = j["transition"];
    bool ok = t.is_array();
    for (const auto& row : t) {
      ok = ok && row.is_array();
      std::vector<double> v;
      for (const auto& x : row) {
        ok = ok && x.is_number();
        if (x.is_number()) v.push_back(x.get<double>());
      }
      g.transition.push_back(std::move(v));
    }
    if (!ok) r.error(path + ".transition", "expected a matrix of numbers");
  }
  return g;
}

json generator_json(const GeneratorSpec& g) {
  json j;
  j["kind"] = to_string(g.kind);
  switch (g.kind) {
    case GeneratorSpec::Kind::constant: j["symbol"] = g.symbol; break;
    case GeneratorSpec::Kind::periodic: j["pattern"] = g.pattern; break;
    case GeneratorSpec::Kind::biased_coin:
      j["p"] = g.p;
      j["heads"] = g.heads;
      j["tails"] = g.tails;
      break;
    case GeneratorSpec::Kind::markov_chain:
      j["transition"] = g.transition;
      j["start"] = g.start;
      break;
    case GeneratorSpec::Kind::iid_uniform:
    case GeneratorSpec::Kind::pi_digits: break;
  }
  return j;
}

PerformanceMeasure parse_measure(const std::string& s) {
  if (s == "l") return PerformanceMeasure::l;
  if (s == "ltau") return PerformanceMeasure::ltau;
  throw DomainError("unknown performance measure '" + s + "' (l, ltau)");
}

OrchestrationMode parse_mode(const std::string& s) {
  if (s == "synchronous") return OrchestrationMode::synchronous;
  if (s == "asynchronous") return OrchestrationMode::asynchronous;
  throw DomainError("unknown orchestration mode '" + s + "' (synchronous, asynchronous)");
}

KlDirection parse_kl(const std::string& s) {
  if (s == "posterior_prior") return KlDirection::posterior_prior;
  if (s == "prior_posterior") return KlDirection::prior_posterior;
  throw DomainError("unknown KL direction '" + s + "' (posterior_prior, prior_posterior)");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::ofstream open_for_write(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

double parse_number(std::string_view s, std::size_t line, const std::string& column) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw ParseError(line, "column " + column + ": not a number '" + tmp + "'");
  return v;
}

// Minimal SVG chart: one polyline per series on a shared [0,1] x-axis.
void write_chart(std::ostream& out, const std::string& title, const std::vector<std::string>& labels,
                 const std::vector<std::vector<double>>& series) {
  double lo = 0.0, hi = 0.0;
  for (const auto& s : series)
    for (double v : s) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double W = 640, H = 360, L = 60, R = 140, T = 30, B = 40;
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto fx = [&](std::size_t i, std::size_t n) { return L + (W - L - R) * (n <= 1 ? 0.0 : double(i) / (n - 1)); };
  auto fy = [&](double v) { return T + (H - T - B) * (1.0 - (v - lo) / (hi - lo)); };
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" viewBox=\"0 0 640 360\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"360\" fill=\"white\"/>\n"
      << "<text x=\"" << L << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n"
      << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - T - B)
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"4\" y=\"" << T + 10 << "\" font-size=\"10\">" << format_fixed(hi, 3) << "</text>\n"
      << "<text x=\"4\" y=\"" << H - B << "\" font-size=\"10\">" << format_fixed(lo, 3) << "</text>\n"
      << "<text x=\"" << L << "\" y=\"" << H - 10 << "\" font-size=\"10\">time (binned)</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* c = colours[k % 6];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
    for (std::size_t i = 0; i < series[k].size(); ++i) {
      if (i) out << ' ';
      out << format_fixed(fx(i, series[k].size()), 2) << ',' << format_fixed(fy(series[k][i]), 2);
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 14 * (k + 1) << "\" font-size=\"11\" fill=\"" << c
        << "\">" << labels[k] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

ExperimentConfig parse_config(const json& j) {
  std::vector<std::string> errors;
  Reader r(errors);
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigError({"config: expected a JSON object"});
  r.only(j, "config", {"schema", "name", "env", "model", "reward", "controller", "orchestration", "lifetime",
                       "seeds", "output_dir", "write_history", "plots"});
  std::string schema;
  if (r.get(j, "", "schema", schema, true) && schema != kConfigSchema)
    r.error("schema", "expected '" + std::string(kConfigSchema) + "', found '" + schema + "'");
  r.get(j, "", "name", c.name);
  r.get(j, "", "lifetime", c.lifetime, true);
  r.get(j, "", "output_dir", c.output_dir);
  r.get(j, "", "write_history", c.write_history);
  r.get(j, "", "plots", c.plots);
  if (!j.contains("seeds")) {
    r.error("seeds", "missing");
  } else if (!j["seeds"].is_array()) {
    r.error("seeds", "expected an array of non-negative integers");
  } else {
    for (const auto& s : j["seeds"]) {
      if (!s.is_number_unsigned()) {
        r.error("seeds", "expected an array of non-negative integers");
        break;
      }
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  }

  if (!j.contains("env")) {
    r.error("env", "missing");
  } else if (r.object(j["env"], "env")) {
    const json& e = j["env"];
    r.only(e, "env", {"type", "alphabet", "channels", "map", "patterns", "dark_symbol", "goal_symbol",
                      "goal_reward", "horizon"});
    std::string type;
    if (r.get(e, "env", "type", type, true)) {
      if (type == "bandit") {
        c.env.type = EnvConfig::Type::bandit;
      } else if (type == "rooms") {
        c.env.type = EnvConfig::Type::rooms;
      } else {
        r.error("env.type", "unknown environment '" + type + "' (bandit, rooms)");
      }
    }
    r.get(e, "env", "alphabet", c.env.alphabet_size, true);
    if (c.env.type == EnvConfig::Type::bandit) {
      if (!e.contains("channels") || !e["channels"].is_array()) {
        r.error("env.channels", "expected an array of generators");
      } else {
        for (std::size_t i = 0; i < e["channels"].size(); ++i)
          c.env.channels.push_back(parse_generator(e["channels"][i], "env.channels[" + std::to_string(i) + "]", r));
      }
    } else {
      RoomsSpec& rs = c.env.rooms;
      if (!e.contains("map") || !e["map"].is_array()) {
        r.error("env.map", "expected an array of strings");
      } else {
        for (const auto& row : e["map"]) {
          if (!row.is_string()) {
            r.error("env.map", "expected an array of strings");
            break;
          }
          rs.map.push_back(row.get<std::string>());
        }
      }
      if (e.contains("patterns")) {
        if (r.object(e["patterns"], "env.patterns")) {
          for (const auto& [k, v] : e["patterns"].items()) {
            if (k.size() != 1 || k[0] < 'a' || k[0] > 'z') {
              r.error("env.patterns." + k, "pattern keys are single letters a-z");
              continue;
            }
            rs.patterns[k[0]] = parse_generator(v, "env.patterns." + k, r);
          }
        }
      }
      r.get(e, "env", "dark_symbol", rs.dark_symbol);
      r.get(e, "env", "goal_symbol", rs.goal_symbol);
      r.get(e, "env", "goal_reward", rs.goal_reward);
      r.get(e, "env", "horizon", rs.horizon);
      rs.alphabet_size = c.env.alphabet_size;
    }
  }

  if (j.contains("model") && r.object(j["model"], "model")) {
    const json& m = j["model"];
    r.only(m, "model", {"kind", "order", "alpha", "conditioning", "bits_per_parameter", "constant_symbol",
                        "constant_bits", "epsilon"});
    r.get_enum(m, "model", "kind", c.model.kind, parse_model_kind);
    r.get(m, "model", "order", c.model.order);
    r.get(m, "model", "alpha", c.model.alpha);
    r.get_enum(m, "model", "conditioning", c.model.conditioning, parse_conditioning);
    r.get(m, "model", "bits_per_parameter", c.model.bits_per_parameter);
    r.get(m, "model", "constant_symbol", c.model.constant_symbol);
    r.get(m, "model", "constant_bits", c.model.constant_bits);
    r.get(m, "model", "epsilon", c.model.epsilon);
  }

  if (j.contains("reward") && r.object(j["reward"], "reward")) {
    const json& w = j["reward"];
    r.only(w, "reward", {"engine", "measure", "eta", "clip_negative", "lambda", "kl_direction"});
    r.get_enum(w, "reward", "engine", c.reward.engine, parse_reward_engine);
    r.get_enum(w, "reward", "measure", c.reward.measure, parse_measure);
    r.get(w, "reward", "eta", c.reward.progress.eta);
    r.get(w, "reward", "clip_negative", c.reward.progress.clip_negative);
    r.get(w, "reward", "lambda", c.reward.weights.lambda);
    r.get_enum(w, "reward", "kl_direction", c.reward.kl_direction, parse_kl);
  }

  if (j.contains("controller") && r.object(j["controller"], "controller")) {
    const json& k = j["controller"];
    r.only(k, "controller", {"epsilon", "alpha", "gamma", "progress_buckets"});
    r.get(k, "controller", "epsilon", c.controller.epsilon);
    r.get(k, "controller", "alpha", c.controller.alpha);
    r.get(k, "controller", "gamma", c.controller.gamma);
    r.get(k, "controller", "progress_buckets", c.controller.progress_buckets);
  }

  if (j.contains("orchestration") && r.object(j["orchestration"], "orchestration")) {
    const json& o = j["orchestration"];
    r.only(o, "orchestration", {"mode", "eval_cadence", "eval_window", "improver_steps_per_round"});
    r.get_enum(o, "orchestration", "mode", c.orchestration.mode, parse_mode);
    r.get(o, "orchestration", "eval_cadence", c.orchestration.eval_cadence);
    r.get(o, "orchestration", "eval_window", c.orchestration.eval_window);
    r.get(o, "orchestration", "improver_steps_per_round", c.orchestration.improver_steps_per_round);
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = kConfigSchema;
  j["name"] = c.name;
  json env;
  env["alphabet"] = c.env.alphabet_size;
  if (c.env.type == EnvConfig::Type::bandit) {
    env["type"] = "bandit";
    env["channels"] = json::array();
    for (const auto& g : c.env.channels) env["channels"].push_back(generator_json(g));
  } else {
    env["type"] = "rooms";
    env["map"] = c.env.rooms.map;
    env["patterns"] = json::object();
    for (const auto& [k, g] : c.env.rooms.patterns) env["patterns"][std::string(1, k)] = generator_json(g);
    env["dark_symbol"] = c.env.rooms.dark_symbol;
    env["goal_symbol"] = c.env.rooms.goal_symbol;
    env["goal_reward"] = c.env.rooms.goal_reward;
    env["horizon"] = c.env.rooms.horizon;
  }
  j["env"] = env;
  j["model"] = {{"kind", to_string(c.model.kind)},
                {"order", c.model.order},
                {"alpha", c.model.alpha},
                {"conditioning", to_string(c.model.conditioning)},
                {"bits_per_parameter", c.model.bits_per_parameter},
                {"constant_symbol", c.model.constant_symbol},
                {"constant_bits", c.model.constant_bits},
                {"epsilon", c.model.epsilon}};
  j["reward"] = {{"engine", to_string(c.reward.engine)},
                 {"measure", c.reward.measure == PerformanceMeasure::l ? "l" : "ltau"},
                 {"eta", c.reward.progress.eta},
                 {"clip_negative", c.reward.progress.clip_negative},
                 {"lambda", c.reward.weights.lambda},
                 {"kl_direction",
                  c.reward.kl_direction == KlDirection::posterior_prior ? "posterior_prior" : "prior_posterior"}};
  j["controller"] = {{"epsilon", c.controller.epsilon},
                     {"alpha", c.controller.alpha},
                     {"gamma", c.controller.gamma},
                     {"progress_buckets", c.controller.progress_buckets}};
  j["orchestration"] = {
      {"mode", c.orchestration.mode == OrchestrationMode::synchronous ? "synchronous" : "asynchronous"},
      {"eval_cadence", c.orchestration.eval_cadence},
      {"eval_window", c.orchestration.eval_window},
      {"improver_steps_per_round", c.orchestration.improver_steps_per_round}};
  j["lifetime"] = c.lifetime;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["write_history"] = c.write_history;
  j["plots"] = c.plots;
  return j;
}

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  auto err = [&](const std::string& where, const std::string& what) { errors.push_back(where + ": " + what); };

  if (c.lifetime < 1) err("lifetime", "must be at least 1");
  if (c.seeds.empty()) err("seeds", "at least one seed is required");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size())
    err("seeds", "seeds must be distinct (each gets its own output directory)");
  if (c.output_dir.empty()) err("output_dir", "must not be empty");

  const std::uint32_t A = c.env.alphabet_size;
  if (A == 0) err("env.alphabet", "must be positive");
  std::optional<EnvDescription> desc;
  if (c.env.type == EnvConfig::Type::bandit) {
    if (c.env.channels.empty()) err("env.channels", "a bandit needs at least one channel");
    for (std::size_t i = 0; i < c.env.channels.size() && A > 0; ++i) {
      try {
        validate(c.env.channels[i], A);
      } catch (const DomainError& e) {
        err("env.channels[" + std::to_string(i) + "]", e.what());
      }
    }
  } else {
    for (const auto& e : validate(c.env.rooms)) err("env", e);
  }
  if (errors.empty()) {
    try {
      desc = make_environment(c.env, 0)->describe();
    } catch (const std::exception& e) {
      err("env", e.what());
    }
  }
  if (desc && desc->alphabet_size != A) err("env.alphabet", "environment reports a different alphabet");

  if (A > 0) {
    try {
      Model probe(c.model, A);
      (void)probe;
    } catch (const DomainError& e) {
      err("model", e.what());
    }
  }
  if (c.model.kind == ModelKind::constant && c.model.constant_symbol >= A)
    err("model.constant_symbol", "outside the alphabet");

  if (!(c.reward.progress.eta > 0.0)) err("reward.eta", "must be positive");
  if (!std::isfinite(c.reward.weights.lambda)) err("reward.lambda", "must be finite");
  if (!(c.controller.epsilon >= 0.0 && c.controller.epsilon <= 1.0)) err("controller.epsilon", "must lie in [0,1]");
  if (!(c.controller.alpha >= 0.0 && c.controller.alpha <= 1.0)) err("controller.alpha", "must lie in [0,1]");
  if (!(c.controller.gamma >= 0.0 && c.controller.gamma <= 1.0)) err("controller.gamma", "must lie in [0,1]");
  if (c.orchestration.eval_cadence < 1) err("orchestration.eval_cadence", "must be at least 1");
  return errors;
}

std::unique_ptr<Environment> make_environment(const EnvConfig& env, std::uint64_t seed) {
  if (env.type == EnvConfig::Type::bandit) return std::make_unique<ChannelBanditEnv>(env.alphabet_size, env.channels, seed);
  RoomsSpec rs = env.rooms;
  rs.alphabet_size = env.alphabet_size;
  return std::make_unique<RoomsWorldEnv>(rs, seed);
}

std::uint64_t controller_seed(std::uint64_t seed) { return splitmix64(seed); }

Lifetime run_seed(const ExperimentConfig& c, std::uint64_t seed) {
  auto env = make_environment(c.env, seed);
  const EnvDescription desc = env->describe();
  ControllerConfig cc = c.controller;
  cc.rng_seed = controller_seed(seed);
  Controller controller(desc.state_count * std::max<std::uint32_t>(cc.progress_buckets, 1), desc.action_count, cc);
  const Model model(c.model, desc.alphabet_size);
  return run_lifetime(*env, controller, model, c.reward, c.orchestration, c.lifetime);
}

SeedSummary summarize(const ExperimentConfig& c, std::uint64_t seed, const Lifetime& life) {
  SeedSummary s;
  s.seed = seed;
  s.pure_curiosity_return = pure_curiosity_return(life.metrics).value;
  s.incomplete = life.metrics.incomplete;
  const std::uint32_t actions =
      c.env.type == EnvConfig::Type::bandit ? static_cast<std::uint32_t>(c.env.channels.size()) : 4;
  s.action_visits.assign(actions, 0);
  std::optional<Timestep> first;
  for (const auto& r : life.metrics.rows) {
    s.r_ext_total += r.r_ext;
    if (r.action < actions) ++s.action_visits[r.action];
    if (!first && r.r_ext > 0.0) first = r.t;
  }
  if (c.env.type == EnvConfig::Type::rooms) {
    s.goal_reached = first.has_value();
    s.steps_to_first_goal = first.value_or(c.lifetime + 1);
  }
  return s;
}

void write_summary_csv(std::ostream& out, const std::vector<SeedSummary>& rows, std::uint32_t action_count) {
  out << "schema_version,seed,pure_curiosity_return,r_ext_total,steps_to_first_goal,goal_reached,incomplete";
  for (std::uint32_t a = 0; a < action_count; ++a) out << ",visits_" << a;
  out << '\n';
  for (const auto& s : rows) {
    out << kSummarySchemaVersion << ',' << s.seed << ',' << format_double(s.pure_curiosity_return) << ','
        << format_double(s.r_ext_total) << ',';
    if (s.steps_to_first_goal) {
      out << *s.steps_to_first_goal << ',' << (s.goal_reached ? 1 : 0);
    } else {
      out << "NA,NA";
    }
    out << ',' << (s.incomplete ? 1 : 0);
    for (std::uint32_t a = 0; a < action_count; ++a) out << ',' << (a < s.action_visits.size() ? s.action_visits[a] : 0);
    out << '\n';
  }
}

void write_reward_plot(std::ostream& out, const MetricsLog& log, std::size_t bins) {
  const std::size_t n = log.rows.size();
  bins = std::max<std::size_t>(1, std::min(bins, n));
  std::vector<double> mean(bins, 0.0);
  std::vector<std::size_t> cnt(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i * bins / n;
    mean[b] += log.rows[i].r_int;
    ++cnt[b];
  }
  for (std::size_t b = 0; b < bins; ++b)
    if (cnt[b]) mean[b] /= static_cast<double>(cnt[b]);
  write_chart(out, "mean intrinsic reward", {"r_int"}, {mean});
}

void write_occupancy_plot(std::ostream& out, const MetricsLog& log, std::uint32_t action_count, std::size_t bins) {
  const std::size_t n = log.rows.size();
  bins = std::max<std::size_t>(1, std::min(bins, n));
  std::vector<std::vector<double>> frac(action_count, std::vector<double>(bins, 0.0));
  std::vector<std::size_t> cnt(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i * bins / n;
    if (log.rows[i].action < action_count) frac[log.rows[i].action][b] += 1.0;
    ++cnt[b];
  }
  std::vector<std::string> labels;
  for (std::uint32_t a = 0; a < action_count; ++a) {
    labels.push_back("action " + std::to_string(a));
    for (std::size_t b = 0; b < bins; ++b)
      if (cnt[b]) frac[a][b] /= static_cast<double>(cnt[b]);
  }
  write_chart(out, "action occupancy", labels, frac);
}

fs::path resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootVariable); root && *root) return fs::path(root) / p;
  }
  return p;
}

RunResult run_experiment(const ExperimentConfig& c) {
  if (auto errors = validate(c); !errors.empty()) throw ConfigError(std::move(errors));
  RunResult result;
  result.directory = resolve_output_dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(result.directory, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + result.directory.string() + ": " + ec.message());
  const std::uint32_t actions = make_environment(c.env, 0)->describe().action_count;

  auto one = [&](std::uint64_t seed) {
    const Lifetime life = run_seed(c, seed);
    const fs::path dir = result.directory / ("seed-" + std::to_string(seed));
    std::error_code e;
    fs::create_directories(dir, e);
    if (e) throw std::runtime_error("cannot create " + dir.string() + ": " + e.message());
    {
      auto out = open_for_write(dir / "metrics.csv");
      life.metrics.write_csv(out);
    }
    if (c.write_history) {
      auto out = open_for_write(dir / "history.csv");
      life.history.save(out);
    }
    if (c.plots) {
      auto r = open_for_write(dir / "reward.svg");
      write_reward_plot(r, life.metrics);
      auto o = open_for_write(dir / "occupancy.svg");
      write_occupancy_plot(o, life.metrics, actions);
    }
    return summarize(c, seed, life);
  };

  // Seeds are independent; run them a few at a time.
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t i = 0; i < c.seeds.size(); i += workers) {
    std::vector<std::future<SeedSummary>> batch;
    for (std::size_t k = i; k < std::min(c.seeds.size(), i + workers); ++k)
      batch.push_back(std::async(std::launch::async, one, c.seeds[k]));
    for (auto& f : batch) result.seeds.push_back(f.get());
  }

  {
    auto out = open_for_write(result.directory / "summary.csv");
    write_summary_csv(out, result.seeds, actions);
  }
  {
    auto out = open_for_write(result.directory / "config.json");
    out << to_json(c).dump(2) << '\n';
  }
  return result;
}

double lower_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(values.size() - 1)));
  return values[idx];
}

std::vector<ColumnStats> aggregate_summaries(const std::vector<fs::path>& files) {
  if (files.empty()) throw DomainError("report needs at least one summary file");
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::optional<std::string> version;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError(1, file.string() + ": empty summary");
    std::vector<std::string> h;
    for (auto f : split_csv_line(line)) h.emplace_back(f);
    if (h.empty() || h.front() != "schema_version")
      throw ParseError(1, file.string() + ": first column must be schema_version");
    if (header.empty()) {
      header = h;
      columns.resize(header.size());
    } else if (h != header) {
      std::size_t k = 0;
      while (k < h.size() && k < header.size() && h[k] == header[k]) ++k;
      const std::string found = k < h.size() ? "'" + h[k] + "'" : "nothing";
      const std::string expected = k < header.size() ? "'" + header[k] + "'" : "nothing";
      throw ParseError(1, file.string() + ": column " + std::to_string(k + 1) + " is " + found + ", expected " +
                              expected);
    }
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (fields.size() != header.size())
        throw ParseError(lineno, file.string() + ": expected " + std::to_string(header.size()) + " fields");
      const std::string v(fields[0]);
      if (!version) {
        version = v;
        if (v != std::to_string(kSummarySchemaVersion))
          throw VersionError(file.string() + ": summary schema version " + v + " is not supported");
      } else if (v != *version) {
        throw VersionError(file.string() + ": mixed summary schema versions " + *version + " and " + v);
      }
      for (std::size_t k = 1; k < fields.size(); ++k) {
        if (fields[k] == "NA") continue;
        columns[k].push_back(parse_number(fields[k], lineno, header[k]));
      }
    }
  }
  std::vector<ColumnStats> out;
  for (std::size_t k = 2; k < header.size(); ++k) {  // skip schema_version and seed
    ColumnStats s;
    s.column = header[k];
    s.n = columns[k].size();
    if (s.n) {
      s.median = lower_quantile(columns[k], 0.5);
      s.q1 = lower_quantile(columns[k], 0.25);
      s.q3 = lower_quantile(columns[k], 0.75);
      s.min = *std::min_element(columns[k].begin(), columns[k].end());
      s.max = *std::max_element(columns[k].begin(), columns[k].end());
    }
    out.push_back(s);
  }
  return out;
}

void write_report_csv(std::ostream& out, const std::vector<ColumnStats>& stats) {
  out << "column,n,median,q1,q3,min,max\n";
  for (const auto& s : stats) {
    out << s.column << ',' << s.n;
    if (s.n) {
      for (double v : {s.median, s.q1, s.q3, s.min, s.max}) out << ',' << format_double(v);
    } else {
      out << ",NA,NA,NA,NA,NA";
    }
    out << '\n';
  }
}

}  // namespace curio

#include "curio/envs.hpp"

#include <cmath>

#include "curio/errors.hpp"

namespace curio {

GeneratorSpec GeneratorSpec::constant_of(Symbol s) {
  GeneratorSpec g;
  g.kind = Kind::constant;
  g.symbol = s;
  return g;
}

GeneratorSpec GeneratorSpec::periodic_of(std::vector<Symbol> pattern) {
  GeneratorSpec g;
  g.kind = Kind::periodic;
  g.pattern = std::move(pattern);
  return g;
}

GeneratorSpec GeneratorSpec::biased_coin_of(double p, Symbol heads, Symbol tails) {
  GeneratorSpec g;
  g.kind = Kind::biased_coin;
  g.p = p;
  g.heads = heads;
  g.tails = tails;
  return g;
}

GeneratorSpec GeneratorSpec::iid_uniform() {
  GeneratorSpec g;
  g.kind = Kind::iid_uniform;
  return g;
}

GeneratorSpec GeneratorSpec::markov_chain_of(std::vector<std::vector<double>> transition,
                                             Symbol start) {
  GeneratorSpec g;
  g.kind = Kind::markov_chain;
  g.transition = std::move(transition);
  g.start = start;
  return g;
}

GeneratorSpec GeneratorSpec::pi_digits() {
  GeneratorSpec g;
  g.kind = Kind::pi_digits;
  return g;
}

std::string to_string(GeneratorSpec::Kind kind) {
  using K = GeneratorSpec::Kind;
  switch (kind) {
    case K::constant: return "constant";
    case K::periodic: return "periodic";
    case K::biased_coin: return "biased_coin";
    case K::markov_chain: return "markov_chain";
    case K::iid_uniform: return "iid_uniform";
    case K::pi_digits: return "pi_digits";
  }
  return "?";
}

GeneratorSpec::Kind parse_generator_kind(const std::string& s) {
  using K = GeneratorSpec::Kind;
  for (K k : {K::constant, K::periodic, K::biased_coin, K::markov_chain, K::iid_uniform,
              K::pi_digits}) {
    if (to_string(k) == s) return k;
  }
  throw DomainError("unknown generator kind '" + s + "'");
}

void validate(const GeneratorSpec& g, std::uint32_t alphabet) {
  using K = GeneratorSpec::Kind;
  auto check = [&](Symbol s, const char* what) {
    if (s >= alphabet) {
      throw DomainError(std::string(what) + " symbol " + std::to_string(s) +
                        " outside alphabet of size " + std::to_string(alphabet));
    }
  };
  switch (g.kind) {
    case K::constant: check(g.symbol, "constant"); break;
    case K::periodic:
      if (g.pattern.empty()) throw DomainError("periodic pattern must be non-empty");
      for (Symbol s : g.pattern) check(s, "periodic");
      break;
    case K::biased_coin:
      if (!(g.p >= 0.0 && g.p <= 1.0)) throw DomainError("biased_coin p must lie in [0,1]");
      check(g.heads, "biased_coin heads");
      check(g.tails, "biased_coin tails");
      break;
    case K::markov_chain:
      if (g.transition.size() != alphabet) {
        throw DomainError("markov_chain transition matrix must have one row per symbol");
      }
      for (const auto& row : g.transition) {
        if (row.size() != alphabet) throw DomainError("markov_chain row width mismatch");
        double sum = 0.0;
        for (double v : row) {
          if (!(v >= 0.0)) throw DomainError("markov_chain probabilities must be non-negative");
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw DomainError("markov_chain rows must sum to 1");
      }
      check(g.start, "markov_chain start");
      break;
    case K::iid_uniform:
    case K::pi_digits: break;
  }
}

namespace {

std::uint64_t mod_pow16(std::uint64_t exponent, std::uint64_t modulus) {
  if (modulus == 1) return 0;
  std::uint64_t result = 1, base = 16 % modulus;
  while (exponent > 0) {
    if (exponent & 1) result = result * base % modulus;
    base = base * base % modulus;
    exponent >>= 1;
  }
  return result;
}

// fractional part of sum_k 16^(n-k) / (8k + j)
double bbp_series(std::uint64_t j, std::uint64_t n) {
  double s = 0.0;
  for (std::uint64_t k = 0; k <= n; ++k) {
    const std::uint64_t denom = 8 * k + j;
    s += static_cast<double>(mod_pow16(n - k, denom)) / static_cast<double>(denom);
    s -= std::floor(s);
  }
  for (std::uint64_t k = n + 1; k <= n + 64; ++k) {
    const double term = std::pow(16.0, static_cast<double>(n) - static_cast<double>(k)) /
                        static_cast<double>(8 * k + j);
    if (term < 1e-17) break;
    s += term;
  }
  return s - std::floor(s);
}

}  // namespace

unsigned pi_hex_digit(std::uint64_t n) {
  if (n == 0) throw DomainError("pi digit positions start at 1");
  const std::uint64_t d = n - 1;
  double x = 4.0 * bbp_series(1, d) - 2.0 * bbp_series(4, d) - bbp_series(5, d) - bbp_series(6, d);
  x -= std::floor(x);
  return static_cast<unsigned>(16.0 * x);
}

StreamGenerator::StreamGenerator(GeneratorSpec spec, std::uint32_t alphabet_size,
                                 std::uint64_t seed)
    : spec_(std::move(spec)), alphabet_(alphabet_size), rng_(seed) {
  validate(spec_, alphabet_);
  previous_ = spec_.start;
}

Symbol StreamGenerator::next() {
  using K = GeneratorSpec::Kind;
  const std::uint64_t i = position_++;
  switch (spec_.kind) {
    case K::constant: return spec_.symbol;
    case K::periodic: return spec_.pattern[i % spec_.pattern.size()];
    case K::biased_coin: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      return u(rng_) < spec_.p ? spec_.heads : spec_.tails;
    }
    case K::iid_uniform: {
      std::uniform_int_distribution<Symbol> u(0, alphabet_ - 1);
      return u(rng_);
    }
    case K::markov_chain: {
      if (i == 0) return previous_;
      std::discrete_distribution<Symbol> d(spec_.transition[previous_].begin(),
                                           spec_.transition[previous_].end());
      previous_ = d(rng_);
      return previous_;
    }
    case K::pi_digits: return pi_hex_digit(i + 1) % alphabet_;
  }
  return 0;
}

ChannelBanditEnv::ChannelBanditEnv(std::uint32_t alphabet_size,
                                   const std::vector<GeneratorSpec>& channels, std::uint64_t seed)
    : alphabet_(alphabet_size) {
  if (alphabet_size == 0) throw DomainError("alphabet size must be positive");
  if (channels.empty()) throw DomainError("bandit needs at least one channel");
  std::seed_seq base{seed};
  std::vector<std::uint64_t> seeds(channels.size());
  {
    std::vector<std::uint32_t> raw(channels.size() * 2);
    base.generate(raw.begin(), raw.end());
    for (std::size_t i = 0; i < channels.size(); ++i) {
      seeds[i] = (static_cast<std::uint64_t>(raw[2 * i]) << 32) | raw[2 * i + 1];
    }
  }
  channels_.reserve(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    channels_.emplace_back(channels[i], alphabet_, seeds[i]);
  }
}

EnvDescription ChannelBanditEnv::describe() const {
  return {1, static_cast<std::uint32_t>(channels_.size()), alphabet_};
}

EnvStep ChannelBanditEnv::step(ActionId action) {
  if (action >= channels_.size()) {
    throw DomainError("action " + std::to_string(action) + " invalid for " +
                      std::to_string(channels_.size()) + "-channel bandit");
  }
  return {channels_[action].next(), 0.0, 0, false};
}

std::vector<std::string> validate(const RoomsSpec& spec) {
  std::vector<std::string> errors;
  if (spec.alphabet_size == 0) errors.push_back("alphabet_size must be positive");
  if (spec.map.empty()) {
    errors.push_back("map must have at least one row");
    return errors;
  }
  const std::size_t cols = spec.map.front().size();
  if (cols == 0) errors.push_back("map rows must be non-empty");
  int starts = 0, goals = 0;
  for (std::size_t r = 0; r < spec.map.size(); ++r) {
    if (spec.map[r].size() != cols) {
      errors.push_back("map row " + std::to_string(r) + " has width " +
                       std::to_string(spec.map[r].size()) + ", expected " + std::to_string(cols));
    }
    for (char c : spec.map[r]) {
      if (c == 'S') {
        ++starts;
      } else if (c == 'G') {
        ++goals;
      } else if (c >= 'a' && c <= 'z') {
        if (!spec.patterns.count(c)) {
          errors.push_back(std::string("map uses pattern '") + c + "' with no generator");
        }
      } else if (c != '.' && c != 'N') {
        errors.push_back(std::string("unknown map cell '") + c + "'");
      }
    }
  }
  if (starts != 1) errors.push_back("map must contain exactly one 'S'");
  if (goals > 1) errors.push_back("map may contain at most one 'G'");
  if (spec.alphabet_size > 0) {
    if (spec.dark_symbol >= spec.alphabet_size) errors.push_back("dark_symbol outside alphabet");
    if (spec.goal_symbol >= spec.alphabet_size) errors.push_back("goal_symbol outside alphabet");
    for (const auto& [letter, g] : spec.patterns) {
      try {
        validate(g, spec.alphabet_size);
      } catch (const DomainError& e) {
        errors.push_back(std::string("pattern '") + letter + "': " + e.what());
      }
    }
  }
  return errors;
}

RoomsWorldEnv::RoomsWorldEnv(const RoomsSpec& spec, std::uint64_t seed) : spec_(spec) {
  const auto errors = validate(spec_);
  if (!errors.empty()) throw DomainError("invalid rooms map: " + errors.front());
  rows_ = static_cast<std::uint32_t>(spec_.map.size());
  cols_ = static_cast<std::uint32_t>(spec_.map.front().size());
  std::mt19937_64 seeder(seed);
  cells_.resize(static_cast<std::size_t>(rows_) * cols_);
  for (std::uint32_t r = 0; r < rows_; ++r) {
    for (std::uint32_t c = 0; c < cols_; ++c) {
      const char cell = spec_.map[r][c];
      const std::uint64_t cell_seed = seeder();
      if (cell == 'S') {
        start_row_ = r;
        start_col_ = c;
      } else if (cell == 'N') {
        cells_[r * cols_ + c] = std::make_unique<StreamGenerator>(GeneratorSpec::iid_uniform(),
                                                                 spec_.alphabet_size, cell_seed);
      } else if (cell >= 'a' && cell <= 'z') {
        cells_[r * cols_ + c] = std::make_unique<StreamGenerator>(spec_.patterns.at(cell),
                                                                 spec_.alphabet_size, cell_seed);
      }
    }
  }
  row_ = start_row_;
  col_ = start_col_;
}

EnvDescription RoomsWorldEnv::describe() const { return {rows_ * cols_, 4, spec_.alphabet_size}; }

EnvStep RoomsWorldEnv::step(ActionId action) {
  switch (action) {
    case up: if (row_ > 0) --row_; break;
    case down: if (row_ + 1 < rows_) ++row_; break;
    case left: if (col_ > 0) --col_; break;
    case right: if (col_ + 1 < cols_) ++col_; break;
    default: throw DomainError("action " + std::to_string(action) + " invalid for rooms world");
  }
  ++episode_steps_;
  EnvStep out;
  out.state = state();
  const char cell = spec_.map[row_][col_];
  if (cell == 'G') {
    out.observation = spec_.goal_symbol;
    out.reward_ext = spec_.goal_reward;
    out.terminal = true;
  } else if (auto& gen = cells_[row_ * cols_ + col_]) {
    out.observation = gen->next();
  } else {
    out.observation = spec_.dark_symbol;
  }
  if (spec_.horizon > 0 && episode_steps_ >= spec_.horizon) out.terminal = true;
  if (out.terminal) {
    row_ = start_row_;
    col_ = start_col_;
    episode_steps_ = 0;
    ++episode_;
  }
  return out;
}

}  // namespace curio

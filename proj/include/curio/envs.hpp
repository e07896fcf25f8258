#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "curio/history.hpp"

namespace curio {

using StateId = std::uint32_t;

/// A seeded source of observation symbols.
struct GeneratorSpec {
  enum class Kind { constant, periodic, biased_coin, markov_chain, iid_uniform, pi_digits };
  Kind kind = Kind::constant;
  Symbol symbol = 0;                          // constant
  std::vector<Symbol> pattern;                // periodic
  double p = 0.5;                             // biased_coin: P(heads)
  Symbol heads = 0, tails = 1;                // biased_coin
  std::vector<std::vector<double>> transition;  // markov_chain, row = current symbol
  Symbol start = 0;                           // markov_chain

  static GeneratorSpec constant_of(Symbol s);
  static GeneratorSpec periodic_of(std::vector<Symbol> pattern);
  static GeneratorSpec biased_coin_of(double p, Symbol heads = 0, Symbol tails = 1);
  static GeneratorSpec iid_uniform();
  static GeneratorSpec markov_chain_of(std::vector<std::vector<double>> transition, Symbol start = 0);
  static GeneratorSpec pi_digits();
};

std::string to_string(GeneratorSpec::Kind kind);
GeneratorSpec::Kind parse_generator_kind(const std::string& s);

/// Throws DomainError when the generator could emit a symbol outside the alphabet.
void validate(const GeneratorSpec& spec, std::uint32_t alphabet_size);

class StreamGenerator {
 public:
  StreamGenerator(GeneratorSpec spec, std::uint32_t alphabet_size, std::uint64_t seed);
  Symbol next();
  const GeneratorSpec& spec() const { return spec_; }

 private:
  GeneratorSpec spec_;
  std::uint32_t alphabet_;
  std::mt19937_64 rng_;
  std::uint64_t position_ = 0;
  Symbol previous_ = 0;
};

/// Hexadecimal digit of pi at 1-based position `n` after the point.
unsigned pi_hex_digit(std::uint64_t n);

struct EnvDescription {
  std::uint32_t state_count = 0;
  std::uint32_t action_count = 0;
  std::uint32_t alphabet_size = 0;
};

struct EnvStep {
  Symbol observation = 0;
  double reward_ext = 0.0;
  StateId state = 0;
  bool terminal = false;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual EnvDescription describe() const = 0;
  virtual StateId state() const = 0;
  /// Throws DomainError on an invalid action id.
  virtual EnvStep step(ActionId action) = 0;
};

/// Single-state world whose actions select observation channels.
class ChannelBanditEnv final : public Environment {
 public:
  ChannelBanditEnv(std::uint32_t alphabet_size, const std::vector<GeneratorSpec>& channels,
                   std::uint64_t seed);
  EnvDescription describe() const override;
  StateId state() const override { return 0; }
  EnvStep step(ActionId action) override;

 private:
  std::uint32_t alphabet_;
  std::vector<StreamGenerator> channels_;
};

/// Grid world. Map legend:
///   '.' dark cell (emits dark_symbol)      'S' start (dark)
///   'G' goal (emits goal_symbol, pays goal_reward, ends the episode)
///   'N' noise cell (iid uniform)           'a'..'z' pattern cell using patterns[letter]
/// Moves outside the grid leave the position unchanged.
struct RoomsSpec {
  std::vector<std::string> map;
  std::map<char, GeneratorSpec> patterns;
  std::uint32_t alphabet_size = 4;
  Symbol dark_symbol = 0;
  Symbol goal_symbol = 0;
  double goal_reward = 1.0;
  std::uint32_t horizon = 0;  // 0: episodes end only at the goal
};

/// Checks the map shape and legend; returns every problem found.
std::vector<std::string> validate(const RoomsSpec& spec);

class RoomsWorldEnv final : public Environment {
 public:
  enum Action : ActionId { up = 0, down = 1, left = 2, right = 3 };

  RoomsWorldEnv(const RoomsSpec& spec, std::uint64_t seed);
  EnvDescription describe() const override;
  StateId state() const override { return row_ * cols_ + col_; }
  EnvStep step(ActionId action) override;

  std::uint32_t row() const { return row_; }
  std::uint32_t col() const { return col_; }
  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  std::uint64_t episode() const { return episode_; }

 private:
  RoomsSpec spec_;
  std::uint32_t rows_ = 0, cols_ = 0;
  std::uint32_t start_row_ = 0, start_col_ = 0;
  std::uint32_t row_ = 0, col_ = 0;
  std::uint32_t episode_steps_ = 0;
  std::uint64_t episode_ = 0;
  // one generator per cell, null for dark and goal cells
  std::vector<std::unique_ptr<StreamGenerator>> cells_;
};

}  // namespace curio

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "curio/history.hpp"

namespace curio {

enum class ModelKind { markov, dictionary, constant };

/// What, besides past observations, a prediction may condition on.
///  - none:       the last k observations of the stream.
///  - channel:    the last k observations that followed the same action; one
///                independent sub-model per action (bandit channels).
///  - transition: the last k observations plus the upcoming action, i.e.
///                predict x(t+1) from x(t) and y(t+1).
enum class Conditioning { none, channel, transition };

using Distribution = std::vector<double>;

struct ModelSpec {
  ModelKind kind = ModelKind::markov;
  unsigned order = 0;
  double alpha = 1.0;
  Conditioning conditioning = Conditioning::none;
  /// Cost of each touched count cell (markov) or stored phrase (dictionary).
  double bits_per_parameter = 32.0;
  Symbol constant_symbol = 0;
  double constant_bits = 8.0;
  double epsilon = 1.0 / 65536.0;
};

std::string to_string(ModelKind kind);
std::string to_string(Conditioning c);
ModelKind parse_model_kind(const std::string& s);
Conditioning parse_conditioning(const std::string& s);

namespace detail {
class ModelImpl;
}

/// An adaptive sequential predictor used as a compressor of the history.
///
/// Value semantics: copies are deep. Learning state (counts, dictionary) and
/// context state (where in the stream the predictor currently is) are kept
/// apart so the same learned parameters can be scored on any slice.
class Model {
 public:
  Model(const ModelSpec& spec, std::uint32_t alphabet_size);
  ~Model();
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept;
  Model& operator=(Model&&) noexcept;

  ModelKind kind() const;
  const ModelSpec& spec() const;
  std::uint32_t alphabet_size() const;

  double probability(ActionId next_action, Symbol symbol) const;
  Distribution predict(ActionId next_action) const;

  /// Adjusts parameters for `step` given the current context; context unchanged.
  void learn(const Step& step);
  /// Moves the context past `step` without learning.
  void advance(const Step& step);
  /// learn + advance, counted as one evaluation operation.
  void update(const Step& step);
  void reset_context();

  /// l(p): deterministic in the parameter state.
  double description_length_bits() const;
  std::uint64_t eval_ops() const noexcept { return eval_ops_; }

  /// Number of materialized parameters (count cells or phrases).
  std::size_t parameter_count() const;

  void save(std::ostream& sink) const;
  static Model load(std::istream& source);

 private:
  explicit Model(std::unique_ptr<detail::ModelImpl> impl);
  std::unique_ptr<detail::ModelImpl> impl_;
  std::uint64_t eval_ops_ = 0;
};

struct CodeLengthReport {
  double model_bits = 0.0;
  double data_bits = 0.0;
  double total_bits = 0.0;
  std::uint64_t symbols_scored = 0;
  std::uint64_t eval_ops = 0;
  /// data_bits split by the action taken at each scored step.
  std::vector<double> data_bits_by_action;
};

/// Distribution of the next symbol after the model reads `context` from a
/// reset context. For markov(k) only the last k relevant observations matter.
Distribution predict(const Model& model, std::span<const Step> context, ActionId next_action);

/// Prequential two-part code length of `steps`, starting from `model`'s
/// parameters with a reset context. `model` is not modified.
CodeLengthReport code_length(const Model& model, std::span<const Step> steps);

/// C_l: model bits plus prequential data bits.
double performance_l(const Model& model, std::span<const Step> steps);
double performance_ltau(const CodeLengthReport& report);
/// C_ltau: C_l plus log2 of the counted evaluation operations.
double performance_ltau(const Model& model, std::span<const Step> steps);

}  // namespace curio

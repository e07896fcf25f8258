#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "curio/history.hpp"
#include "curio/model.hpp"

namespace curio {

/// Maps (old performance, new performance) to a progress value.
using ProgressFunction = std::function<double(double c_old, double c_new)>;

inline double difference_progress(double c_old, double c_new) { return c_old - c_new; }

struct ProgressConfig {
  ProgressFunction f = difference_progress;
  double eta = 1.0;
  bool clip_negative = false;
};

/// Reward produced by one compressor round and consumed by the controller.
struct RewardEvent {
  Timestep issued_at = 0;
  double value = 0.0;
  /// NaN for engines that do not compare two compressors.
  double c_old = 0.0;
  double c_new = 0.0;
  Timestep evaluated_history_end = 0;
  /// value split by the action taken at the evaluated steps (see agent).
  std::vector<double> by_action;
};

double compression_progress(double c_old, double c_new, const ProgressConfig& config = {});

/// Surprisal of `actual` under `predicted`, in bits.
double prediction_error_reward(const Distribution& predicted, Symbol actual);

enum class KlDirection { posterior_prior, prior_posterior };

/// KL(posterior || prior) in bits by default.
double bayesian_surprise(const Distribution& prior, const Distribution& posterior,
                         KlDirection direction = KlDirection::posterior_prior);

struct CombineWeights {
  double lambda = 1.0;
};

/// r = r_ext + lambda * r_int
double combine(double r_ext, double r_int, const CombineWeights& weights = {});

/// Negative data bits per symbol of `data` under `model` (0 for empty data).
double beauty(const Model& model, std::span<const Step> data);

/// Forward differences of a uniformly sampled beauty series.
std::vector<double> interestingness(std::span<const double> beauty_series);

}  // namespace curio

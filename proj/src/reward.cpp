#include "curio/reward.hpp"

#include <cmath>

#include "curio/errors.hpp"

namespace curio {

double compression_progress(double c_old, double c_new, const ProgressConfig& config) {
  if (!(config.eta > 0.0)) throw DomainError("progress scale eta must be positive");
  const ProgressFunction& f = config.f ? config.f : ProgressFunction(difference_progress);
  double v = config.eta * f(c_old, c_new);
  if (config.clip_negative && v < 0.0) v = 0.0;
  return v;
}

double prediction_error_reward(const Distribution& predicted, Symbol actual) {
  if (actual >= predicted.size()) {
    throw DomainError("symbol " + std::to_string(actual) + " outside distribution support");
  }
  const double p = predicted[actual];
  if (!(p > 0.0)) throw DomainError("distribution must have full support");
  return -std::log2(p);
}

double bayesian_surprise(const Distribution& prior, const Distribution& posterior,
                         KlDirection direction) {
  if (prior.size() != posterior.size()) {
    throw DomainError("distribution dimension mismatch: " + std::to_string(prior.size()) + " vs " +
                      std::to_string(posterior.size()));
  }
  const Distribution& p = direction == KlDirection::posterior_prior ? posterior : prior;
  const Distribution& q = direction == KlDirection::posterior_prior ? prior : posterior;
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !(q[i] > 0.0)) throw DomainError("distribution must have full support");
    kl += p[i] * std::log2(p[i] / q[i]);
  }
  // rounding can leave tiny negatives for near-identical inputs
  return kl < 0.0 ? 0.0 : kl;
}

double combine(double r_ext, double r_int, const CombineWeights& weights) {
  return r_ext + weights.lambda * r_int;
}

double beauty(const Model& model, std::span<const Step> data) {
  if (data.empty()) return 0.0;
  const CodeLengthReport r = code_length(model, data);
  return -r.data_bits / static_cast<double>(r.symbols_scored);
}

std::vector<double> interestingness(std::span<const double> beauty_series) {
  std::vector<double> out;
  if (beauty_series.size() < 2) return out;
  out.reserve(beauty_series.size() - 1);
  for (std::size_t i = 1; i < beauty_series.size(); ++i) {
    out.push_back(beauty_series[i] - beauty_series[i - 1]);
  }
  return out;
}

}  // namespace curio

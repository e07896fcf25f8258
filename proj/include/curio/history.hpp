#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace curio {

using Symbol = std::uint32_t;
using ActionId = std::uint32_t;
using Timestep = std::uint64_t;

/// One cycle of the agent's life: input x(t), action y(t) and both reward
/// components. The combined reward is reconstructible through the combiner.
struct Step {
  Timestep t = 0;
  Symbol observation = 0;
  ActionId action = 0;
  double reward_ext = 0.0;
  double reward_int = 0.0;

  friend bool operator==(const Step&, const Step&) = default;
};

/// Steps [start, end], copied out of a history. Empty when end == start - 1.
struct HistorySlice {
  Timestep start = 1;
  Timestep end = 0;
  std::vector<Step> steps;

  std::span<const Step> view() const noexcept { return steps; }
  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }

  friend bool operator==(const HistorySlice&, const HistorySlice&) = default;
};

/// Append-only record of everything the agent observed, did and received.
/// Timesteps start at 1 and are contiguous. Nothing is ever evicted.
class History {
 public:
  static constexpr int kFormatVersion = 1;

  explicit History(std::uint32_t alphabet_size);

  std::uint32_t alphabet_size() const noexcept { return alphabet_size_; }
  Timestep length() const noexcept { return steps_.size(); }
  bool empty() const noexcept { return steps_.empty(); }

  /// Returns the timestep assigned to the new record.
  Timestep append(Symbol observation, ActionId action, double reward_ext, double reward_int);

  HistorySlice slice(Timestep start, Timestep end) const;
  /// Consistent copy of the whole prefix written so far.
  HistorySlice snapshot() const { return slice(1, length()); }

  /// Read-only access without copying; invalidated by the next append.
  std::span<const Step> steps() const noexcept { return steps_; }
  const Step& at(Timestep t) const;

  void save(std::ostream& sink) const;
  static History load(std::istream& source);

  friend bool operator==(const History&, const History&) = default;

 private:
  std::uint32_t alphabet_size_;
  std::vector<Step> steps_;
};

}  // namespace curio

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "moranlab/graph.hpp"
#include "moranlab/rng.hpp"
#include "moranlab/stats.hpp"
#include "moranlab/sum_tree.hpp"

namespace moranlab {

enum class Variant { BirthDeath, DeathBirth };

struct ProcessParams {
  double s = 1;  // mutant fitness relative to resident fitness 1
  Variant variant = Variant::BirthDeath;
};

void validate(const ProcessParams& params);

struct TransitionProbs {
  double p_plus = 0;   // P(|X| -> |X|+1) in one raw step
  double p_minus = 0;  // P(|X| -> |X|-1) in one raw step
};

// The two rate sums of the chosen variant (see MutantState::agg_up()).
struct Aggregates {
  double up = 0;
  double down = 0;
};

// Evaluates the rate sums straight from their defining formulas by a full
// pass over the graph. Serves as the reference for the incrementally
// maintained values and as the kernel of the exact solver.
Aggregates direct_aggregates(const Graph& g, std::span<const std::uint8_t> in_x,
                             const ProcessParams& params);
TransitionProbs direct_transition_probs(const Graph& g, std::span<const std::uint8_t> in_x,
                                        const ProcessParams& params);

namespace detail {
struct EngineLayout;
}

// Mutant set X together with every quantity the jump chain needs, kept up
// to date across flips.
//
// Birth-Death:  agg_up   = sum_{v in X}   d_{~X}(v) / d(v)
//               agg_down = sum_{u in N(X)} d_X(u)   / d(u)
// Death-Birth:  agg_up   = sum_{u in N(X)} s d_X(u) / (s d_X(u) + d_{~X}(u))
//               agg_down = sum_{v in X}   d_{~X}(v) / (s d_X(v) + d_{~X}(v))
//
// Vertices of very high degree ("hubs") own all reproduction events on
// their incident edges in the Birth-Death variant, so flipping a hub costs
// O(log n) rather than O(degree * log n).
class MutantState {
 public:
  MutantState(const Graph& g, ProcessParams params, std::span<const Vertex> initial);
  MutantState(std::shared_ptr<const detail::EngineLayout> layout, std::span<const Vertex> initial);

  const Graph& graph() const;
  const ProcessParams& params() const;

  std::size_t size() const { return size_; }
  bool contains(Vertex v) const { return in_x_[v] != 0; }
  bool absorbed() const { return size_ == 0 || size_ == in_x_.size(); }
  std::span<const std::uint8_t> membership() const { return in_x_; }
  std::vector<Vertex> members() const;

  // w(X) = (s - 1)|X| + n
  double fitness_total() const;
  double agg_up() const { return hub_rates_.total(0) + rates_.total(0); }
  double agg_down() const { return hub_rates_.total(1) + rates_.total(1); }
  TransitionProbs transition_probs() const;
  // Probability that the next X-changing event adds a vertex.
  double grow_probability() const;

  // Full recomputation from the current membership.
  Aggregates recompute() const;

  // Toggles membership of v and updates every cached quantity.
  void flip(Vertex v);

  // Vertex whose flip realises a grow / shrink event, drawn from the exact
  // conditional law of that event. Preconditions: agg_up() > 0 (resp.
  // agg_down() > 0).
  Vertex sample_grow(Rng& rng) const;
  Vertex sample_shrink(Rng& rng) const;

  // Events between automatic full rebuilds of the cached sums.
  static constexpr std::uint64_t kRebuildInterval = std::uint64_t{1} << 16;

 private:
  void rebuild();
  void refresh(Vertex v, bool update_path = true);
  void move_in_hub_partition(std::size_t slot, Vertex hub, bool joining);
  Vertex uniform_neighbor_of_hub(Vertex hub, bool mutant, Rng& rng) const;
  Vertex uniform_nonhub_neighbor(Vertex v, bool mutant, Rng& rng) const;
  Vertex sample_owner(int channel, Rng& rng) const;

  std::shared_ptr<const detail::EngineLayout> layout_;
  std::vector<std::uint8_t> in_x_;
  std::size_t size_ = 0;
  std::uint64_t events_since_rebuild_ = 0;

  // Death-Birth: d_X(v) for every v. Birth-Death: mutant count among the
  // non-hub neighbours of v (all neighbours, for hubs).
  std::vector<std::uint32_t> count_;
  std::vector<double> hub_inv_x_;      // sum of 1/d(r) over non-hub mutant neighbours r
  std::vector<std::uint32_t> hub_nh_count_;  // number of those r, for exact zeros
  std::vector<Vertex> hub_perm_;       // per hub: neighbours, mutants first
  std::vector<std::uint32_t> hub_pos_; // per adjacency slot (y -> hub): index in hub_perm_
  // Event weights per owning vertex; channel 0 grow, channel 1 shrink.
  // Hubs sit in their own small tree, so that a few heavy owners are found
  // without descending the full-size tree.
  PairSumTree hub_rates_;
  PairSumTree rates_;
};

enum class Terminal { Extinction, Fixation, Timeout };

struct Outcome {
  Terminal terminal = Terminal::Timeout;
  std::uint64_t active_steps = 0;
  std::optional<std::uint64_t> raw_steps;
};

struct StepResult {
  Vertex flipped = 0;
  bool grew = false;
};

struct RunOptions {
  std::uint64_t max_active_steps = 10'000'000;
  bool count_raw_steps = false;
  // Called after every active step.
  std::function<void(const MutantState&)> observer;
};

struct Estimate {
  double p_hat = 0;
  stats::Interval ci;
  double confidence = 0.95;
  std::uint64_t runs = 0;
  std::uint64_t fixations = 0;
  std::uint64_t extinctions = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t seed = 0;
  bool timeout_warning = false;

  // Binomial standard error of p_hat.
  double std_error() const;
};

struct EstimateOptions {
  std::uint64_t runs = 1000;
  std::uint64_t master_seed = 1;
  double confidence = 0.95;
  unsigned threads = 1;
  std::uint64_t max_active_steps = 10'000'000;
};

// Event-driven simulator of one process on one connected graph. Only steps
// that change X are simulated; raw step counts can be recovered from
// geometric waiting times.
class MoranSimulator {
 public:
  MoranSimulator(const Graph& g, ProcessParams params);

  const Graph& graph() const;
  const ProcessParams& params() const;

  MutantState initial_state(Vertex v0) const;
  MutantState state_of(std::span<const Vertex> members) const;

  // One X-changing event. Throws StateError on an absorbed state.
  StepResult step_active(MutantState& state, Rng& rng) const;

  Outcome run(Vertex v0, Rng& rng, const RunOptions& options = {}) const;

  Estimate estimate_fixation(Vertex v0, const EstimateOptions& options) const;

 private:
  std::shared_ptr<const detail::EngineLayout> layout_;
};

// Free-function forms.
TransitionProbs transition_probs(const MutantState& state);
Estimate estimate_fixation(const Graph& g, Vertex v0, const ProcessParams& params,
                           const EstimateOptions& options);

}  // namespace moranlab

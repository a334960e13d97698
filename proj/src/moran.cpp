#include "moranlab/moran.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "moranlab/errors.hpp"

namespace moranlab {

void validate(const ProcessParams& params) {
  if (!(params.s > 0) || !std::isfinite(params.s)) {
    throw ParameterError("fitness s must be positive and finite, got " + std::to_string(params.s));
  }
}

namespace {

std::uint32_t mutant_neighbors(const Graph& g, std::span<const std::uint8_t> in_x, Vertex v) {
  std::uint32_t c = 0;
  for (Vertex u : g.neighbors(v)) c += in_x[u];
  return c;
}

}  // namespace

Aggregates direct_aggregates(const Graph& g, std::span<const std::uint8_t> in_x,
                             const ProcessParams& params) {
  Aggregates a;
  const bool bd = params.variant == Variant::BirthDeath;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const auto d = static_cast<double>(g.degree(v));
    if (d == 0) continue;
    const auto dx = static_cast<double>(mutant_neighbors(g, in_x, v));
    const double dnx = d - dx;
    if (bd) {
      if (in_x[v]) {
        a.up += dnx / d;
      } else {
        a.down += dx / d;
      }
    } else {
      const double denom = params.s * dx + dnx;
      if (in_x[v]) {
        a.down += dnx / denom;
      } else {
        a.up += params.s * dx / denom;
      }
    }
  }
  return a;
}

TransitionProbs direct_transition_probs(const Graph& g, std::span<const std::uint8_t> in_x,
                                        const ProcessParams& params) {
  const auto a = direct_aggregates(g, in_x, params);
  const auto n = static_cast<double>(g.num_vertices());
  if (params.variant == Variant::BirthDeath) {
    double size = 0;
    for (auto b : in_x) size += b;
    const double w = (params.s - 1) * size + n;
    return {params.s * a.up / w, a.down / w};
  }
  return {a.up / n, a.down / n};
}

namespace detail {

struct EngineLayout {
  Graph graph;
  ProcessParams params;
  std::vector<std::uint8_t> is_hub;
  std::vector<double> inv_degree;
  std::vector<std::uint32_t> nonhub_degree;
  std::vector<double> hub_inv_all;     // hubs: sum of 1/d(r) over non-hub neighbours
  std::vector<std::size_t> hub_base;   // hubs: start of the partition array
  std::size_t hub_perm_size = 0;
  std::vector<std::size_t> hub_slot_offsets;
  std::vector<std::size_t> hub_slots;  // adjacency slots whose target is a hub
  std::vector<std::uint32_t> tree_index;  // position in the hub or the non-hub rate tree
  std::vector<Vertex> hub_list;
  std::vector<Vertex> nonhub_list;

  EngineLayout(const Graph& g, ProcessParams p) : graph(g), params(p) {
    const auto n = graph.num_vertices();
    is_hub.assign(n, 0);
    if (params.variant == Variant::BirthDeath) {
      const auto threshold = std::max<std::size_t>(
          32, static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * static_cast<double>(graph.num_edges())))));
      for (Vertex v = 0; v < n; ++v) is_hub[v] = graph.degree(v) > threshold ? 1 : 0;
    }
    tree_index.assign(n, 0);
    for (Vertex v = 0; v < n; ++v) {
      auto& list = is_hub[v] ? hub_list : nonhub_list;
      tree_index[v] = static_cast<std::uint32_t>(list.size());
      list.push_back(v);
    }
    inv_degree.assign(n, 0.0);
    for (Vertex v = 0; v < n; ++v) {
      if (graph.degree(v) > 0) inv_degree[v] = 1.0 / static_cast<double>(graph.degree(v));
    }
    nonhub_degree.assign(n, 0);
    hub_inv_all.assign(n, 0.0);
    hub_base.assign(n, 0);
    hub_slot_offsets.assign(n + 1, 0);
    for (Vertex v = 0; v < n; ++v) {
      auto nb = graph.neighbors(v);
      for (std::size_t i = 0; i < nb.size(); ++i) {
        const Vertex u = nb[i];
        if (is_hub[u]) {
          hub_slots.push_back(graph.offset(v) + i);
        } else {
          ++nonhub_degree[v];
          if (is_hub[v]) hub_inv_all[v] += inv_degree[u];
        }
      }
      hub_slot_offsets[v + 1] = hub_slots.size();
      if (is_hub[v]) {
        hub_base[v] = hub_perm_size;
        hub_perm_size += nb.size();
      }
    }
  }

  std::span<const std::size_t> hub_slots_of(Vertex v) const {
    return {hub_slots.data() + hub_slot_offsets[v], hub_slots.data() + hub_slot_offsets[v + 1]};
  }

  // Adjacency slot of (v -> u); u must be a neighbour of v.
  std::size_t slot(Vertex v, Vertex u) const {
    auto nb = graph.neighbors(v);
    return graph.offset(v) + static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), u) - nb.begin());
  }
};

}  // namespace detail

MutantState::MutantState(const Graph& g, ProcessParams params, std::span<const Vertex> initial)
    : MutantState((validate(params), std::make_shared<const detail::EngineLayout>(g, params)), initial) {}

MutantState::MutantState(std::shared_ptr<const detail::EngineLayout> layout,
                         std::span<const Vertex> initial)
    : layout_(std::move(layout)) {
  const auto n = layout_->graph.num_vertices();
  in_x_.assign(n, 0);
  for (Vertex v : initial) {
    if (v >= n) throw ParameterError("mutant vertex " + std::to_string(v) + " out of range");
    in_x_[v] = 1;
  }
  size_ = static_cast<std::size_t>(std::count(in_x_.begin(), in_x_.end(), std::uint8_t{1}));
  hub_rates_.reset(layout_->hub_list.size());
  rates_.reset(layout_->nonhub_list.size());
  hub_perm_.assign(layout_->hub_perm_size, 0);
  hub_pos_.assign(2 * layout_->graph.num_edges(), 0);
  rebuild();
}

const Graph& MutantState::graph() const { return layout_->graph; }
const ProcessParams& MutantState::params() const { return layout_->params; }

std::vector<Vertex> MutantState::members() const {
  std::vector<Vertex> out;
  out.reserve(size_);
  for (Vertex v = 0; v < in_x_.size(); ++v)
    if (in_x_[v]) out.push_back(v);
  return out;
}

double MutantState::fitness_total() const {
  return (params().s - 1) * static_cast<double>(size_) + static_cast<double>(in_x_.size());
}

TransitionProbs MutantState::transition_probs() const {
  const double s = params().s;
  if (params().variant == Variant::BirthDeath) {
    const double w = fitness_total();
    return {s * agg_up() / w, agg_down() / w};
  }
  const auto n = static_cast<double>(in_x_.size());
  return {agg_up() / n, agg_down() / n};
}

double MutantState::grow_probability() const {
  const double up = params().variant == Variant::BirthDeath ? params().s * agg_up() : agg_up();
  const double total = up + agg_down();
  return total > 0 ? up / total : 0.0;
}

Aggregates MutantState::recompute() const { return direct_aggregates(graph(), in_x_, params()); }

void MutantState::rebuild() {
  const auto& L = *layout_;
  const auto& g = L.graph;
  const auto n = g.num_vertices();
  count_.assign(n, 0);
  hub_inv_x_.assign(n, 0.0);
  hub_nh_count_.assign(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    const bool hub = L.is_hub[v] != 0;
    const bool count_all = hub || params().variant == Variant::DeathBirth;
    std::size_t mutants = 0;
    for (Vertex u : g.neighbors(v)) {
      if (!in_x_[u]) continue;
      if (count_all || !L.is_hub[u]) ++count_[v];
      if (hub && !L.is_hub[u]) {
        ++hub_nh_count_[v];
        hub_inv_x_[v] += L.inv_degree[u];
      }
    }
    if (hub) {
      const auto base = L.hub_base[v];
      auto nb = g.neighbors(v);
      for (Vertex u : nb) {
        if (in_x_[u]) hub_perm_[base + mutants++] = u;
      }
      for (Vertex u : nb) {
        if (!in_x_[u]) hub_perm_[base + mutants++] = u;
      }
      for (std::size_t k = 0; k < nb.size(); ++k) {
        const Vertex u = hub_perm_[base + k];
        hub_pos_[L.slot(u, v)] = static_cast<std::uint32_t>(k);
      }
    }
  }
  for (Vertex v = 0; v < n; ++v) refresh(v, false);
  hub_rates_.rebuild();
  rates_.rebuild();
  events_since_rebuild_ = 0;
}

void MutantState::refresh(Vertex v, bool update_path) {
  const auto& L = *layout_;
  const auto d = static_cast<double>(L.graph.degree(v));
  double up = 0;
  double down = 0;
  if (d > 0) {
    const bool mutant = in_x_[v] != 0;
    const auto c = static_cast<double>(count_[v]);
    if (params().variant == Variant::DeathBirth) {
      const double denom = params().s * c + (d - c);
      if (mutant) {
        down = (d - c) / denom;
      } else {
        up = params().s * c / denom;
      }
    } else if (!L.is_hub[v]) {
      if (mutant) {
        up = (static_cast<double>(L.nonhub_degree[v]) - c) / d;
      } else {
        down = c / d;
      }
    } else {
      // A hub owns its own reproduction events (onto any neighbour) and
      // those of non-hub neighbours reproducing onto it.
      const bool all_nonhub_mutant = hub_nh_count_[v] == L.nonhub_degree[v];
      if (mutant) {
        up = (d - c) / d;
        down = all_nonhub_mutant ? 0.0 : std::max(0.0, L.hub_inv_all[v] - hub_inv_x_[v]);
      } else {
        up = hub_nh_count_[v] == 0 ? 0.0 : std::max(0.0, hub_inv_x_[v]);
        down = c / d;
      }
    }
  }
  auto& tree = L.is_hub[v] ? hub_rates_ : rates_;
  if (update_path) {
    tree.set(L.tree_index[v], up, down);
  } else {
    tree.set_leaf(L.tree_index[v], up, down);
  }
}

void MutantState::move_in_hub_partition(std::size_t slot, Vertex hub, bool joining) {
  const auto& L = *layout_;
  const auto base = L.hub_base[hub];
  const std::uint32_t k = hub_pos_[slot];
  const std::uint32_t c = count_[hub];
  const std::uint32_t t = joining ? c : c - 1;
  if (k != t) {
    const Vertex moved = hub_perm_[base + t];
    std::swap(hub_perm_[base + k], hub_perm_[base + t]);
    hub_pos_[L.slot(moved, hub)] = k;
    hub_pos_[slot] = t;
  }
}

void MutantState::flip(Vertex x) {
  const auto& L = *layout_;
  const auto& g = L.graph;
  const bool joining = in_x_[x] == 0;
  in_x_[x] = joining ? 1 : 0;
  size_ = joining ? size_ + 1 : size_ - 1;
  const auto bump = [joining](auto& value) { value = joining ? value + 1 : value - 1; };

  if (params().variant == Variant::DeathBirth) {
    for (Vertex y : g.neighbors(x)) {
      bump(count_[y]);
      refresh(y);
    }
  } else if (!L.is_hub[x]) {
    auto nb = g.neighbors(x);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const Vertex y = nb[i];
      if (L.is_hub[y]) {
        move_in_hub_partition(g.offset(x) + i, y, joining);
        bump(hub_nh_count_[y]);
        hub_inv_x_[y] += joining ? L.inv_degree[x] : -L.inv_degree[x];
      }
      bump(count_[y]);
      refresh(y);
    }
  } else {
    // Non-hub neighbours do not see hubs in their own buckets.
    for (std::size_t slot : L.hub_slots_of(x)) {
      const Vertex y = g.neighbors(x)[slot - g.offset(x)];
      move_in_hub_partition(slot, y, joining);
      bump(count_[y]);
      refresh(y);
    }
  }
  refresh(x);
  if (++events_since_rebuild_ >= kRebuildInterval) rebuild();
}

Vertex MutantState::uniform_nonhub_neighbor(Vertex v, bool mutant, Rng& rng) const {
  const auto& L = *layout_;
  const std::uint32_t eligible = mutant ? count_[v] : L.nonhub_degree[v] - count_[v];
  auto k = uniform_below(rng, eligible);
  for (Vertex u : L.graph.neighbors(v)) {
    if (L.is_hub[u] || (in_x_[u] != 0) != mutant) continue;
    if (k-- == 0) return u;
  }
  throw StateError("neighbour bookkeeping out of sync");
}

Vertex MutantState::uniform_neighbor_of_hub(Vertex hub, bool mutant, Rng& rng) const {
  const auto& L = *layout_;
  const auto base = L.hub_base[hub];
  const std::uint32_t c = count_[hub];
  const auto d = static_cast<std::uint32_t>(L.graph.degree(hub));
  if (mutant) return hub_perm_[base + uniform_below(rng, c)];
  return hub_perm_[base + c + uniform_below(rng, d - c)];
}

Vertex MutantState::sample_owner(int channel, Rng& rng) const {
  const double hubs = hub_rates_.total(channel);
  const double rest = rates_.total(channel);
  const double r = uniform01(rng) * (hubs + rest);
  const auto& L = *layout_;
  if ((r < hubs && hubs > 0) || rest <= 0) return L.hub_list[hub_rates_.locate(channel, r)];
  return L.nonhub_list[rates_.locate(channel, r - hubs)];
}

Vertex MutantState::sample_grow(Rng& rng) const {
  const auto v = sample_owner(0, rng);
  if (params().variant == Variant::DeathBirth) return v;
  if (!layout_->is_hub[v]) return uniform_nonhub_neighbor(v, false, rng);
  return in_x_[v] ? uniform_neighbor_of_hub(v, false, rng) : v;
}

Vertex MutantState::sample_shrink(Rng& rng) const {
  const auto v = sample_owner(1, rng);
  if (params().variant == Variant::DeathBirth) return v;
  if (!layout_->is_hub[v]) return uniform_nonhub_neighbor(v, true, rng);
  return in_x_[v] ? v : uniform_neighbor_of_hub(v, true, rng);
}

double Estimate::std_error() const {
  const auto valid = runs - timeouts;
  if (valid == 0) return 0;
  return std::sqrt(p_hat * (1 - p_hat) / static_cast<double>(valid));
}

MoranSimulator::MoranSimulator(const Graph& g, ProcessParams params) {
  validate(params);
  if (g.num_vertices() == 0) throw ParameterError("graph has no vertices");
  if (!g.is_connected()) {
    throw StructureError("the Moran process needs a connected graph");
  }
  layout_ = std::make_shared<const detail::EngineLayout>(g, params);
}

const Graph& MoranSimulator::graph() const { return layout_->graph; }
const ProcessParams& MoranSimulator::params() const { return layout_->params; }

MutantState MoranSimulator::initial_state(Vertex v0) const {
  if (v0 >= graph().num_vertices()) {
    throw ParameterError("start vertex " + std::to_string(v0) + " out of range");
  }
  const Vertex one[] = {v0};
  return MutantState(layout_, one);
}

MutantState MoranSimulator::state_of(std::span<const Vertex> members) const {
  return MutantState(layout_, members);
}

StepResult MoranSimulator::step_active(MutantState& state, Rng& rng) const {
  if (state.absorbed()) throw StateError("step_active called on an absorbed state");
  if (state.agg_up() <= 0 && state.agg_down() <= 0) {
    throw StateError("no transition possible from a non-absorbed state");
  }
  StepResult r;
  r.grew = uniform01(rng) < state.grow_probability();
  r.flipped = r.grew ? state.sample_grow(rng) : state.sample_shrink(rng);
  state.flip(r.flipped);
  return r;
}

Outcome MoranSimulator::run(Vertex v0, Rng& rng, const RunOptions& options) const {
  if (options.max_active_steps < 1) throw ParameterError("max_active_steps must be at least 1");
  auto state = initial_state(v0);
  Outcome out;
  std::uint64_t raw = 0;
  while (!state.absorbed() && out.active_steps < options.max_active_steps) {
    if (options.count_raw_steps) {
      const auto tp = state.transition_probs();
      const double change = std::min(1.0, tp.p_plus + tp.p_minus);
      raw += 1 + std::geometric_distribution<std::uint64_t>(change)(rng);
    }
    step_active(state, rng);
    ++out.active_steps;
    if (options.observer) options.observer(state);
  }
  if (state.size() == 0) {
    out.terminal = Terminal::Extinction;
  } else if (state.size() == graph().num_vertices()) {
    out.terminal = Terminal::Fixation;
  } else {
    out.terminal = Terminal::Timeout;
  }
  if (options.count_raw_steps) out.raw_steps = raw;
  return out;
}

Estimate MoranSimulator::estimate_fixation(Vertex v0, const EstimateOptions& options) const {
  if (options.runs == 0) throw ParameterError("estimate_fixation: runs must be at least 1");
  if (v0 >= graph().num_vertices()) {
    throw ParameterError("start vertex " + std::to_string(v0) + " out of range");
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> fixations{0};
  std::atomic<std::uint64_t> extinctions{0};
  std::atomic<std::uint64_t> timeouts{0};
  RunOptions run_options;
  run_options.max_active_steps = options.max_active_steps;

  auto worker = [&] {
    std::uint64_t fix = 0;
    std::uint64_t ext = 0;
    std::uint64_t tmo = 0;
    for (std::uint64_t i = next++; i < options.runs; i = next++) {
      Rng rng = make_stream(options.master_seed, i);
      switch (run(v0, rng, run_options).terminal) {
        case Terminal::Fixation: ++fix; break;
        case Terminal::Extinction: ++ext; break;
        case Terminal::Timeout: ++tmo; break;
      }
    }
    fixations += fix;
    extinctions += ext;
    timeouts += tmo;
  };
  const unsigned threads = std::max(1U, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  Estimate e;
  e.runs = options.runs;
  e.fixations = fixations;
  e.extinctions = extinctions;
  e.timeouts = timeouts;
  e.seed = options.master_seed;
  e.confidence = options.confidence;
  e.timeout_warning = e.timeouts > 0;
  const auto valid = e.runs - e.timeouts;
  if (valid > 0) {
    e.p_hat = static_cast<double>(e.fixations) / static_cast<double>(valid);
    e.ci = stats::binomial_ci(e.fixations, valid, options.confidence);
  }
  return e;
}

TransitionProbs transition_probs(const MutantState& state) { return state.transition_probs(); }

Estimate estimate_fixation(const Graph& g, Vertex v0, const ProcessParams& params,
                           const EstimateOptions& options) {
  return MoranSimulator(g, params).estimate_fixation(v0, options);
}

}  // namespace moranlab

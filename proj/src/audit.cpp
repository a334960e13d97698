#include "moranlab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "moranlab/errors.hpp"
#include "moranlab/rng.hpp"

namespace moranlab {

std::string status_name(PropertyStatus status) {
  switch (status) {
    case PropertyStatus::Pass: return "pass";
    case PropertyStatus::Fail: return "fail";
    case PropertyStatus::SampledPass: return "sampled-pass";
    case PropertyStatus::SampledFail: return "sampled-fail";
    case PropertyStatus::Skipped: return "skipped";
  }
  return "?";
}

namespace {

struct Bounds {
  double n = 0;
  double np = 0;
  double p = 0;
  double eps = 1;
  double omega0 = 0;       // as derived
  double omega_dist = 0;   // distance / cycle bound after clamping
  bool clamped = false;
  bool distance_feasible = true;
  double theta = 0;        // 1 / (e^2 sqrt(np))
};

Bounds bounds_of(const ThresholdParams& t, const AuditConfig& config) {
  Bounds b;
  b.n = static_cast<double>(t.n);
  b.np = t.np_nominal;
  b.p = t.np_nominal / b.n;
  b.eps = t.eps;
  b.omega0 = t.omega0;
  b.omega_dist = t.omega0;
  if (config.clamp_omega0 && t.omega0 < 3) {
    b.omega_dist = 3;
    b.clamped = true;
  }
  b.distance_feasible = b.omega_dist >= 3;
  b.theta = 1 / (std::exp(2.0) * std::sqrt(b.np));
  return b;
}

std::string num(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

// Membership mask of a vertex list; rejects out-of-range and repeated
// vertices.
std::vector<std::uint8_t> mask_of(const Graph& g, const std::vector<Vertex>& set) {
  std::vector<std::uint8_t> mask(g.num_vertices(), 0);
  for (Vertex v : set) {
    if (v >= g.num_vertices()) throw ParameterError("witness vertex " + std::to_string(v) + " out of range");
    if (mask[v]) throw ParameterError("witness repeats vertex " + std::to_string(v));
    mask[v] = 1;
  }
  return mask;
}

// Breadth-first search to a depth limit with reusable storage.
class BoundedBfs {
 public:
  explicit BoundedBfs(std::size_t n) : dist_(n, kUnreachable), parent_(n, 0), branch_(n, 0) {}

  void run(const Graph& g, Vertex source, std::uint32_t depth) {
    for (Vertex v : order_) dist_[v] = kUnreachable;
    order_.assign(1, source);
    dist_[source] = 0;
    parent_[source] = source;
    branch_[source] = source;
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const Vertex u = order_[head];
      if (dist_[u] >= depth) continue;
      for (Vertex v : g.neighbors(u)) {
        if (dist_[v] != kUnreachable) continue;
        dist_[v] = dist_[u] + 1;
        parent_[v] = u;
        branch_[v] = u == source ? v : branch_[u];
        order_.push_back(v);
      }
    }
  }

  const std::vector<Vertex>& order() const { return order_; }
  std::uint32_t dist(Vertex v) const { return dist_[v]; }
  Vertex parent(Vertex v) const { return parent_[v]; }
  Vertex branch(Vertex v) const { return branch_[v]; }

 private:
  std::vector<std::uint32_t> dist_;
  std::vector<Vertex> parent_;
  std::vector<Vertex> branch_;
  std::vector<Vertex> order_;
};

PropertyResult exact_result(char id, bool violated, Witness w, std::uint64_t checked) {
  PropertyResult r;
  r.id = id;
  r.checked = checked;
  r.status = violated ? PropertyStatus::Fail : PropertyStatus::Pass;
  if (violated) r.witness = std::move(w);
  return r;
}

PropertyResult check_a(const Graph& g, const Bounds& b) {
  Vertex best = 0;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (g.degree(v) > g.degree(best)) best = v;
  const bool violated = static_cast<double>(g.degree(best)) > 5 * b.np;
  return exact_result('a', violated, Witness{{best}, {}, static_cast<std::int64_t>(g.degree(best))},
                      g.num_vertices());
}

PropertyResult check_b(const Graph& g, const Bounds& b, const VertexClasses& c) {
  const double bound = std::pow(b.n, 1 - b.eps * b.eps / 4);
  const bool violated = static_cast<double>(c.s1.size()) > bound;
  return exact_result('b', violated, Witness{c.s1, {}, static_cast<std::int64_t>(c.s1.size())},
                      g.num_vertices());
}

PropertyResult skipped(char id, std::string reason) {
  PropertyResult r;
  r.id = id;
  r.status = PropertyStatus::Skipped;
  r.reason = std::move(reason);
  return r;
}

std::string clamp_note(const Bounds& b) {
  return b.clamped ? "omega0 " + num(b.omega0) + " clamped to " + num(b.omega_dist) : "";
}

PropertyResult check_c(const Graph& g, const Bounds& b, const VertexClasses& c, BoundedBfs& bfs) {
  if (!b.distance_feasible) return skipped('c', "omega0 = " + num(b.omega0) + " < 3 and clamping is off");
  const auto limit = static_cast<std::uint32_t>(std::floor(b.omega_dist));
  for (Vertex v : c.s1) {
    bfs.run(g, v, limit - 1);
    std::uint32_t best = kUnreachable;
    Vertex bx = 0;
    Vertex by = 0;
    for (Vertex x : bfs.order()) {
      if (x == v) continue;
      for (Vertex y : g.neighbors(x)) {
        if (y == v || bfs.dist(y) == kUnreachable || bfs.branch(x) == bfs.branch(y)) continue;
        const auto len = bfs.dist(x) + bfs.dist(y) + 1;
        if (len < best) {
          best = len;
          bx = x;
          by = y;
        }
      }
    }
    if (best <= limit) {
      // v ... bx, by ... back to v
      Witness w;
      std::vector<Vertex> left;
      for (Vertex u = bx; u != v; u = bfs.parent(u)) left.push_back(u);
      w.set.push_back(v);
      w.set.insert(w.set.end(), left.rbegin(), left.rend());
      for (Vertex u = by; u != v; u = bfs.parent(u)) w.set.push_back(u);
      w.k = best;
      auto r = exact_result('c', true, std::move(w), c.s1.size());
      r.reason = clamp_note(b);
      return r;
    }
  }
  auto r = exact_result('c', false, {}, c.s1.size());
  r.reason = clamp_note(b);
  return r;
}

PropertyResult check_d(const Graph& g, const Bounds& b, const VertexClasses& c, BoundedBfs& bfs) {
  if (!b.distance_feasible) return skipped('d', "omega0 = " + num(b.omega0) + " < 3 and clamping is off");
  // dist(v, w) < omega  <=>  dist <= ceil(omega) - 1
  const auto depth = static_cast<std::uint32_t>(std::ceil(b.omega_dist)) - 1;
  for (Vertex v : c.s0) {
    bfs.run(g, v, depth);
    for (Vertex w : bfs.order()) {
      if (w != v && c.in_s0(w) && static_cast<double>(bfs.dist(w)) < b.omega_dist) {
        auto r = exact_result('d', true, Witness{{v, w}, {}, bfs.dist(w)}, c.s0.size());
        r.reason = clamp_note(b);
        return r;
      }
    }
  }
  auto r = exact_result('d', false, {}, c.s0.size());
  r.reason = clamp_note(b);
  return r;
}

PropertyResult check_e(const Graph& g, const Bounds& b, const VertexClasses& c, BoundedBfs& bfs) {
  if (!b.distance_feasible) return skipped('e', "omega0 = " + num(b.omega0) + " < 3 and clamping is off");
  const auto depth = static_cast<std::uint32_t>(std::floor(b.omega_dist));
  for (Vertex v : c.s1) {
    bfs.run(g, v, depth);
    for (Vertex w : bfs.order()) {
      if (w != v && static_cast<double>(g.degree(w)) < b.omega_dist) {
        auto r = exact_result('e', true, Witness{{v, w}, {}, bfs.dist(w)}, c.s1.size());
        r.reason = clamp_note(b);
        return r;
      }
    }
  }
  auto r = exact_result('e', false, {}, c.s1.size());
  r.reason = clamp_note(b);
  return r;
}

// ---- subset-quantified properties ------------------------------------

struct SubsetRule {
  char id;
  double lo;
  double hi;
  bool connected;        // premise: S induces a connected subgraph
  bool avoid_s1;         // premise: S inside the complement of S1
};

std::vector<SubsetRule> subset_rules(const Bounds& b) {
  const double d98 = b.n / std::pow(b.np, 9.0 / 8.0);
  const double n1 = b.n - b.n / std::sqrt(b.np);
  return {
      {'f', 1, 2 * d98, false, false},
      {'g', 1, 2 * b.omega0, false, false},
      {'h', 10 / (b.eps * b.eps * b.eps), n1, false, true},
      {'i', std::max(1.0, b.omega0 / 2), d98, true, false},
      {'j', 1, b.n, true, false},
      {'k', 1, d98, true, false},
      {'l', b.n / (b.np * b.np), n1, false, false},
      {'m', d98, b.n / std::cbrt(b.np), false, false},
  };
}

std::size_t edges_inside(const Graph& g, const std::vector<Vertex>& s, const std::vector<std::uint8_t>& in_s) {
  std::size_t twice = 0;
  for (Vertex v : s)
    for (Vertex u : g.neighbors(v)) twice += in_s[u];
  return twice / 2;
}

// The set T used by property (m): the floor(theta (n - |S|)) vertices
// outside S with most neighbours in S, ties broken by label.
std::vector<Vertex> heaviest_outside(const Graph& g, const Bounds& b, const std::vector<Vertex>& s,
                                     const std::vector<std::uint8_t>& in_s) {
  const auto t_size = static_cast<std::size_t>(std::floor(b.theta * (b.n - static_cast<double>(s.size()))));
  std::vector<std::uint32_t> ds(g.num_vertices(), 0);
  for (Vertex v : s)
    for (Vertex u : g.neighbors(v))
      if (!in_s[u]) ++ds[u];
  std::vector<Vertex> out;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (!in_s[v]) out.push_back(v);
  const auto keep = std::min(t_size, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(),
                    [&](Vertex x, Vertex y) { return ds[x] != ds[y] ? ds[x] > ds[y] : x < y; });
  out.resize(keep);
  return out;
}

// Returns the violation witness of S for the rule, if any. Premises (size,
// connectivity, S outside S1) are the caller's responsibility.
std::optional<Witness> subset_violation(char id, const Graph& g, const Bounds& b, const VertexClasses& c,
                                        const std::vector<Vertex>& s) {
  const auto in_s = mask_of(g, s);
  const auto size = static_cast<double>(s.size());
  const Witness plain{s, {}, 0};
  switch (id) {
    case 'f':
      if (static_cast<double>(edges_inside(g, s, in_s)) >= 10 * size) return plain;
      return std::nullopt;
    case 'g':
      if (static_cast<double>(edges_inside(g, s, in_s)) > size) return plain;
      return std::nullopt;
    case 'h': {
      const double t = b.n - size - static_cast<double>(c.s1.size());
      std::size_t cross = 0;
      for (Vertex v : s)
        for (Vertex u : g.neighbors(v)) cross += !in_s[u] && !c.in_s1(u);
      const double mean = size * t * b.p;
      const auto e = static_cast<double>(cross);
      if (e < (1 - 2 * b.eps) * mean || e > (1 + 2 * b.eps) * mean) return plain;
      return std::nullopt;
    }
    case 'i': {
      std::size_t boundary = 0;
      for (Vertex v : s)
        for (Vertex u : g.neighbors(v)) boundary += !in_s[u];
      if (static_cast<double>(boundary) < size * b.np / 2) return plain;
      return std::nullopt;
    }
    case 'j': {
      std::vector<std::uint8_t> closed_s = in_s;
      for (Vertex v : s)
        for (Vertex u : g.neighbors(v)) closed_s[u] = 1;
      std::vector<std::uint8_t> closed_s1(g.num_vertices(), 0);
      for (Vertex v : c.s1) {
        closed_s1[v] = 1;
        for (Vertex u : g.neighbors(v)) closed_s1[u] = 1;
      }
      std::size_t common = 0;
      for (Vertex v = 0; v < g.num_vertices(); ++v) common += closed_s[v] && closed_s1[v];
      const double bound = 7 / (b.eps * b.eps) * std::max(1.0, size / b.omega0);
      if (static_cast<double>(common) > bound) return plain;
      return std::nullopt;
    }
    case 'k': {
      std::vector<std::uint32_t> ds(g.num_vertices(), 0);
      for (Vertex v : s)
        for (Vertex u : g.neighbors(v))
          if (!in_s[u]) ++ds[u];
      const auto kmax = static_cast<std::int64_t>(std::floor(std::cbrt(b.np)));
      for (std::int64_t k = 2; k <= kmax; ++k) {
        std::size_t count = 0;
        for (Vertex v = 0; v < g.num_vertices(); ++v) count += ds[v] == static_cast<std::uint32_t>(k);
        const double bound = b.eps / static_cast<double>(k * k) * size * b.np;
        if (static_cast<double>(count) > bound) return Witness{s, {}, k};
      }
      return std::nullopt;
    }
    case 'l': {
      const double mean = (b.n - size) * b.p;
      std::size_t atypical = 0;
      for (Vertex v : s) {
        std::size_t out = 0;
        for (Vertex u : g.neighbors(v)) out += !in_s[u];
        const auto d = static_cast<double>(out);
        atypical += d < (1 - b.eps) * mean || d > (1 + b.eps) * mean;
      }
      if (static_cast<double>(atypical) > b.theta * size) return plain;
      return std::nullopt;
    }
    case 'm': {
      auto t = heaviest_outside(g, b, s, in_s);
      if (t.empty()) return std::nullopt;
      std::vector<std::uint8_t> in_t(g.num_vertices(), 0);
      for (Vertex v : t) in_t[v] = 1;
      std::size_t cross = 0;
      for (Vertex v : s)
        for (Vertex u : g.neighbors(v)) cross += in_t[u];
      const double bound = std::pow(b.np, 0.25) * size * static_cast<double>(t.size()) * b.p;
      if (static_cast<double>(cross) >= bound) return Witness{s, std::move(t), 0};
      return std::nullopt;
    }
    default: break;
  }
  throw ParameterError(std::string("unknown property id '") + id + "'");
}

std::vector<std::size_t> size_grid(std::size_t lo, std::size_t hi, const std::vector<std::size_t>& fixed) {
  std::vector<std::size_t> out;
  if (!fixed.empty()) {
    for (auto x : fixed)
      if (lo <= x && x <= hi) out.push_back(x);
  } else {
    out.push_back(lo);
    for (std::size_t x = 1; x < hi; x <<= 1)
      if (x > lo) out.push_back(x);
    if (hi != lo) out.push_back(hi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool is_connected_subset(const Graph& g, const std::vector<Vertex>& s, const std::vector<std::uint8_t>& in_s) {
  if (s.empty()) return false;
  std::vector<std::uint8_t> seen(g.num_vertices(), 0);
  std::vector<Vertex> stack{s.front()};
  seen[s.front()] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (Vertex u : g.neighbors(v)) {
      if (in_s[u] && !seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == s.size();
}

PropertyResult check_subset_rule(const SubsetRule& rule, std::size_t index, const Graph& g, const Bounds& b,
                                 const VertexClasses& c, const AuditConfig& config) {
  const auto n = g.num_vertices();
  std::vector<std::uint8_t> allowed;
  std::size_t pool = n;
  if (rule.avoid_s1) {
    allowed.assign(n, 1);
    for (Vertex v : c.s1) allowed[v] = 0;
    pool = n - c.s1.size();
  }
  if (rule.id == 'k' && std::floor(std::cbrt(b.np)) < 2) {
    return skipped('k', "no k with 2 <= k <= (np)^(1/3) = " + num(std::cbrt(b.np)));
  }
  const double lo_real = std::max(1.0, std::ceil(rule.lo - 1e-9));
  const double hi_real = std::min(static_cast<double>(pool), std::floor(rule.hi + 1e-9));
  PropertyResult r;
  r.id = rule.id;
  std::optional<Witness> witness;

  auto premise_holds = [&](const std::vector<Vertex>& s, const std::vector<std::uint8_t>& in_s) {
    const auto size = static_cast<double>(s.size());
    if (size < lo_real || size > hi_real) return false;
    if (rule.avoid_s1)
      for (Vertex v : s)
        if (c.in_s1(v)) return false;
    return !rule.connected || is_connected_subset(g, s, in_s);
  };

  if (lo_real <= hi_real) {
    const auto lo = static_cast<std::size_t>(lo_real);
    const auto hi = static_cast<std::size_t>(hi_real);
    Rng rng = make_stream(config.seed, index);
    for (std::size_t size : size_grid(lo, hi, config.subset_size_grid)) {
      for (std::uint64_t k = 0; k < config.subset_samples && !witness; ++k) {
        std::optional<std::vector<Vertex>> s;
        for (int attempt = 0; attempt < 8 && !s; ++attempt) {
          s = grow_random_subset(g, size, rng, allowed, rule.connected);
        }
        if (!s) continue;
        ++r.checked;
        witness = subset_violation(rule.id, g, b, c, *s);
      }
      if (witness) break;
    }
  }
  for (const auto& s : config.extra_sets) {
    if (witness) break;
    if (s.empty()) continue;
    const auto in_s = mask_of(g, s);
    if (!premise_holds(s, in_s)) continue;
    ++r.checked;
    witness = subset_violation(rule.id, g, b, c, s);
  }
  if (r.checked == 0) {
    r.status = PropertyStatus::Skipped;
    r.reason = "no admissible set: size range [" + num(rule.lo) + ", " + num(rule.hi) + "]";
    return r;
  }
  r.status = witness ? PropertyStatus::SampledFail : PropertyStatus::SampledPass;
  r.witness = std::move(witness);
  return r;
}

}  // namespace

PropertyReport audit(const Graph& g, const ThresholdParams& params, const AuditConfig& config) {
  if (params.n != g.num_vertices()) throw ParameterError("audit: thresholds derived for another n");
  if (config.subset_samples < 1) throw ParameterError("audit: subset_samples must be at least 1");
  const auto b = bounds_of(params, config);
  const auto classes = classify(g, params);
  BoundedBfs bfs(g.num_vertices());

  PropertyReport report;
  report.params = params;
  report.omega0_distance = b.omega_dist;
  report.omega0_clamped = b.clamped;
  report.entries.push_back(check_a(g, b));
  report.entries.push_back(check_b(g, b, classes));
  report.entries.push_back(check_c(g, b, classes, bfs));
  report.entries.push_back(check_d(g, b, classes, bfs));
  report.entries.push_back(check_e(g, b, classes, bfs));
  const auto rules = subset_rules(b);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    report.entries.push_back(check_subset_rule(rules[i], i, g, b, classes, config));
  }
  return report;
}

// ---- independent re-verification --------------------------------------

namespace {

std::size_t count_edges_pairwise(const Graph& g, const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
  std::size_t e = 0;
  for (Vertex x : a)
    for (Vertex y : b) e += g.has_edge(x, y);
  return e;
}

std::vector<Vertex> complement(const Graph& g, const std::vector<std::uint8_t>& in_s) {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (!in_s[v]) out.push_back(v);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(std::string("malformed witness: ") + what);
}

}  // namespace

bool verify_witness(const Graph& g, const ThresholdParams& params, char id, const Witness& w,
                    const AuditConfig& config) {
  if (id < 'a' || id > 'm') throw ParameterError(std::string("unknown property id '") + id + "'");
  const auto b = bounds_of(params, config);
  const auto in_set = mask_of(g, w.set);
  const auto size = static_cast<double>(w.set.size());
  auto in_s1 = [&](Vertex v) { return !params.typical_degree(static_cast<double>(g.degree(v))); };
  auto in_s0 = [&](Vertex v) { return static_cast<double>(g.degree(v)) <= params.s0_cutoff; };
  const double d98 = b.n / std::pow(b.np, 9.0 / 8.0);
  const double n1 = b.n - b.n / std::sqrt(b.np);

  switch (id) {
    case 'a':
      require(w.set.size() == 1, "(a) expects one vertex");
      return static_cast<double>(g.degree(w.set[0])) > 5 * b.np;
    case 'b': {
      require(!w.set.empty(), "(b) expects the set S1");
      const bool all_s1 = std::all_of(w.set.begin(), w.set.end(), in_s1);
      return all_s1 && size > std::pow(b.n, 1 - b.eps * b.eps / 4);
    }
    case 'c': {
      require(w.set.size() >= 3, "(c) expects a cycle of at least three vertices");
      if (!b.distance_feasible) return false;
      for (std::size_t i = 0; i < w.set.size(); ++i) {
        if (!g.has_edge(w.set[i], w.set[(i + 1) % w.set.size()])) return false;
      }
      const bool meets_s1 = std::any_of(w.set.begin(), w.set.end(), in_s1);
      return meets_s1 && size <= b.omega_dist;
    }
    case 'd':
    case 'e': {
      require(w.set.size() == 2, "(d)/(e) expects a vertex pair");
      if (!b.distance_feasible) return false;
      const Vertex v = w.set[0];
      const Vertex x = w.set[1];
      const auto dist = static_cast<double>(bfs_distances(g, v)[x]);
      if (id == 'd') return in_s0(v) && in_s0(x) && dist < b.omega_dist;
      return in_s1(v) && static_cast<double>(g.degree(x)) < b.omega_dist && dist <= b.omega_dist;
    }
    default: break;
  }

  require(!w.set.empty(), "subset witness is empty");
  const auto rest = complement(g, in_set);
  auto connected = [&] { return is_connected_subset(g, w.set, in_set); };
  auto in_range = [&](double lo, double hi) { return size >= std::max(1.0, lo - 1e-9) && size <= hi + 1e-9; };
  switch (id) {
    case 'f':
      return in_range(1, 2 * d98) &&
             static_cast<double>(count_edges_pairwise(g, w.set, w.set)) / 2 >= 10 * size;
    case 'g':
      return in_range(1, 2 * b.omega0) &&
             static_cast<double>(count_edges_pairwise(g, w.set, w.set)) / 2 > size;
    case 'h': {
      if (!in_range(10 / (b.eps * b.eps * b.eps), n1)) return false;
      if (std::any_of(w.set.begin(), w.set.end(), in_s1)) return false;
      std::vector<Vertex> t;
      for (Vertex v : rest)
        if (!in_s1(v)) t.push_back(v);
      const auto e = static_cast<double>(count_edges_pairwise(g, w.set, t));
      const double mean = size * static_cast<double>(t.size()) * b.p;
      return e < (1 - 2 * b.eps) * mean || e > (1 + 2 * b.eps) * mean;
    }
    case 'i':
      return in_range(b.omega0 / 2, d98) && connected() &&
             static_cast<double>(count_edges_pairwise(g, w.set, rest)) < size * b.np / 2;
    case 'j': {
      if (!connected()) return false;
      std::vector<std::uint8_t> near_s1(g.num_vertices(), 0);
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        if (!in_s1(v)) continue;
        near_s1[v] = 1;
        for (Vertex u : g.neighbors(v)) near_s1[u] = 1;
      }
      std::size_t common = 0;
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        bool near_s = in_set[v] != 0;
        for (Vertex u : w.set) near_s = near_s || g.has_edge(u, v);
        common += near_s && near_s1[v];
      }
      return static_cast<double>(common) > 7 / (b.eps * b.eps) * std::max(1.0, size / b.omega0);
    }
    case 'k': {
      if (!in_range(1, d98) || !connected()) return false;
      if (w.k < 2 || static_cast<double>(w.k) > std::cbrt(b.np)) return false;
      std::size_t count = 0;
      for (Vertex v : rest) {
        std::int64_t ds = 0;
        for (Vertex u : w.set) ds += g.has_edge(u, v);
        count += ds == w.k;
      }
      return static_cast<double>(count) > b.eps / static_cast<double>(w.k * w.k) * size * b.np;
    }
    case 'l': {
      if (!in_range(b.n / (b.np * b.np), n1)) return false;
      const double mean = (b.n - size) * b.p;
      std::size_t atypical = 0;
      for (Vertex v : w.set) {
        const auto d = static_cast<double>(count_edges_pairwise(g, {v}, rest));
        atypical += d < (1 - b.eps) * mean || d > (1 + b.eps) * mean;
      }
      return static_cast<double>(atypical) > b.theta * size;
    }
    case 'm': {
      if (!in_range(d98, b.n / std::cbrt(b.np))) return false;
      mask_of(g, w.aux);  // rejects out-of-range or repeated vertices in T
      for (Vertex v : w.aux) require(!in_set[v], "(m) expects T disjoint from S");
      const auto t_size = std::floor(b.theta * (b.n - size));
      if (static_cast<double>(w.aux.size()) != t_size || w.aux.empty()) return false;
      const auto e = static_cast<double>(count_edges_pairwise(g, w.set, w.aux));
      return e >= std::pow(b.np, 0.25) * size * static_cast<double>(w.aux.size()) * b.p;
    }
    default: break;
  }
  return false;
}

std::string to_json(const PropertyReport& report) {
  using nlohmann::ordered_json;
  ordered_json out;
  out["thresholds"] = {{"eps", report.params.eps},
                       {"omega0", report.params.omega0},
                       {"n1", report.params.n1},
                       {"s0_cutoff", report.params.s0_cutoff}};
  out["np"] = report.params.np_nominal;
  out["omega0_distance"] = report.omega0_distance;
  out["omega0_clamped"] = report.omega0_clamped;
  ordered_json entries = ordered_json::array();
  for (const auto& e : report.entries) {
    ordered_json j;
    j["id"] = std::string(1, e.id);
    j["status"] = status_name(e.status);
    j["checked"] = e.checked;
    if (!e.reason.empty()) j["reason"] = e.reason;
    if (e.witness) {
      j["witness"] = {{"set", e.witness->set}, {"aux", e.witness->aux}, {"k", e.witness->k}};
    } else {
      j["witness"] = nullptr;
    }
    entries.push_back(std::move(j));
  }
  out["properties"] = std::move(entries);
  return out.dump(2);
}

}  // namespace moranlab

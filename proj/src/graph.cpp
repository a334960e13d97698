#include "moranlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "moranlab/errors.hpp"
#include "moranlab/rng.hpp"

namespace moranlab {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::size_t> deg(n, 0);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ParameterError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                           ") has an endpoint outside [0," + std::to_string(n) + ")");
    }
    if (u == v) {
      throw ParameterError("self-loop at vertex " + std::to_string(u));
    }
    ++deg[u];
    ++deg[v];
  }
  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.targets_.resize(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    g.targets_[fill[u]++] = v;
    g.targets_[fill[v]++] = u;
  }
  for (std::size_t v = 0; v < n; ++v) {
    auto first = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
    auto last = g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
    std::sort(first, last);
    if (auto dup = std::adjacent_find(first, last); dup != last) {
      throw ParameterError("duplicate edge (" + std::to_string(v) + "," +
                           std::to_string(*dup) + ")");
    }
  }
  return g;
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < num_vertices(); ++v) best = std::max(best, degree(static_cast<Vertex>(v)));
  return best;
}

double Graph::average_degree() const {
  const auto n = num_vertices();
  return n == 0 ? 0.0 : 2.0 * static_cast<double>(num_edges()) / static_cast<double>(n);
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  if (u >= num_vertices() || v >= num_vertices()) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

bool Graph::is_connected() const {
  const auto n = num_vertices();
  if (n <= 1) return true;
  auto dist = bfs_distances(*this, 0);
  return std::none_of(dist.begin(), dist.end(), [](auto d) { return d == kUnreachable; });
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t u = 0; u < num_vertices(); ++u) {
    for (Vertex v : neighbors(static_cast<Vertex>(u))) {
      if (u < v) out.emplace_back(static_cast<Vertex>(u), v);
    }
  }
  return out;
}

bool Graph::check_invariants() const {
  const auto n = num_vertices();
  std::size_t degree_sum = 0;
  for (std::size_t u = 0; u < n; ++u) {
    auto nb = neighbors(static_cast<Vertex>(u));
    degree_sum += nb.size();
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] >= n || nb[i] == u) return false;
      if (i > 0 && nb[i - 1] >= nb[i]) return false;
      if (!has_edge(nb[i], static_cast<Vertex>(u))) return false;
    }
  }
  return degree_sum == 2 * num_edges();
}

Graph complete_graph(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Graph::from_edges(n, e);
}

Graph cycle_graph(std::size_t n) {
  if (n < 3) throw ParameterError("cycle_graph: need n >= 3");
  std::vector<Edge> e;
  for (Vertex u = 0; u < n; ++u) e.emplace_back(u, static_cast<Vertex>((u + 1) % n));
  return Graph::from_edges(n, e);
}

Graph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex u = 0; u + 1 < n; ++u) e.emplace_back(u, u + 1);
  return Graph::from_edges(n, e);
}

Graph star_graph(std::size_t leaves) {
  std::vector<Edge> e;
  for (Vertex v = 1; v <= leaves; ++v) e.emplace_back(0, v);
  return Graph::from_edges(leaves + 1, e);
}

Graph complete_bipartite_graph(std::size_t a, std::size_t b) {
  std::vector<Edge> e;
  for (Vertex u = 0; u < a; ++u)
    for (Vertex v = 0; v < b; ++v) e.emplace_back(u, static_cast<Vertex>(a + v));
  return Graph::from_edges(a + b, e);
}

Graph generate_gnp(std::size_t n, double p, std::uint64_t seed) {
  if (n < 1) throw ParameterError("generate_gnp: need n >= 1");
  if (!(p >= 0 && p <= 1)) {
    throw ParameterError("generate_gnp: p must lie in [0,1], got " + std::to_string(p));
  }
  if (p == 1) return complete_graph(n);
  std::vector<Edge> e;
  if (p > 0) {
    e.reserve(static_cast<std::size_t>(p * static_cast<double>(n) * static_cast<double>(n - 1) / 2 * 1.1) + 16);
    Rng rng(seed);
    const double log_q = std::log1p(-p);
    // Pairs (v, w) with w < v enumerated row by row; each gap between
    // present pairs is Geometric(p).
    std::int64_t v = 1;
    std::int64_t w = -1;
    const auto nn = static_cast<std::int64_t>(n);
    while (v < nn) {
      const double r = uniform01(rng);
      w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
      while (w >= v && v < nn) {
        w -= v;
        ++v;
      }
      if (v < nn) e.emplace_back(static_cast<Vertex>(w), static_cast<Vertex>(v));
    }
  }
  return Graph::from_edges(n, e);
}

Graph relabel(const Graph& g, std::span<const Vertex> perm) {
  if (perm.size() != g.num_vertices()) throw ParameterError("relabel: permutation size mismatch");
  auto e = g.edges();
  for (auto& [u, v] : e) {
    u = perm[u];
    v = perm[v];
  }
  return Graph::from_edges(g.num_vertices(), e);
}

std::vector<std::uint32_t> bfs_distances(const Graph& g, Vertex source) {
  if (source >= g.num_vertices()) {
    throw ParameterError("bfs_distances: source " + std::to_string(source) + " out of range");
  }
  std::vector<std::uint32_t> dist(g.num_vertices(), kUnreachable);
  std::vector<Vertex> queue{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex u = queue[head];
    for (Vertex v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::optional<std::vector<Vertex>> grow_random_subset(const Graph& g, std::size_t size, Rng& rng,
                                                      std::span<const std::uint8_t> allowed,
                                                      bool connected) {
  const auto n = g.num_vertices();
  if (!allowed.empty() && allowed.size() != n) throw ParameterError("grow_random_subset: mask size mismatch");
  auto ok = [&](Vertex v) { return allowed.empty() || allowed[v] != 0; };
  std::vector<Vertex> pool;
  for (Vertex v = 0; v < n; ++v)
    if (ok(v)) pool.push_back(v);
  if (size > pool.size()) return std::nullopt;

  // 0: untouched, 1: on the frontier, 2: taken
  std::vector<std::uint8_t> mark(n, 0);
  std::vector<Vertex> frontier;
  std::vector<Vertex> out;
  out.reserve(size);
  auto take = [&](Vertex v) {
    mark[v] = 2;
    out.push_back(v);
    for (Vertex u : g.neighbors(v)) {
      if (mark[u] == 0 && ok(u)) {
        mark[u] = 1;
        frontier.push_back(u);
      }
    }
  };
  while (out.size() < size) {
    if (frontier.empty()) {
      if (!out.empty() && connected) return std::nullopt;
      // Uniform over allowed vertices not yet taken.
      Vertex start = 0;
      do {
        start = pool[uniform_below(rng, pool.size())];
      } while (mark[start] == 2);
      take(start);
      continue;
    }
    const auto i = uniform_below(rng, frontier.size());
    const Vertex v = frontier[i];
    frontier[i] = frontier.back();
    frontier.pop_back();
    take(v);
  }
  return out;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw ParameterError("edge list: missing \"n m\" header");
  std::size_t n = 0;
  std::size_t m = 0;
  {
    std::istringstream header(line);
    if (!(header >> n >> m)) throw ParameterError("edge list: malformed header \"" + line + "\"");
  }
  std::vector<Edge> e;
  e.reserve(m);
  while (next_line()) {
    std::istringstream row(line);
    long long u = -1;
    long long v = -1;
    if (!(row >> u >> v) || u < 0 || v < 0) {
      throw ParameterError("edge list: malformed edge line \"" + line + "\"");
    }
    e.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
  }
  if (e.size() != m) {
    throw ParameterError("edge list: header declares " + std::to_string(m) + " edges, found " +
                         std::to_string(e.size()));
  }
  return Graph::from_edges(n, e);
}

ThresholdParams derive_thresholds(std::size_t n, double p, std::optional<double> eps_override) {
  if (!(p >= 0 && p <= 1)) throw ParameterError("derive_thresholds: p must lie in [0,1]");
  const double np = static_cast<double>(n) * p;
  if (!(np > 1)) {
    throw ParameterError("derive_thresholds: need np > 1 (log np must be positive), got np=" +
                         std::to_string(np));
  }
  ThresholdParams t;
  t.n = n;
  t.np_nominal = np;
  if (eps_override) {
    if (!(*eps_override > 0 && *eps_override <= 1)) {
      throw ParameterError("derive_thresholds: eps must lie in (0,1]");
    }
    t.eps = *eps_override;
  } else {
    // 1/ln ln ln n is only below 1 for astronomically large n.
    const double l3 = n > 15 ? std::log(std::log(std::log(static_cast<double>(n)))) : 0.0;
    t.eps = l3 > 1 ? 1.0 / l3 : 1.0;
  }
  t.omega0 = t.eps * t.eps * np / (100 * std::log(np));
  t.n1 = static_cast<double>(n) - static_cast<double>(n) / std::sqrt(np);
  t.s0_cutoff = np / 10;
  t.typical_low = (1 - t.eps) * np;
  t.typical_high = (1 + t.eps) * np;
  return t;
}

double nominal_p(const Graph& g) {
  const auto n = g.num_vertices();
  return n == 0 ? 0.0 : g.average_degree() / static_cast<double>(n);
}

VertexClasses classify(const Graph& g, const ThresholdParams& params) {
  VertexClasses c;
  c.flags.assign(g.num_vertices(), 0);
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const auto d = static_cast<double>(g.degree(v));
    if (d <= params.s0_cutoff) {
      c.flags[v] |= 1U;
      c.s0.push_back(v);
    }
    if (!params.typical_degree(d)) {
      c.flags[v] |= 2U;
      c.s1.push_back(v);
    }
  }
  return c;
}

}  // namespace moranlab

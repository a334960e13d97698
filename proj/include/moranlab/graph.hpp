#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "moranlab/rng.hpp"

namespace moranlab {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

// Undirected simple graph in compressed adjacency form. Neighbour lists are
// sorted and duplicate free; the graph is immutable once built.
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list. Self-loops, duplicate edges and endpoints
  // outside [0, n) are rejected with ParameterError.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t num_vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return targets_.size() / 2; }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const;
  double average_degree() const;

  bool has_edge(Vertex u, Vertex v) const;
  bool is_connected() const;

  // Each edge once, as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const;

  // Position of v's adjacency slice inside the flat target array; lets
  // per-edge side tables be indexed as offset(v) + i.
  std::size_t offset(Vertex v) const { return offsets_[v]; }

  // Exhaustive symmetry / ordering check of the adjacency structure.
  bool check_invariants() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> targets_;
};

// Named families used throughout tests and the CLI.
Graph complete_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
Graph path_graph(std::size_t n);
// Star with centre 0 and leaves 1..leaves.
Graph star_graph(std::size_t leaves);
Graph complete_bipartite_graph(std::size_t a, std::size_t b);

// G(n,p) with each of the C(n,2) pairs present independently with
// probability p. Skips over absent pairs geometrically, so cost is
// proportional to the number of edges produced. Deterministic in seed.
Graph generate_gnp(std::size_t n, double p, std::uint64_t seed);

// Returns g with vertex v renamed perm[v].
Graph relabel(const Graph& g, std::span<const Vertex> perm);

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

// Hop distances from source; kUnreachable where no path exists.
std::vector<std::uint32_t> bfs_distances(const Graph& g, Vertex source);

// Random vertex set of the given size grown from a uniform start by
// repeatedly adding a uniform vertex of the current frontier. Only vertices
// with allowed[v] != 0 are used (an empty mask allows all). When the piece
// being grown runs out of frontier, a connected request fails (nullopt);
// otherwise growth restarts from a fresh uniform vertex.
std::optional<std::vector<Vertex>> grow_random_subset(const Graph& g, std::size_t size, Rng& rng,
                                                      std::span<const std::uint8_t> allowed = {},
                                                      bool connected = true);

// Edge-list text format: header "n m", then m lines "u v" (0-indexed).
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

// Thresholds that classify vertices by degree relative to the nominal
// expected degree np.
struct ThresholdParams {
  std::size_t n = 0;
  double np_nominal = 0;
  double eps = 1;
  double omega0 = 0;     // eps^2 np / (100 ln np)
  double n1 = 0;         // n - n / sqrt(np)
  double s0_cutoff = 0;  // np / 10
  double typical_low = 0;   // (1 - eps) np
  double typical_high = 0;  // (1 + eps) np

  bool typical_degree(double d) const { return typical_low <= d && d <= typical_high; }
};

// eps defaults to min(1, 1/ln ln ln n); requires np > 1.
ThresholdParams derive_thresholds(std::size_t n, double p,
                                  std::optional<double> eps_override = std::nullopt);

// Nominal edge probability of an arbitrary graph: average degree / n, so
// that n*p reproduces the realised average degree.
double nominal_p(const Graph& g);

struct VertexClasses {
  std::vector<Vertex> s0;  // d(v) <= np/10
  std::vector<Vertex> s1;  // d(v) outside [(1-eps)np, (1+eps)np]
  std::vector<std::uint8_t> flags;  // bit 0: in s0, bit 1: in s1

  bool in_s0(Vertex v) const { return (flags[v] & 1U) != 0; }
  bool in_s1(Vertex v) const { return (flags[v] & 2U) != 0; }
};

VertexClasses classify(const Graph& g, const ThresholdParams& params);

}  // namespace moranlab

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "moranlab/graph.hpp"

namespace moranlab {

enum class PropertyStatus { Pass, Fail, SampledPass, SampledFail, Skipped };

std::string status_name(PropertyStatus status);

// A concrete violation. `set` is the vertex set the property quantifies
// over (a single vertex, a pair, a cycle in order, or a subset S); `aux`
// holds a second set where one is needed (the T of property m); `k` holds
// a distance, cycle length or the k of property k.
struct Witness {
  std::vector<Vertex> set;
  std::vector<Vertex> aux;
  std::int64_t k = 0;
};

struct PropertyResult {
  char id = 'a';
  PropertyStatus status = PropertyStatus::Skipped;
  std::optional<Witness> witness;
  std::string reason;          // why skipped, or what was clamped
  std::uint64_t checked = 0;   // vertices / sets examined
};

struct AuditConfig {
  std::uint64_t subset_samples = 20;       // random sets per grid size
  std::vector<std::size_t> subset_size_grid;  // empty: powers of two plus range ends
  std::uint64_t seed = 1;
  bool clamp_omega0 = true;  // use max(omega0, 3) as distance / cycle bound
  // Extra sets (e.g. mutant sets visited by a simulation) checked alongside
  // the random ones wherever they satisfy a property's premise.
  std::vector<std::vector<Vertex>> extra_sets;
};

struct PropertyReport {
  ThresholdParams params;
  double omega0_distance = 0;  // bound used by (c), (d), (e)
  bool omega0_clamped = false;
  std::vector<PropertyResult> entries;  // exactly 13, ids 'a'..'m'
};

PropertyReport audit(const Graph& g, const ThresholdParams& params, const AuditConfig& config = {});

// Recomputes, from scratch, the single inequality the witness claims is
// violated. True iff the violation is confirmed. Throws ParameterError for
// an unknown id or a witness of the wrong shape.
bool verify_witness(const Graph& g, const ThresholdParams& params, char id, const Witness& witness,
                    const AuditConfig& config = {});

// Deterministic JSON rendering.
std::string to_json(const PropertyReport& report);

}  // namespace moranlab

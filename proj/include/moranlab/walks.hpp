#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace moranlab {

// q_j = (s^-j - s^-m) / (1 - s^-m), j = 0..m: absorption at 0 of the walk
// with constant rightward bias s.
std::vector<double> q_vector(double s, std::size_t m);

struct RegimeWalkSpec;

// Where probability mass goes when a row's source term fires. A null chain
// is the pure-bias walk of q_vector(spec.s, spec.m); otherwise the given
// layer of another specification. Lands at position j + offset.
struct Continuation {
  std::shared_ptr<const RegimeWalkSpec> chain;
  std::size_t layer = 0;
  int offset = 0;
};

struct SourceTerm {
  double weight = 0;
  Continuation target;
};

// p_j = up p_{j+1} + down p_{j-1} + cross_down p'_{j-1} + sum weight * value(target)
// where p' is the layer named by WalkLayer::cross_layer.
struct WalkRow {
  double up = 0;
  double down = 0;
  double cross_down = 0;
  std::vector<SourceTerm> sources;

  double total() const;
};

struct WalkLayer {
  std::vector<WalkRow> rows;  // indexed by j = 0..m; rows 0 and m are boundaries
  std::optional<std::size_t> cross_layer;  // must precede this layer
};

// Boundary-value walk on {0..m} with p_0 = 1, p_m = 0 in every layer.
struct RegimeWalkSpec {
  std::size_t m = 0;
  double s = 2;  // bias of the pure-bias continuation
  std::vector<WalkLayer> layers;
  std::string description;
};

// Throws SpecificationError naming the offending layer and j when a
// coefficient leaves [0,1] or a row does not sum to 1 within 1e-12.
void validate(const RegimeWalkSpec& spec);

struct RecurrenceSolution {
  std::vector<std::vector<double>> layers;  // layers[l][j], j = 0..m
  double residual = 0;

  const std::vector<double>& p() const { return layers.front(); }
  double p1() const { return layers.front().at(1); }
};

// Layer by layer tridiagonal elimination; the residual is measured by
// substituting the solution back into every row.
RecurrenceSolution solve_recurrence(const RegimeWalkSpec& spec);

// Where a regime switch lands in the pure-bias walk: at q_j as written in
// the recurrences, or at q_{j-1}, treating the switch as part of the step
// down that triggers it.
enum class Landing { AtJ, AtJMinus1 };

// Two readings of the down weight mu_j of the dbf5 recurrence.
enum class Dbf5Reading {
  Printed,  // mu_j = s(alpha + c) / (s(j - 1 + alpha + c) + j), c = 1/(d(y0) + s - 1)
  Drift     // mu_j = j / (s(j - 1 + alpha + c) + j): drift of the up/down ratio
};

// Chain the dbf4 psi term continues into.
enum class Dbf4Psi { Dbf3Layer1, Dbf2 };

struct WalkOptions {
  std::size_t m = 200;
  Landing landing = Landing::AtJ;
};

// alpha = d(v0)/np.
RegimeWalkSpec bdf3(double alpha, double s, const WalkOptions& options = {});
RegimeWalkSpec bdf4(double d_y0, double s, const WalkOptions& options = {});
RegimeWalkSpec dbf2(double alpha, double s, const WalkOptions& options = {});
// Layer 0: delta = 0, layer 1: delta = 1.
RegimeWalkSpec dbf3_coupled(double d_x1, double s, const WalkOptions& options = {});
RegimeWalkSpec dbf4(double d_y0, double s, double np, const WalkOptions& options = {},
                    Dbf4Psi psi = Dbf4Psi::Dbf3Layer1);
RegimeWalkSpec dbf5(double alpha, double d_y0, double s, const WalkOptions& options = {},
                    Dbf5Reading reading = Dbf5Reading::Printed);
// Constant bias: up s/(s+1), down 1/(s+1).
RegimeWalkSpec constant_bias(double s, std::size_t m);

struct SimulationEstimate {
  double p_hat = 0;  // fraction absorbed at 0
  std::uint64_t runs = 0;
  std::uint64_t absorbed_at_zero = 0;
};

// Monte Carlo of the chain the specification encodes, continuations
// included, started at (layer, start).
SimulationEstimate simulate_spec(const RegimeWalkSpec& spec, std::size_t start, std::uint64_t runs,
                                 std::uint64_t seed, std::size_t layer = 0);

enum class WalkFamily { Bdf3, Bdf4, Dbf2, Dbf3, Dbf4, Dbf5 };

WalkFamily parse_family(const std::string& name);
std::string family_name(WalkFamily family);

// Everything needed to build one family member.
struct FamilyParams {
  WalkFamily family = WalkFamily::Bdf3;
  double alpha = 1;
  double d_y0 = 1;
  double d_x1 = 1;
  double s = 2;
  double np = 10;
  WalkOptions options;
  Dbf5Reading dbf5_reading = Dbf5Reading::Printed;
  Dbf4Psi dbf4_psi = Dbf4Psi::Dbf3Layer1;
};

RegimeWalkSpec build_family(const FamilyParams& params);

// p_1 at m and at 2m; converged when they agree within tolerance.
struct ConvergenceCheck {
  double p1_m = 0;
  double p1_2m = 0;
  double tolerance = 1e-6;
  bool converged = false;
};

ConvergenceCheck check_m_convergence(const FamilyParams& params, double tolerance = 1e-6);

}  // namespace moranlab

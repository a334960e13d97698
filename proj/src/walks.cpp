#include "moranlab/walks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "moranlab/errors.hpp"
#include "moranlab/rng.hpp"
#include "moranlab/tridiagonal.hpp"

namespace moranlab {

std::vector<double> q_vector(double s, std::size_t m) {
  if (!(s > 1)) throw DomainError("q_vector: need s > 1");
  if (m < 1) throw ParameterError("q_vector: need m >= 1");
  const double ls = std::log(s);
  const double denom = -std::expm1(-static_cast<double>(m) * ls);
  std::vector<double> q(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const auto rest = static_cast<double>(m - j);
    q[j] = std::exp(-static_cast<double>(j) * ls) * -std::expm1(-rest * ls) / denom;
  }
  q[0] = 1;
  q[m] = 0;
  return q;
}

double WalkRow::total() const {
  double t = up + down + cross_down;
  for (const auto& src : sources) t += src.weight;
  return t;
}

namespace {

constexpr double kRowTolerance = 1e-12;

std::string where(std::size_t layer, std::size_t j) {
  return "layer " + std::to_string(layer) + ", j=" + std::to_string(j);
}

void check_probability(double x, const char* name, std::size_t layer, std::size_t j) {
  if (!(x >= 0 && x <= 1)) {
    std::ostringstream msg;
    msg << "coefficient " << name << " = " << x << " outside [0,1] at " << where(layer, j);
    throw SpecificationError(msg.str());
  }
}

// Value of a continuation landing at position k.
double continuation_value(const RegimeWalkSpec& owner, const Continuation& c, std::int64_t k,
                          const std::vector<double>& q,
                          std::map<const RegimeWalkSpec*, RecurrenceSolution>& solved) {
  const RegimeWalkSpec* target = c.chain ? c.chain.get() : nullptr;
  const auto m = static_cast<std::int64_t>(target ? target->m : owner.m);
  if (k <= 0) return 1;
  if (k >= m) return 0;
  if (!target) return q[static_cast<std::size_t>(k)];
  auto it = solved.find(target);
  if (it == solved.end()) it = solved.emplace(target, solve_recurrence(*target)).first;
  return it->second.layers.at(c.layer)[static_cast<std::size_t>(k)];
}

}  // namespace

void validate(const RegimeWalkSpec& spec) {
  if (spec.m < 1) throw SpecificationError("walk specification needs m >= 1");
  if (spec.layers.empty()) throw SpecificationError("walk specification has no layers");
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& layer = spec.layers[l];
    if (layer.rows.size() != spec.m + 1) {
      throw SpecificationError("layer " + std::to_string(l) + " must have m+1 rows");
    }
    if (layer.cross_layer && *layer.cross_layer >= l) {
      throw SpecificationError("layer " + std::to_string(l) + " crosses into a later layer");
    }
    for (std::size_t j = 1; j < spec.m; ++j) {
      const auto& row = layer.rows[j];
      check_probability(row.up, "up", l, j);
      check_probability(row.down, "down", l, j);
      check_probability(row.cross_down, "cross_down", l, j);
      if (row.cross_down > 0 && !layer.cross_layer) {
        throw SpecificationError("cross_down without a cross layer at " + where(l, j));
      }
      for (const auto& src : row.sources) {
        check_probability(src.weight, "source", l, j);
        if (src.target.chain) {
          if (src.target.layer >= src.target.chain->layers.size()) {
            throw SpecificationError("continuation into a missing layer at " + where(l, j));
          }
        } else if (!(spec.s > 1)) {
          throw SpecificationError("pure-bias continuation needs s > 1");
        }
      }
      if (std::abs(row.total() - 1) > kRowTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "row sum " << row.total() << " != 1 at " << where(l, j);
        throw SpecificationError(msg.str());
      }
    }
  }
}

RecurrenceSolution solve_recurrence(const RegimeWalkSpec& spec) {
  validate(spec);
  const std::size_t m = spec.m;
  std::vector<double> q;
  if (spec.s > 1) q = q_vector(spec.s, m);
  std::map<const RegimeWalkSpec*, RecurrenceSolution> solved;

  RecurrenceSolution sol;
  sol.layers.assign(spec.layers.size(), std::vector<double>(m + 1, 0.0));
  std::vector<std::vector<double>> fixed_part(spec.layers.size(), std::vector<double>(m + 1, 0.0));

  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& layer = spec.layers[l];
    auto& p = sol.layers[l];
    p[0] = 1;
    p[m] = 0;
    if (m < 2) continue;
    const std::size_t k = m - 1;
    std::vector<double> lower(k), diag(k, 1.0), upper(k), rhs(k);
    for (std::size_t j = 1; j < m; ++j) {
      const auto& row = layer.rows[j];
      double c = 0;
      for (const auto& src : row.sources) {
        const auto pos = static_cast<std::int64_t>(j) + src.target.offset;
        c += src.weight * continuation_value(spec, src.target, pos, q, solved);
      }
      if (row.cross_down > 0) c += row.cross_down * sol.layers[*layer.cross_layer][j - 1];
      fixed_part[l][j] = c;
      const std::size_t i = j - 1;
      lower[i] = -row.down;
      upper[i] = -row.up;
      rhs[i] = c + (j == 1 ? row.down * p[0] : 0.0);
    }
    const auto x = solve_tridiagonal(lower, diag, upper, rhs);
    for (std::size_t j = 1; j < m; ++j) p[j] = x[j - 1];
  }

  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& p = sol.layers[l];
    for (std::size_t j = 1; j < m; ++j) {
      const auto& row = spec.layers[l].rows[j];
      const double rhs = row.up * p[j + 1] + row.down * p[j - 1] + fixed_part[l][j];
      sol.residual = std::max(sol.residual, std::abs(p[j] - rhs));
    }
  }
  return sol;
}

namespace {

void check_family_inputs(double s, std::initializer_list<double> positives, const char* name) {
  if (!(s > 1)) throw DomainError(std::string(name) + ": need s > 1");
  for (double x : positives) {
    if (!(x > 0) || !std::isfinite(x)) throw ParameterError(std::string(name) + ": parameters must be positive");
  }
}

Continuation q_landing(Landing landing) { return {nullptr, 0, landing == Landing::AtJ ? 0 : -1}; }

std::string landing_tag(Landing landing) { return landing == Landing::AtJ ? "q_j" : "q_{j-1}"; }

RegimeWalkSpec single_layer(std::size_t m, double s, std::string description,
                            const std::function<WalkRow(double)>& row_at) {
  if (m < 1) throw ParameterError("walk: need m >= 1");
  RegimeWalkSpec spec;
  spec.m = m;
  spec.s = s;
  spec.description = std::move(description);
  spec.layers.resize(1);
  spec.layers[0].rows.resize(m + 1);
  for (std::size_t j = 1; j < m; ++j) spec.layers[0].rows[j] = row_at(static_cast<double>(j));
  validate(spec);
  return spec;
}

// The common shape: up A, down (1-A)(1-eta), switch (1-A) eta.
WalkRow switching_row(double a, double eta, Landing landing) {
  WalkRow row;
  row.up = a;
  row.down = (1 - a) * (1 - eta);
  row.sources.push_back({(1 - a) * eta, q_landing(landing)});
  return row;
}

std::string fmt(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

}  // namespace

RegimeWalkSpec constant_bias(double s, std::size_t m) {
  if (!(s > 0)) throw ParameterError("constant_bias: need s > 0");
  return single_layer(m, s, "constant_bias(s=" + fmt(s) + ", m=" + std::to_string(m) + ")",
                      [s](double) {
                        WalkRow row;
                        row.up = s / (s + 1);
                        row.down = 1 / (s + 1);
                        return row;
                      });
}

RegimeWalkSpec bdf3(double alpha, double s, const WalkOptions& o) {
  check_family_inputs(s, {alpha}, "bdf3");
  return single_layer(o.m, s,
                      "bdf3(alpha=" + fmt(alpha) + ", s=" + fmt(s) + ", m=" + std::to_string(o.m) +
                          ", landing=" + landing_tag(o.landing) + ")",
                      [&](double j) {
                        const double a = s / (s + 1 + (alpha - 1) / j);
                        const double eta = alpha / (j - 1 + alpha);
                        return switching_row(a, eta, o.landing);
                      });
}

RegimeWalkSpec bdf4(double d_y0, double s, const WalkOptions& o) {
  check_family_inputs(s, {d_y0}, "bdf4");
  return single_layer(o.m, s,
                      "bdf4(d_y0=" + fmt(d_y0) + ", s=" + fmt(s) + ", m=" + std::to_string(o.m) +
                          ", landing=" + landing_tag(o.landing) + ")",
                      [&](double j) {
                        const double b = s / (s + 1 + 1 / (j * d_y0));
                        return switching_row(b, 1 / j, o.landing);
                      });
}

RegimeWalkSpec dbf2(double alpha, double s, const WalkOptions& o) {
  check_family_inputs(s, {alpha}, "dbf2");
  return single_layer(o.m, s,
                      "dbf2(alpha=" + fmt(alpha) + ", s=" + fmt(s) + ", m=" + std::to_string(o.m) +
                          ", landing=" + landing_tag(o.landing) + ")",
                      [&](double j) {
                        const double drift = s * (j - 1 + alpha);
                        const double a = drift / (drift + j);
                        const double eta = s / ((s + 1) * j - 1 + alpha);
                        return switching_row(a, eta, o.landing);
                      });
}

RegimeWalkSpec dbf3_coupled(double d_x1, double s, const WalkOptions& o) {
  check_family_inputs(s, {d_x1}, "dbf3_coupled");
  if (d_x1 < 1) throw ParameterError("dbf3_coupled: d(x1) >= 1 since x1 neighbours v0");
  if (o.m < 1) throw ParameterError("walk: need m >= 1");
  auto psi = [&](double delta) { return (d_x1 - delta) / (s * delta + d_x1 - delta); };
  auto gamma = [&](double j, double delta) {
    const double num = s * (j - 1);
    // At j = 1 the numerator vanishes (and so may the denominator).
    return num == 0 ? 0.0 : num / (num + j - 1 + psi(delta));
  };
  RegimeWalkSpec spec;
  spec.m = o.m;
  spec.s = s;
  spec.description = "dbf3_coupled(d_x1=" + fmt(d_x1) + ", s=" + fmt(s) + ", m=" + std::to_string(o.m) +
                     ", landing=" + landing_tag(o.landing) + ")";
  spec.layers.resize(2);
  spec.layers[0].rows.resize(o.m + 1);
  spec.layers[1].rows.resize(o.m + 1);
  spec.layers[1].cross_layer = 0;
  for (std::size_t jj = 1; jj < o.m; ++jj) {
    const auto j = static_cast<double>(jj);
    const double eta = s / (s * j + j - 1);
    const double theta = eta;
    spec.layers[0].rows[jj] = switching_row(gamma(j, 0), eta, o.landing);
    const double g1 = gamma(j, 1);
    WalkRow row;
    row.up = g1;
    row.down = (1 - g1) * (1 - eta) * (1 - theta);
    row.cross_down = (1 - g1) * (1 - eta) * theta;
    row.sources.push_back({(1 - g1) * eta, q_landing(o.landing)});
    spec.layers[1].rows[jj] = row;
  }
  validate(spec);
  return spec;
}

RegimeWalkSpec dbf4(double d_y0, double s, double np, const WalkOptions& o, Dbf4Psi psi) {
  check_family_inputs(s, {d_y0, np}, "dbf4");
  Continuation psi_target;
  if (psi == Dbf4Psi::Dbf3Layer1) {
    psi_target.chain = std::make_shared<const RegimeWalkSpec>(dbf3_coupled(d_y0, s, o));
    psi_target.layer = 1;
  } else {
    psi_target.chain = std::make_shared<const RegimeWalkSpec>(dbf2(d_y0 / np, s, o));
  }
  const double c = 1 / (d_y0 + s - 1);
  return single_layer(o.m, s,
                      "dbf4(d_y0=" + fmt(d_y0) + ", s=" + fmt(s) + ", np=" + fmt(np) +
                          ", m=" + std::to_string(o.m) + ", landing=" + landing_tag(o.landing) +
                          ", psi=" + (psi == Dbf4Psi::Dbf3Layer1 ? "dbf3_layer1" : "dbf2") + ")",
                      [&](double j) {
                        const double lambda = s * (j + c) / (s * (j + c) + j);
                        const double xi = d_y0 / (np * (j - 1) + d_y0);
                        const double eta = 1 / j;
                        WalkRow row;
                        row.up = lambda * (1 - xi);
                        row.down = (1 - lambda) * (1 - eta);
                        row.sources.push_back({lambda * xi, psi_target});
                        row.sources.push_back({(1 - lambda) * eta, q_landing(o.landing)});
                        return row;
                      });
}

RegimeWalkSpec dbf5(double alpha, double d_y0, double s, const WalkOptions& o, Dbf5Reading reading) {
  check_family_inputs(s, {alpha, d_y0}, "dbf5");
  const double c = 1 / (d_y0 + s - 1);
  return single_layer(o.m, s,
                      "dbf5(alpha=" + fmt(alpha) + ", d_y0=" + fmt(d_y0) + ", s=" + fmt(s) +
                          ", m=" + std::to_string(o.m) + ", landing=" + landing_tag(o.landing) +
                          ", mu=" + (reading == Dbf5Reading::Printed ? "printed" : "drift") + ")",
                      [&](double j) {
                        const double denom = s * (j - 1 + alpha + c) + j;
                        const double mu = reading == Dbf5Reading::Printed ? s * (alpha + c) / denom : j / denom;
                        const double eta = alpha / (j - 1 + alpha);
                        WalkRow row;
                        row.up = 1 - mu;
                        row.down = mu * (1 - eta);
                        row.sources.push_back({mu * eta, q_landing(o.landing)});
                        return row;
                      });
}

namespace {

constexpr std::uint32_t kAtZero = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kAtTop = kAtZero - 1;

// Flattened chain: each state holds up to five cumulative thresholds on a
// raw 64-bit draw.
struct CompiledChain {
  struct State {
    std::array<std::uint64_t, 5> threshold{};
    std::array<std::uint32_t, 5> next{};
    std::uint8_t count = 0;
  };
  std::vector<State> states;

  // Chains are either specifications or pure-bias walks keyed by (s, m).
  std::map<const RegimeWalkSpec*, std::uint32_t> spec_base;
  std::map<std::pair<double, std::size_t>, std::uint32_t> bias_base;

  static std::uint64_t to_threshold(double cum) {
    if (cum >= 1) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(std::ldexp(cum, 64));
  }

  static void add(State& st, double& cum, double weight, std::uint32_t next) {
    if (weight <= 0) return;
    cum += weight;
    st.threshold[st.count] = to_threshold(cum);
    st.next[st.count] = next;
    ++st.count;
  }

  static void finish(State& st) {
    if (st.count > 0) st.threshold[st.count - 1] = std::numeric_limits<std::uint64_t>::max();
  }

  static std::uint32_t at(std::uint32_t base, std::size_t m, std::size_t layer, std::int64_t pos) {
    if (pos <= 0) return kAtZero;
    if (pos >= static_cast<std::int64_t>(m)) return kAtTop;
    return base + static_cast<std::uint32_t>(layer * (m + 1) + static_cast<std::size_t>(pos));
  }

  std::uint32_t bias_chain(double s, std::size_t m) {
    const auto key = std::make_pair(s, m);
    if (auto it = bias_base.find(key); it != bias_base.end()) return it->second;
    const auto base = static_cast<std::uint32_t>(states.size());
    bias_base.emplace(key, base);
    states.resize(states.size() + m + 1);
    for (std::size_t j = 1; j < m; ++j) {
      auto& st = states[base + j];
      double cum = 0;
      add(st, cum, s / (s + 1), at(base, m, 0, static_cast<std::int64_t>(j) + 1));
      add(st, cum, 1 / (s + 1), at(base, m, 0, static_cast<std::int64_t>(j) - 1));
      finish(st);
    }
    return base;
  }

  std::uint32_t spec_chain(const RegimeWalkSpec& spec) {
    if (auto it = spec_base.find(&spec); it != spec_base.end()) return it->second;
    const auto m = spec.m;
    const auto base = static_cast<std::uint32_t>(states.size());
    spec_base.emplace(&spec, base);
    states.resize(states.size() + spec.layers.size() * (m + 1));
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
      const auto& layer = spec.layers[l];
      for (std::size_t j = 1; j < m; ++j) {
        const auto& row = layer.rows[j];
        const auto jj = static_cast<std::int64_t>(j);
        State st;
        double cum = 0;
        add(st, cum, row.up, at(base, m, l, jj + 1));
        add(st, cum, row.down, at(base, m, l, jj - 1));
        if (row.cross_down > 0) add(st, cum, row.cross_down, at(base, m, *layer.cross_layer, jj - 1));
        for (const auto& src : row.sources) {
          const auto pos = jj + src.target.offset;
          std::uint32_t next = 0;
          if (src.target.chain) {
            const auto& sub = *src.target.chain;
            next = at(spec_chain(sub), sub.m, src.target.layer, pos);
          } else {
            next = at(bias_chain(spec.s, m), m, 0, pos);
          }
          add(st, cum, src.weight, next);
        }
        finish(st);
        // spec_chain/bias_chain may have reallocated the state vector.
        states[at(base, m, l, jj)] = st;
      }
    }
    return base;
  }
};

}  // namespace

SimulationEstimate simulate_spec(const RegimeWalkSpec& spec, std::size_t start, std::uint64_t runs,
                                 std::uint64_t seed, std::size_t layer) {
  validate(spec);
  if (start < 1 || start >= spec.m) {
    throw ParameterError("simulate_spec: start must lie in [1, m-1]");
  }
  if (layer >= spec.layers.size()) throw ParameterError("simulate_spec: no such layer");
  if (runs == 0) throw ParameterError("simulate_spec: runs must be at least 1");
  CompiledChain chain;
  const auto base = chain.spec_chain(spec);
  const auto first = CompiledChain::at(base, spec.m, layer, static_cast<std::int64_t>(start));
  const auto* states = chain.states.data();

  constexpr std::uint64_t kBlock = 4096;
  std::uint64_t zero = 0;
  for (std::uint64_t block = 0; block * kBlock < runs; ++block) {
    Rng rng = make_stream(seed, block);
    const auto end = std::min(runs, (block + 1) * kBlock);
    for (std::uint64_t r = block * kBlock; r < end; ++r) {
      std::uint32_t cur = first;
      for (;;) {
        const auto& st = states[cur];
        const std::uint64_t u = rng();
        unsigned i = 0;
        while (i + 1 < st.count && u >= st.threshold[i]) ++i;
        cur = st.next[i];
        if (cur == kAtZero) {
          ++zero;
          break;
        }
        if (cur == kAtTop) break;
      }
    }
  }
  SimulationEstimate est;
  est.runs = runs;
  est.absorbed_at_zero = zero;
  est.p_hat = static_cast<double>(zero) / static_cast<double>(runs);
  return est;
}

WalkFamily parse_family(const std::string& name) {
  if (name == "bdf3") return WalkFamily::Bdf3;
  if (name == "bdf4") return WalkFamily::Bdf4;
  if (name == "dbf2") return WalkFamily::Dbf2;
  if (name == "dbf3") return WalkFamily::Dbf3;
  if (name == "dbf4") return WalkFamily::Dbf4;
  if (name == "dbf5") return WalkFamily::Dbf5;
  throw ParameterError("unknown recurrence family \"" + name + "\"");
}

std::string family_name(WalkFamily family) {
  switch (family) {
    case WalkFamily::Bdf3: return "bdf3";
    case WalkFamily::Bdf4: return "bdf4";
    case WalkFamily::Dbf2: return "dbf2";
    case WalkFamily::Dbf3: return "dbf3";
    case WalkFamily::Dbf4: return "dbf4";
    case WalkFamily::Dbf5: return "dbf5";
  }
  return "?";
}

RegimeWalkSpec build_family(const FamilyParams& p) {
  switch (p.family) {
    case WalkFamily::Bdf3: return bdf3(p.alpha, p.s, p.options);
    case WalkFamily::Bdf4: return bdf4(p.d_y0, p.s, p.options);
    case WalkFamily::Dbf2: return dbf2(p.alpha, p.s, p.options);
    case WalkFamily::Dbf3: return dbf3_coupled(p.d_x1, p.s, p.options);
    case WalkFamily::Dbf4: return dbf4(p.d_y0, p.s, p.np, p.options, p.dbf4_psi);
    case WalkFamily::Dbf5: return dbf5(p.alpha, p.d_y0, p.s, p.options, p.dbf5_reading);
  }
  throw ParameterError("unknown recurrence family");
}

ConvergenceCheck check_m_convergence(const FamilyParams& params, double tolerance) {
  ConvergenceCheck c;
  c.tolerance = tolerance;
  c.p1_m = solve_recurrence(build_family(params)).p1();
  FamilyParams doubled = params;
  doubled.options.m = 2 * params.options.m;
  c.p1_2m = solve_recurrence(build_family(doubled)).p1();
  c.converged = std::abs(c.p1_m - c.p1_2m) < tolerance;
  return c;
}

}  // namespace moranlab

// Copyright 2026 The spinchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end experiment runner: solver selection, entanglement observables
// on every sample, crossing-event detection and asymptotic parameter sweeps.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "spinchain/entanglement.hpp"
#include "spinchain/evolution.hpp"
#include "spinchain/liouvillian.hpp"
#include "spinchain/spin_operators.hpp"

namespace spinchain {

enum class SolverKind { Spectral, Stepping, Unitary, Auto };

constexpr std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Spectral: return "spectral";
    case SolverKind::Stepping: return "stepping";
    case SolverKind::Unitary: return "unitary";
    case SolverKind::Auto: return "auto";
  }
  return "unknown";
}

inline SolverKind parse_solver(std::string_view s) {
  if (s == "spectral") return SolverKind::Spectral;
  if (s == "stepping" || s == "rk4" || s == "ode") return SolverKind::Stepping;
  if (s == "unitary") return SolverKind::Unitary;
  if (s == "auto") return SolverKind::Auto;
  throw Error(ErrorKind::InvalidArgument, "unknown solver '" + std::string(s) + "'");
}

/// Which observables end up in the written output. Pair concurrences are
/// always evaluated since tau2 is built from them.
struct ObservableFlags {
  bool concurrences = true;
  bool tau1 = true;
  bool tau2 = true;
  bool ratio = true;
  bool purity = true;
};

struct ExperimentSpec {
  ChainParams chain;
  EnvParams env;
  InitialKind initial = InitialKind::Separable;
  TimeGrid grid = TimeGrid::uniform(300.0, 3001);
  ObservableFlags observables;
  SolverKind solver = SolverKind::Auto;
  double step = kDefaultStep;
  int reference_site = 1;
  int spectral_max_sites = 5;
  StatePolicy storage = StatePolicy::Discard;

  void validate() const {
    chain.validate();
    env.validate();
    require(grid.size() >= 1 && grid[0] == 0.0, ErrorKind::InvalidArgument,
            "experiment grid must start at T = 0");
    require(reference_site >= 1 && reference_site <= chain.n_sites, ErrorKind::InvalidArgument,
            "reference site out of range");
    if (solver == SolverKind::Unitary)
      require(!env.dissipative(), ErrorKind::InvalidArgument,
              "the unitary solver only applies when Gamma = 0");
  }
};

/// Auto picks Unitary for Gamma = 0, the dense spectral path while it is
/// feasible, and RK4 stepping otherwise.
inline SolverKind resolve_solver(const ExperimentSpec& spec) {
  if (spec.solver != SolverKind::Auto) return spec.solver;
  if (!spec.env.dissipative()) return SolverKind::Unitary;
  if (spec.chain.n_sites <= spec.spectral_max_sites) return SolverKind::Spectral;
  return SolverKind::Stepping;
}

struct ExperimentResult {
  ExperimentSpec spec;
  SolverKind solver_used = SolverKind::Auto;
  std::string fallback_note;  // set when Auto had to abandon its first choice
  Trajectory trajectory;
  std::vector<EntanglementRecord> records;  // one per grid sample
  double wall_seconds = 0.0;

  std::vector<double> pair_series(int i, int j) const {
    std::vector<double> s;
    s.reserve(records.size());
    for (const auto& r : records) s.push_back(r.pair(i, j));
    return s;
  }
};

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto started = std::chrono::steady_clock::now();

  ExperimentResult result;
  result.spec = spec;
  const SpinOperator h = build_hamiltonian(spec.chain);
  const PureState psi0 = initial_state(spec.initial, spec.chain.n_sites);
  const DensityMatrix rho0 = to_density(psi0);

  EvolveOptions opts;
  opts.storage = spec.storage;
  opts.on_sample = [&result](std::size_t, double, const DensityMatrix& rho) {
    result.records.push_back(evaluate_entanglement(rho));
  };

  auto run = [&](SolverKind kind) {
    result.records.clear();
    result.records.reserve(spec.grid.size());
    result.solver_used = kind;
    switch (kind) {
      case SolverKind::Unitary:
        require(!spec.env.dissipative(), ErrorKind::InvalidArgument,
                "the unitary solver only applies when Gamma = 0");
        return unitary_evolve(h, psi0, spec.grid, opts);
      case SolverKind::Spectral: {
        const Liouvillian gen = assemble_liouvillian(h, build_lindblad_ops(spec.chain, spec.env));
        SpectralOptions sopts;
        sopts.max_sites = spec.spectral_max_sites;
        return spectral_evolve(gen, rho0, spec.grid, sopts, opts);
      }
      case SolverKind::Stepping:
      case SolverKind::Auto: {
        const Liouvillian gen = assemble_liouvillian(h, build_lindblad_ops(spec.chain, spec.env));
        result.solver_used = SolverKind::Stepping;
        return ode_evolve(gen, rho0, spec.grid, spec.step, opts);
      }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown solver");
  };

  const SolverKind first = resolve_solver(spec);
  if (spec.solver == SolverKind::Auto && first == SolverKind::Spectral) {
    try {
      result.trajectory = run(first);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditioned && e.kind() != ErrorKind::DimensionCap) throw;
      result.fallback_note = std::string("spectral path abandoned: ") + e.what();
      result.trajectory = run(SolverKind::Stepping);
    }
  } else {
    result.trajectory = run(first);
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

// ---------------------------------------------------------------------------
// Crossing events

inline constexpr double kDefaultEventThreshold = 1e-3;

struct SeriesEvents {
  std::optional<double> rise_time;   // first upward crossing, or T0 if it starts above
  std::optional<double> death_time;  // last downward crossing
  std::vector<double> deaths;        // every downward crossing
  std::vector<double> revival_times; // upward crossings after the first death
  double max_value = 0.0;
  double max_time = 0.0;
  double steady_value = 0.0;         // last sample
};

/// Threshold crossings of a sampled series, with crossing times found by
/// linear interpolation between the bracketing samples. A sample counts as
/// "above" when it is >= threshold.
inline SeriesEvents detect_events(const std::vector<double>& times,
                                  const std::vector<double>& series,
                                  double threshold = kDefaultEventThreshold) {
  require(times.size() == series.size(), ErrorKind::DimensionMismatch,
          "times and series lengths differ");
  SeriesEvents ev;
  if (series.empty()) return ev;

  auto crossing = [&](std::size_t i) {
    const double s0 = series[i - 1], s1 = series[i];
    const double frac = s1 == s0 ? 0.0 : (threshold - s0) / (s1 - s0);
    return times[i - 1] + frac * (times[i] - times[i - 1]);
  };

  ev.max_value = series[0];
  ev.max_time = times[0];
  if (series[0] >= threshold) ev.rise_time = times[0];
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i] > ev.max_value) {
      ev.max_value = series[i];
      ev.max_time = times[i];
    }
    const bool was_above = series[i - 1] >= threshold;
    const bool is_above = series[i] >= threshold;
    if (!was_above && is_above) {
      const double t = crossing(i);
      if (!ev.rise_time) ev.rise_time = t;
      if (!ev.deaths.empty()) ev.revival_times.push_back(t);
    } else if (was_above && !is_above) {
      ev.deaths.push_back(crossing(i));
    }
  }
  if (!ev.deaths.empty()) ev.death_time = ev.deaths.back();
  ev.steady_value = series.back();
  return ev;
}

struct PairEvents {
  int i = 0;
  int j = 0;
  SeriesEvents events;
};

struct EventReport {
  double threshold = kDefaultEventThreshold;
  std::vector<PairEvents> pairs;  // every i < j
  int reference_site = 1;
  // Whether rise times of (ref, ref+1), (ref, ref+2), ... are nondecreasing
  // among the pairs that rise at all.
  bool rise_order_monotone = true;

  const PairEvents* find(int i, int j) const {
    for (const auto& p : pairs)
      if (p.i == i && p.j == j) return &p;
    return nullptr;
  }
};

inline EventReport detect_events(const ExperimentResult& result,
                                 double threshold = kDefaultEventThreshold) {
  EventReport report;
  report.threshold = threshold;
  report.reference_site = result.spec.reference_site;
  const int n = result.spec.chain.n_sites;
  const auto& times = result.trajectory.grid.samples();
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      report.pairs.push_back({i, j, detect_events(times, result.pair_series(i, j), threshold)});

  const int ref = report.reference_site;
  double last = -std::numeric_limits<double>::infinity();
  for (int j = ref + 1; j <= n; ++j) {
    const PairEvents* p = report.find(ref, j);
    if (!p || !p->events.rise_time) continue;
    if (*p->events.rise_time < last) report.rise_order_monotone = false;
    last = *p->events.rise_time;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Observables addressed by name: "C_i_j" (or "Cij"), "tau1", "tau2", "R",
// "purity". tau1/tau2/R refer to the experiment's reference site.

struct Observable {
  enum class Kind { Concurrence, Tau1, Tau2, Ratio, Purity } kind = Kind::Concurrence;
  int i = 0;
  int j = 0;

  std::string name() const {
    switch (kind) {
      case Kind::Concurrence: return "C_" + std::to_string(i) + "_" + std::to_string(j);
      case Kind::Tau1: return "tau1";
      case Kind::Tau2: return "tau2";
      case Kind::Ratio: return "R";
      case Kind::Purity: return "purity";
    }
    return "?";
  }

  /// NaN when undefined (tau1 / R on mixed states).
  double value(const EntanglementRecord& rec, int reference_site) const {
    const auto ref = static_cast<std::size_t>(reference_site - 1);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    switch (kind) {
      case Kind::Concurrence: return rec.pair(i, j);
      case Kind::Tau1: return rec.tau1[ref].value_or(nan);
      case Kind::Tau2: return rec.tau2[ref];
      case Kind::Ratio: return rec.ratio[ref].value_or(nan);
      case Kind::Purity: return rec.purity;
    }
    return nan;
  }
};

inline Observable parse_observable(std::string_view text, int n_sites) {
  Observable o;
  if (text == "tau1") { o.kind = Observable::Kind::Tau1; return o; }
  if (text == "tau2") { o.kind = Observable::Kind::Tau2; return o; }
  if (text == "R" || text == "ratio") { o.kind = Observable::Kind::Ratio; return o; }
  if (text == "purity") { o.kind = Observable::Kind::Purity; return o; }

  const std::string bad = "unknown observable '" + std::string(text) + "'";
  require(text.size() >= 3 && (text[0] == 'C' || text[0] == 'c'), ErrorKind::InvalidArgument, bad);
  std::string_view rest = text.substr(1);
  int a = 0, b = 0;
  auto digits = [](std::string_view s) {
    return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
  };
  if (rest.front() == '_') {
    rest.remove_prefix(1);
    const auto sep = rest.find('_');
    require(sep != std::string_view::npos, ErrorKind::InvalidArgument, bad);
    const std::string_view sa = rest.substr(0, sep), sb = rest.substr(sep + 1);
    require(digits(sa) && digits(sb), ErrorKind::InvalidArgument, bad);
    a = std::stoi(std::string(sa));
    b = std::stoi(std::string(sb));
  } else {
    // Compact form "C12": single-digit site labels (N <= 8).
    require(rest.size() == 2 && digits(rest), ErrorKind::InvalidArgument, bad);
    a = rest[0] - '0';
    b = rest[1] - '0';
  }
  if (a > b) std::swap(a, b);
  require(a >= 1 && b <= n_sites && a != b, ErrorKind::InvalidArgument,
          bad + " for a chain of " + std::to_string(n_sites) + " sites");
  o.i = a;
  o.j = b;
  return o;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepParameter { Gamma, Delta, Nbar };
enum class Readout { AtTmax, SteadyStateNullSpace };

constexpr std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Gamma: return "gamma";
    case SweepParameter::Delta: return "delta";
    case SweepParameter::Nbar: return "nbar";
  }
  return "?";
}
constexpr std::string_view to_string(Readout r) {
  return r == Readout::AtTmax ? "tmax" : "steady";
}

inline SweepParameter parse_sweep_parameter(std::string_view s) {
  if (s == "gamma") return SweepParameter::Gamma;
  if (s == "delta") return SweepParameter::Delta;
  if (s == "nbar") return SweepParameter::Nbar;
  throw Error(ErrorKind::InvalidArgument, "unknown sweep axis '" + std::string(s) + "'");
}
inline Readout parse_readout(std::string_view s) {
  if (s == "tmax" || s == "time") return Readout::AtTmax;
  if (s == "steady" || s == "nullspace") return Readout::SteadyStateNullSpace;
  throw Error(ErrorKind::InvalidArgument, "unknown readout mode '" + std::string(s) + "'");
}

struct SweepAxis {
  SweepParameter parameter = SweepParameter::Gamma;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 41;

  double value(std::size_t k) const {
    if (k + 1 == count) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
};

/// Discrepancy between the T = readout_time value and the null-space value
/// above which a point is flagged as not converged.
inline constexpr double kConvergenceFlag = 1e-3;

struct SweepSpec {
  ExperimentSpec base;
  std::vector<SweepAxis> axes;
  Readout readout = Readout::AtTmax;
  double readout_time = 300.0;
  std::vector<std::string> observables = {"C_1_2", "C_1_3", "C_1_4", "C_1_5"};
  bool cross_check = true;
  unsigned threads = 1;  // 0 = hardware concurrency

  void validate() const {
    require(!axes.empty() && axes.size() <= 2, ErrorKind::InvalidArgument,
            "a sweep needs one or two axes");
    for (const auto& a : axes) {
      require(a.count >= 2, ErrorKind::InvalidArgument, "sweep axes need >= 2 points");
      require(a.lo <= a.hi, ErrorKind::InvalidArgument, "sweep axis range is reversed");
      if (a.parameter != SweepParameter::Nbar)
        require(a.lo >= 0.0 && a.hi <= 1.0, ErrorKind::InvalidArgument,
                std::string(to_string(a.parameter)) + " axis must stay within [0, 1]");
      else
        require(a.lo >= 0.0, ErrorKind::InvalidArgument, "nbar axis must be >= 0");
    }
    if (axes.size() == 2)
      require(axes[0].parameter != axes[1].parameter, ErrorKind::InvalidArgument,
              "sweep axes must differ");
    require(readout_time > 0.0, ErrorKind::InvalidArgument, "readout_time must be > 0");
    require(!observables.empty(), ErrorKind::InvalidArgument, "no sweep observables");
    base.chain.validate();
    base.env.validate();
  }

  std::size_t point_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.count;
    return n;
  }

  /// Row-major over the axes: the last axis varies fastest.
  std::vector<double> coordinates(std::size_t flat) const {
    std::vector<double> c(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      c[a] = axes[a].value(flat % axes[a].count);
      flat /= axes[a].count;
    }
    return c;
  }

  ExperimentSpec point_spec(const std::vector<double>& coords) const {
    ExperimentSpec s = base;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      switch (axes[a].parameter) {
        case SweepParameter::Gamma: s.chain.gamma = coords[a]; break;
        case SweepParameter::Delta: s.chain.delta = coords[a]; break;
        case SweepParameter::Nbar: s.env.nbar = coords[a]; break;
      }
    }
    s.grid = TimeGrid::from_samples({0.0, readout_time});
    return s;
  }
};

struct SweepPoint {
  std::vector<double> coordinates;
  std::vector<double> values;         // per observable; NaN on failure
  std::vector<double> steady_values;  // null-space cross-check, NaN if absent
  int null_dimension = -1;            // -1 when not computed
  bool converged = true;
  std::string error;                  // empty on success
};

struct SweepResult {
  SweepSpec spec;
  std::vector<std::string> observable_names;
  std::vector<SweepPoint> points;  // in grid order
  unsigned threads_used = 1;
};

namespace detail {

inline SweepPoint run_sweep_point(const SweepSpec& spec, const std::vector<Observable>& obs,
                                  std::size_t flat) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepPoint pt;
  pt.coordinates = spec.coordinates(flat);
  pt.values.assign(obs.size(), nan);
  pt.steady_values.assign(obs.size(), nan);
  const ExperimentSpec es = spec.point_spec(pt.coordinates);

  auto evaluate = [&](const EntanglementRecord& rec, std::vector<double>& out) {
    for (std::size_t k = 0; k < obs.size(); ++k) out[k] = obs[k].value(rec, es.reference_site);
  };

  try {
    const bool want_steady =
        es.env.dissipative() && (spec.readout == Readout::SteadyStateNullSpace || spec.cross_check);
    if (want_steady) {
      const Liouvillian gen =
          assemble_liouvillian(build_hamiltonian(es.chain), build_lindblad_ops(es.chain, es.env));
      NullSpaceReport ns = analyze_null_space(gen);
      pt.null_dimension = ns.null_dimension;
      if (ns.null_dimension == 1)
        evaluate(evaluate_entanglement(ns.null_states.front()), pt.steady_values);
      else if (spec.readout == Readout::SteadyStateNullSpace)
        throw Error(ns.null_dimension == 0 ? ErrorKind::NoNullVector : ErrorKind::NonUnique,
                    "null-space dimension " + std::to_string(ns.null_dimension));
    } else if (spec.readout == Readout::SteadyStateNullSpace) {
      throw Error(ErrorKind::InvalidArgument, "null-space readout requires Gamma > 0");
    }

    if (spec.readout == Readout::SteadyStateNullSpace) {
      pt.values = pt.steady_values;
    } else {
      const ExperimentResult r = run_experiment(es);
      evaluate(r.records.back(), pt.values);
      for (std::size_t k = 0; k < obs.size(); ++k)
        if (!std::isnan(pt.steady_values[k]) &&
            std::abs(pt.values[k] - pt.steady_values[k]) > kConvergenceFlag)
          pt.converged = false;
    }
  } catch (const Error& e) {
    pt.error = std::string(to_string(e.kind())) + ": " + e.what();
    pt.converged = false;
  } catch (const std::exception& e) {
    pt.error = std::string("runtime: ") + e.what();
    pt.converged = false;
  }
  return pt;
}

}  // namespace detail

/// Evaluate every grid point independently. Failures are recorded on the
/// point and the sweep carries on; row order never depends on scheduling.
inline SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<Observable> obs;
  SweepResult result;
  result.spec = spec;
  for (const auto& name : spec.observables) {
    obs.push_back(parse_observable(name, spec.base.chain.n_sites));
    result.observable_names.push_back(obs.back().name());
  }

  const std::size_t total = spec.point_count();
  result.points.resize(total);
  unsigned workers = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : spec.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  result.threads_used = workers;

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < total; k = next++)
      result.points[k] = detail::run_sweep_point(spec, obs, k);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Named recipes mirroring the studied configurations

struct Recipe {
  std::string name;
  std::string description;
  ExperimentSpec spec;
};

inline std::vector<Recipe> recipe_catalog() {
  struct Row {
    const char* name;
    const char* description;
    int n;
    Boundary boundary;
    double gamma, delta, env_gamma, nbar;
    InitialKind initial;
  };
  const double g = 0.05;
  const Row rows[] = {
      {"closed-ising-n7-separable-free", "free closed Ising chain from the all-up state", 7,
       Boundary::Closed, 1.0, 0.0, 0.0, 0.0, InitialKind::Separable},
      {"closed-ising-n7-bellpair-free", "free closed Ising chain from a Bell pair on sites 1,2",
       7, Boundary::Closed, 1.0, 0.0, 0.0, 0.0, InitialKind::BellPair},
      {"closed-xx-n5-separable-free", "free closed XX chain from the all-up state", 5,
       Boundary::Closed, 0.0, 0.0, 0.0, 0.0, InitialKind::Separable},
      {"closed-xx-n5-bellpair-free", "free closed XX chain from a Bell pair", 5,
       Boundary::Closed, 0.0, 0.0, 0.0, 0.0, InitialKind::BellPair},
      {"closed-xyz-n5-separable-free", "free closed XYZ chain (0.5, 0.5) from the all-up state",
       5, Boundary::Closed, 0.5, 0.5, 0.0, 0.0, InitialKind::Separable},
      {"closed-ising-n7-separable-env", "dissipative closed Ising chain from the all-up state",
       7, Boundary::Closed, 1.0, 0.0, g, 0.0, InitialKind::Separable},
      {"closed-ising-n7-w-env", "dissipative closed Ising chain from the W state", 7,
       Boundary::Closed, 1.0, 0.0, g, 0.0, InitialKind::WState},
      {"closed-ising-n7-separable-hot", "closed Ising chain at nbar = 0.1 from the all-up state",
       7, Boundary::Closed, 1.0, 0.0, g, 0.1, InitialKind::Separable},
      {"closed-xx-n5-bellpair-env", "dissipative closed XX chain from a Bell pair", 5,
       Boundary::Closed, 0.0, 0.0, g, 0.0, InitialKind::BellPair},
      {"open-ising-n7-bellpair-free", "free open Ising chain, end-pair entanglement transfer", 7,
       Boundary::Open, 1.0, 0.0, 0.0, 0.0, InitialKind::BellPair},
      {"open-xx-n7-bellpair-free", "free open XX chain, end-pair entanglement transfer", 7,
       Boundary::Open, 0.0, 0.0, 0.0, 0.0, InitialKind::BellPair},
      {"open-ising-n7-bellpair-env", "dissipative open Ising chain, end-pair transfer", 7,
       Boundary::Open, 1.0, 0.0, g, 0.0, InitialKind::BellPair},
      {"open-xyz-n5-bellpair-env", "dissipative open XYZ chain (0.5, 0.5), end-pair transfer", 5,
       Boundary::Open, 0.5, 0.5, g, 0.01, InitialKind::BellPair},
  };
  std::vector<Recipe> out;
  for (const auto& r : rows) {
    ExperimentSpec s;
    s.chain.n_sites = r.n;
    s.chain.boundary = r.boundary;
    s.chain.gamma = r.gamma;
    s.chain.delta = r.delta;
    s.chain.coupling = 0.05;
    s.chain.b_field = 1.0;
    s.env.coupling_strength = r.env_gamma;
    s.env.nbar = r.nbar;
    s.initial = r.initial;
    out.push_back({r.name, r.description, s});
  }
  return out;
}

inline std::optional<Recipe> find_recipe(std::string_view name) {
  for (auto& r : recipe_catalog())
    if (r.name == name) return r;
  return std::nullopt;
}

}  // namespace spinchain

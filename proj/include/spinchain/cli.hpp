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

// Command-line front end. Every flag may also come from a key = value file
// passed with --config (keys are the long flag names without dashes, e.g.
// `env-gamma = 0.05`); flags given on the command line win over the file.
//
// Exit codes: 0 success, 1 runtime failure (a JSON error record goes to
// stderr), 2 usage error.

#pragma once

#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinchain/experiments.hpp"
#include "spinchain/io.hpp"

namespace spinchain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Raised while turning parsed flags into a spec; carries the flag name.
struct UsageError : std::runtime_error {
  UsageError(const std::string& flag, const std::string& what)
      : std::runtime_error(flag + ": " + what) {}
};

inline SweepAxis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 4) throw UsageError("--axis", "expected name:lo:hi:count, got '" + text + "'");
  SweepAxis a;
  try {
    a.parameter = parse_sweep_parameter(parts[0]);
    std::size_t used = 0;
    a.lo = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    a.hi = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
    const long n = std::stol(parts[3], &used);
    if (used != parts[3].size() || n < 2) throw std::invalid_argument(parts[3]);
    a.count = static_cast<std::size_t>(n);
  } catch (const Error& e) {
    throw UsageError("--axis", e.what());
  } catch (const std::exception&) {
    throw UsageError("--axis", "malformed axis '" + text + "'");
  }
  return a;
}

namespace detail {

struct Flags {
  int sites = 5;
  double gamma = 1.0;
  double delta = 0.0;
  double coupling = 0.05;
  double field = 1.0;
  double env_gamma = 0.05;
  double nbar = 0.0;
  std::string rate_convention = "literal";
  std::string boundary = "closed";
  std::string initial = "separable";
  double tmax = 300.0;
  int samples = 3001;
  std::string solver = "auto";
  double step = kDefaultStep;
  double threshold = kDefaultEventThreshold;
  int reference_site = 1;
  std::string out;
  std::string format = "csv";
  std::string recipe;
  std::vector<std::string> axes;
  std::vector<std::string> readouts;
  std::string readout_mode = "tmax";
  unsigned threads = 0;
  bool no_cross_check = false;
};

struct Handles {
  CLI::Option* sites = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* delta = nullptr;
  CLI::Option* coupling = nullptr;
  CLI::Option* field = nullptr;
  CLI::Option* env_gamma = nullptr;
  CLI::Option* nbar = nullptr;
  CLI::Option* rate_convention = nullptr;
  CLI::Option* boundary = nullptr;
  CLI::Option* initial = nullptr;
  CLI::Option* tmax = nullptr;
  CLI::Option* samples = nullptr;
  CLI::Option* solver = nullptr;
  CLI::Option* step = nullptr;
  CLI::Option* reference_site = nullptr;
};

inline bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

inline ExperimentSpec build_spec(const Flags& f, const Handles& h) {
  ExperimentSpec spec;
  const bool from_recipe = !f.recipe.empty();
  if (from_recipe) {
    auto r = find_recipe(f.recipe);
    if (!r) throw UsageError("--recipe", "unknown recipe '" + f.recipe + "'");
    spec = r->spec;
  }
  auto take = [&](const CLI::Option* o) { return !from_recipe || given(o); };

  if (take(h.sites)) spec.chain.n_sites = f.sites;
  if (take(h.gamma)) spec.chain.gamma = f.gamma;
  if (take(h.delta)) spec.chain.delta = f.delta;
  if (take(h.coupling)) spec.chain.coupling = f.coupling;
  if (take(h.field)) spec.chain.b_field = f.field;
  if (take(h.boundary)) spec.chain.boundary = parse_boundary(f.boundary);
  if (take(h.env_gamma)) spec.env.coupling_strength = f.env_gamma;
  if (take(h.nbar)) spec.env.nbar = f.nbar;
  if (take(h.rate_convention)) spec.env.rate_convention = parse_rate_convention(f.rate_convention);
  if (take(h.initial)) spec.initial = parse_initial_kind(f.initial);
  if (take(h.tmax) || take(h.samples)) spec.grid = TimeGrid::uniform(f.tmax, static_cast<std::size_t>(f.samples));
  if (take(h.solver)) spec.solver = parse_solver(f.solver);
  if (take(h.step)) spec.step = f.step;
  if (take(h.reference_site)) spec.reference_site = f.reference_site;

  if (spec.reference_site > spec.chain.n_sites)
    throw UsageError("--reference-site", "exceeds --sites");
  if (spec.solver == SolverKind::Unitary && spec.env.dissipative())
    throw UsageError("--solver", "unitary requires --env-gamma 0");
  if (spec.step <= 0.0 || spec.step > kMaxStep)
    throw UsageError("--step", "must lie in (0, " + io::format_number(kMaxStep) + "]");
  spec.validate();
  return spec;
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty())
    out << text;
  else
    io::write_atomic(out_path, text);
}

}  // namespace detail

/// Entry point shared by the spinchain executable and the tests.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Open XYZ spin-chain dynamics and entanglement"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a key = value file");

  detail::Flags f;
  detail::Handles h;

  h.sites = app.add_option("--sites", f.sites, "Number of spins N")->check(CLI::Range(2, kMaxSites));
  h.gamma = app.add_option("--gamma", f.gamma, "xy anisotropy (1 = Ising, 0 = XX)")->check(CLI::Range(0.0, 1.0));
  h.delta = app.add_option("--delta", f.delta, "z anisotropy")->check(CLI::Range(0.0, 1.0));
  h.coupling = app.add_option("--coupling", f.coupling, "Exchange coupling J")->check(CLI::NonNegativeNumber);
  h.field = app.add_option("--field", f.field, "Longitudinal field B")->check(CLI::PositiveNumber);
  h.env_gamma = app.add_option("--env-gamma", f.env_gamma, "Environment coupling Gamma")->check(CLI::NonNegativeNumber);
  h.nbar = app.add_option("--nbar", f.nbar, "Thermal occupation nbar")->check(CLI::NonNegativeNumber);
  h.rate_convention = app.add_option("--rate-convention", f.rate_convention, "Lindblad prefactor: literal (Gamma) or sqrt (sqrt(Gamma))")
                          ->check(CLI::IsMember({"literal", "sqrt"}));
  h.boundary = app.add_option("--boundary", f.boundary, "Chain boundary")->check(CLI::IsMember({"open", "closed"}));
  h.initial = app.add_option("--initial", f.initial, "Initial state")->check(CLI::IsMember({"separable", "w", "bellpair"}));
  h.tmax = app.add_option("--tmax", f.tmax, "Final time (sweeps: readout time)")->check(CLI::PositiveNumber);
  h.samples = app.add_option("--samples", f.samples, "Uniform time samples including T = 0")->check(CLI::Range(2, 10000000));
  h.solver = app.add_option("--solver", f.solver, "Solver")->check(CLI::IsMember({"auto", "spectral", "stepping", "unitary"}));
  h.step = app.add_option("--step", f.step, "RK4 step size");
  h.reference_site = app.add_option("--reference-site", f.reference_site, "Site used for tau1, tau2 and R")->check(CLI::Range(1, kMaxSites));
  app.add_option("--threshold", f.threshold, "Event threshold on concurrence")->check(CLI::PositiveNumber);
  app.add_option("--out", f.out, "Output path (stdout when omitted)");
  app.add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--recipe", f.recipe, "Start from a named recipe; explicit flags override it");
  app.add_option("--axis", f.axes, "Sweep axis name:lo:hi:count (name in gamma, delta, nbar); repeat for 2-D");
  app.add_option("--readout", f.readouts, "Sweep observables, e.g. C12 or C_1_3, tau2, purity");
  app.add_option("--readout-mode", f.readout_mode, "Sweep readout: tmax or steady")->check(CLI::IsMember({"tmax", "steady"}));
  app.add_option("--threads", f.threads, "Sweep worker threads (0 = all cores)");
  app.add_flag("--no-cross-check", f.no_cross_check, "Skip the null-space cross-check in tmax sweeps");

  auto* evolve = app.add_subcommand("evolve", "Time series of concurrences, tangles and purity");
  auto* sweep = app.add_subcommand("sweep", "Asymptotic observables over a parameter grid");
  auto* steady = app.add_subcommand("steady", "Null-space steady state of the generator");
  auto* events = app.add_subcommand("events", "Rise, death and revival times of every pair");
  auto* recipes = app.add_subcommand("recipes", "List the named recipes");
  for (auto* s : {evolve, sweep, steady, events, recipes}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*recipes) {
      for (const auto& r : recipe_catalog()) out << r.name << "  " << r.description << '\n';
      return kExitOk;
    }

    ExperimentSpec spec = detail::build_spec(f, h);
    const io::Format fmt = io::parse_format(f.format);

    if (*evolve) {
      const ExperimentResult r = run_experiment(spec);
      if (f.out.empty())
        out << (fmt == io::Format::Json ? io::dump(io::experiment_json(r, f.recipe)) : io::experiment_csv(r));
      else
        io::write_experiment(r, f.out, fmt, f.recipe);
      return kExitOk;
    }

    if (*events) {
      const ExperimentResult r = run_experiment(spec);
      const EventReport ev = detect_events(r, f.threshold);
      if (f.out.empty())
        out << (fmt == io::Format::Json ? io::dump(io::events_json(ev, r)) : io::events_csv(ev));
      else
        io::write_events(ev, r, f.out, fmt);
      return kExitOk;
    }

    if (*steady) {
      if (!spec.env.dissipative()) throw UsageError("--env-gamma", "steady needs Gamma > 0");
      const Liouvillian gen = assemble_liouvillian(build_hamiltonian(spec.chain),
                                                   build_lindblad_ops(spec.chain, spec.env));
      io::SteadyReport rep{spec.chain, spec.env, analyze_null_space(gen), {}, std::nullopt};
      if (rep.null_space.null_dimension == 1) {
        rep.state = rep.null_space.null_states.front();
        rep.record = evaluate_entanglement(rep.state);
      }
      const std::string text = fmt == io::Format::Json ? io::dump(io::steady_json(rep)) : io::steady_csv(rep);
      detail::emit(text, f.out, out);
      if (rep.null_space.null_dimension == 1) return kExitOk;
      const auto kind = rep.null_space.null_dimension == 0 ? ErrorKind::NoNullVector : ErrorKind::NonUnique;
      err << io::error_record(to_string(kind), "null-space dimension " +
                                                   std::to_string(rep.null_space.null_dimension)).dump()
          << '\n';
      return kExitRuntime;
    }

    if (*sweep) {
      SweepSpec ss;
      ss.base = spec;
      if (f.axes.empty()) throw UsageError("--axis", "sweep needs at least one axis");
      for (const auto& a : f.axes) ss.axes.push_back(parse_axis(a));
      ss.readout = parse_readout(f.readout_mode);
      ss.readout_time = spec.grid.t_max();
      ss.cross_check = !f.no_cross_check;
      ss.threads = f.threads;
      if (!f.readouts.empty()) {
        ss.observables = f.readouts;
        for (const auto& o : ss.observables) {
          try {
            parse_observable(o, spec.chain.n_sites);
          } catch (const Error& e) {
            throw UsageError("--readout", e.what());
          }
        }
      } else {
        ss.observables.clear();
        for (int j = 2; j <= std::min(5, spec.chain.n_sites); ++j)
          ss.observables.push_back("C_1_" + std::to_string(j));
      }
      try {
        ss.validate();
      } catch (const Error& e) {
        throw UsageError("--axis", e.what());
      }
      const SweepResult res = run_sweep(ss);
      if (f.out.empty())
        out << (fmt == io::Format::Json ? io::dump(io::sweep_json(res)) : io::sweep_csv(res));
      else
        io::write_sweep(res, f.out, fmt);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) {
      err << "usage error: " << e.what() << '\n';
      return kExitUsage;
    }
    err << io::error_record(to_string(e.kind()), e.what()).dump() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << io::error_record("runtime", e.what()).dump() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace spinchain::cli

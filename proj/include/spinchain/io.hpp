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

// CSV / JSON persistence. Files are written to a temporary sibling and then
// renamed over the destination, so readers never observe a partial file.
// Nothing time- or host-dependent is serialized: identical inputs produce
// byte-identical files.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinchain/experiments.hpp"

namespace spinchain::io {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

enum class Format { Csv, Json };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw Error(ErrorKind::InvalidArgument, "unknown format '" + std::string(s) + "'");
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

/// Shortest round-trippable text for a double; NaN becomes "null".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline json number_or_null(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

// ---------------------------------------------------------------------------
// Metadata

inline json chain_json(const ChainParams& c) {
  return {{"n_sites", c.n_sites},   {"gamma", c.gamma},     {"delta", c.delta},
          {"coupling", c.coupling}, {"b_field", c.b_field}, {"boundary", to_string(c.boundary)}};
}

inline json env_json(const EnvParams& e) {
  return {{"coupling_strength", e.coupling_strength},
          {"nbar", e.nbar},
          {"rate_convention", to_string(e.rate_convention)}};
}

inline json experiment_metadata(const ExperimentResult& r, const std::string& recipe = {}) {
  const auto& s = r.spec;
  json meta = {
      {"schema_version", kSchemaVersion},
      {"chain", chain_json(s.chain)},
      {"env", env_json(s.env)},
      {"convention", to_string(s.env.rate_convention)},
      {"initial", to_string(s.initial)},
      {"grid",
       {{"t_max", s.grid.t_max()}, {"n_samples", s.grid.size()}, {"uniform", s.grid.is_uniform()}}},
      {"solver", to_string(r.solver_used)},
      {"solver_requested", to_string(s.solver)},
      {"step", r.trajectory.info.step},
      {"threads", r.trajectory.info.threads},
      {"reference_site", s.reference_site},
  };
  if (r.trajectory.info.condition_estimate > 0.0)
    meta["condition_estimate"] = r.trajectory.info.condition_estimate;
  if (!r.fallback_note.empty()) meta["fallback"] = r.fallback_note;
  if (!recipe.empty()) meta["recipe"] = recipe;
  const StateDiagnostics w = r.trajectory.worst();
  meta["worst_diagnostics"] = {{"trace_error", w.trace_error},
                               {"hermiticity_error", w.hermiticity_error},
                               {"min_eigenvalue", w.min_eigenvalue}};
  return meta;
}

// ---------------------------------------------------------------------------
// Experiment time series

struct Column {
  std::string name;
  std::vector<double> values;  // NaN = undefined
};

inline std::vector<Column> experiment_columns(const ExperimentResult& r) {
  const auto& s = r.spec;
  const int n = s.chain.n_sites;
  const auto ref = static_cast<std::size_t>(s.reference_site - 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Column> cols;
  cols.push_back({"T", r.trajectory.grid.samples()});
  if (s.observables.concurrences)
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        cols.push_back({"C_" + std::to_string(i) + "_" + std::to_string(j), r.pair_series(i, j)});

  auto per_record = [&](auto&& f) {
    std::vector<double> v;
    v.reserve(r.records.size());
    for (const auto& rec : r.records) v.push_back(f(rec));
    return v;
  };
  if (s.observables.tau1)
    cols.push_back({"tau1", per_record([&](const auto& rec) { return rec.tau1[ref].value_or(nan); })});
  if (s.observables.tau2)
    cols.push_back({"tau2", per_record([&](const auto& rec) { return rec.tau2[ref]; })});
  if (s.observables.ratio)
    cols.push_back({"R", per_record([&](const auto& rec) { return rec.ratio[ref].value_or(nan); })});
  if (s.observables.purity)
    cols.push_back({"purity", per_record([](const auto& rec) { return rec.purity; })});

  std::vector<double> tr;
  tr.reserve(r.trajectory.diagnostics.size());
  for (const auto& d : r.trajectory.diagnostics) tr.push_back(d.trace_error);
  cols.push_back({"trace_err", std::move(tr)});
  return cols;
}

inline std::string experiment_csv(const ExperimentResult& r) {
  const auto cols = experiment_columns(r);
  std::ostringstream out;
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c].name;
  out << '\n';
  const std::size_t rows = cols.front().values.size();
  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t c = 0; c < cols.size(); ++c)
      out << (c ? "," : "") << format_number(cols[c].values[k]);
    out << '\n';
  }
  return out.str();
}

inline json experiment_json(const ExperimentResult& r, const std::string& recipe = {}) {
  const auto cols = experiment_columns(r);
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["metadata"] = experiment_metadata(r, recipe);
  json names = json::array();
  json data = json::object();
  for (const auto& c : cols) {
    names.push_back(c.name);
    json arr = json::array();
    for (double v : c.values) arr.push_back(number_or_null(v));
    data[c.name] = std::move(arr);
  }
  doc["columns"] = std::move(names);
  doc["data"] = std::move(data);

  json herm = json::array(), mine = json::array();
  for (const auto& d : r.trajectory.diagnostics) {
    herm.push_back(d.hermiticity_error);
    mine.push_back(d.min_eigenvalue);
  }
  doc["diagnostics"] = {{"hermiticity_error", std::move(herm)}, {"min_eigenvalue", std::move(mine)}};
  return doc;
}

inline std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

/// Writes `path` and, for CSV, a `path.meta.json` sidecar with the metadata.
inline void write_experiment(const ExperimentResult& r, const std::filesystem::path& path,
                             Format fmt, const std::string& recipe = {}) {
  if (fmt == Format::Json) {
    write_atomic(path, dump(experiment_json(r, recipe)));
    return;
  }
  write_atomic(path, experiment_csv(r));
  std::filesystem::path meta = path;
  meta += ".meta.json";
  write_atomic(meta, dump(experiment_metadata(r, recipe)));
}

// ---------------------------------------------------------------------------
// Sweeps, long format: one row per (grid point, observable)

inline json sweep_metadata(const SweepResult& s) {
  json axes = json::array();
  for (const auto& a : s.spec.axes)
    axes.push_back({{"name", to_string(a.parameter)}, {"lo", a.lo}, {"hi", a.hi}, {"count", a.count}});
  return {{"schema_version", kSchemaVersion},
          {"chain", chain_json(s.spec.base.chain)},
          {"env", env_json(s.spec.base.env)},
          {"convention", to_string(s.spec.base.env.rate_convention)},
          {"initial", to_string(s.spec.base.initial)},
          {"axes", axes},
          {"readout", to_string(s.spec.readout)},
          {"readout_time", s.spec.readout_time},
          {"observables", s.observable_names},
          {"solver", to_string(s.spec.base.solver)},
          {"step", s.spec.base.step},
          {"threads", s.threads_used},
          {"convergence_flag", kConvergenceFlag}};
}

inline std::string sweep_csv(const SweepResult& s) {
  std::ostringstream out;
  for (const auto& a : s.spec.axes) out << to_string(a.parameter) << ',';
  out << "observable,value,readout_time,convention,readout,steady_value,null_dim,converged,error\n";
  const std::string convention(to_string(s.spec.base.env.rate_convention));
  const std::string readout(to_string(s.spec.readout));
  const std::string readout_time = format_number(s.spec.readout_time);
  for (const auto& p : s.points) {
    std::string prefix;
    for (double c : p.coordinates) prefix += format_number(c) + ",";
    for (std::size_t k = 0; k < s.observable_names.size(); ++k) {
      std::string err = p.error;
      for (char& ch : err)
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      out << prefix << s.observable_names[k] << ',' << format_number(p.values[k]) << ','
          << readout_time << ',' << convention << ',' << readout << ','
          << format_number(p.steady_values[k]) << ',' << p.null_dimension << ','
          << (p.converged ? "true" : "false") << ',' << err << '\n';
    }
  }
  return out.str();
}

inline json sweep_json(const SweepResult& s) {
  json rows = json::array();
  for (const auto& p : s.points)
    for (std::size_t k = 0; k < s.observable_names.size(); ++k) {
      json row;
      for (std::size_t a = 0; a < s.spec.axes.size(); ++a)
        row[std::string(to_string(s.spec.axes[a].parameter))] = p.coordinates[a];
      row["observable"] = s.observable_names[k];
      row["value"] = number_or_null(p.values[k]);
      row["readout_time"] = s.spec.readout_time;
      row["convention"] = to_string(s.spec.base.env.rate_convention);
      row["readout"] = to_string(s.spec.readout);
      row["steady_value"] = number_or_null(p.steady_values[k]);
      row["null_dim"] = p.null_dimension;
      row["converged"] = p.converged;
      row["error"] = p.error.empty() ? json(nullptr) : json(p.error);
      rows.push_back(std::move(row));
    }
  return {{"schema_version", kSchemaVersion}, {"metadata", sweep_metadata(s)}, {"rows", rows}};
}

inline void write_sweep(const SweepResult& s, const std::filesystem::path& path, Format fmt) {
  if (fmt == Format::Json) {
    write_atomic(path, dump(sweep_json(s)));
    return;
  }
  write_atomic(path, sweep_csv(s));
  std::filesystem::path meta = path;
  meta += ".meta.json";
  write_atomic(meta, dump(sweep_metadata(s)));
}

// ---------------------------------------------------------------------------
// Events

inline std::string join_times(const std::vector<double>& ts) {
  std::string s;
  for (std::size_t k = 0; k < ts.size(); ++k) s += (k ? ";" : "") + format_number(ts[k]);
  return s;
}

inline std::string events_csv(const EventReport& ev) {
  std::ostringstream out;
  out << "i,j,rise_time,death_time,deaths,revival_times,max_value,max_time,steady_value\n";
  for (const auto& p : ev.pairs) {
    const auto& e = p.events;
    out << p.i << ',' << p.j << ',' << format_number(e.rise_time.value_or(NAN)) << ','
        << format_number(e.death_time.value_or(NAN)) << ',' << join_times(e.deaths) << ','
        << join_times(e.revival_times) << ',' << format_number(e.max_value) << ','
        << format_number(e.max_time) << ',' << format_number(e.steady_value) << '\n';
  }
  return out.str();
}

inline json events_json(const EventReport& ev, const ExperimentResult& r) {
  json pairs = json::array();
  for (const auto& p : ev.pairs) {
    const auto& e = p.events;
    pairs.push_back({{"i", p.i},
                     {"j", p.j},
                     {"rise_time", number_or_null(e.rise_time)},
                     {"death_time", number_or_null(e.death_time)},
                     {"deaths", e.deaths},
                     {"revival_times", e.revival_times},
                     {"max_value", e.max_value},
                     {"max_time", e.max_time},
                     {"steady_value", e.steady_value}});
  }
  return {{"schema_version", kSchemaVersion},
          {"metadata", experiment_metadata(r)},
          {"threshold", ev.threshold},
          {"reference_site", ev.reference_site},
          {"rise_order_monotone", ev.rise_order_monotone},
          {"pairs", pairs}};
}

inline void write_events(const EventReport& ev, const ExperimentResult& r,
                         const std::filesystem::path& path, Format fmt) {
  if (fmt == Format::Json) {
    write_atomic(path, dump(events_json(ev, r)));
    return;
  }
  write_atomic(path, events_csv(ev));
  json meta = experiment_metadata(r);
  meta["threshold"] = ev.threshold;
  meta["rise_order_monotone"] = ev.rise_order_monotone;
  std::filesystem::path mp = path;
  mp += ".meta.json";
  write_atomic(mp, dump(meta));
}

// ---------------------------------------------------------------------------
// Steady state

struct SteadyReport {
  ChainParams chain;
  EnvParams env;
  NullSpaceReport null_space;
  DensityMatrix state;  // empty unless the null space is one-dimensional
  std::optional<EntanglementRecord> record;
};

inline json steady_json(const SteadyReport& s) {
  json eig = json::array();
  for (const auto& l : s.null_space.eigenvalues) eig.push_back({l.real(), l.imag()});
  json doc = {{"schema_version", kSchemaVersion},
              {"chain", chain_json(s.chain)},
              {"env", env_json(s.env)},
              {"convention", to_string(s.env.rate_convention)},
              {"null_dimension", s.null_space.null_dimension},
              {"residual", s.null_space.residual},
              {"smallest_eigenvalues", eig}};
  if (s.state.size() == 0) return doc;

  const Eigen::Index q = s.state.rows();
  json pop = json::array(), re = json::array(), im = json::array();
  for (Eigen::Index a = 0; a < q; ++a) {
    pop.push_back(s.state(a, a).real());
    json rr = json::array(), ii = json::array();
    for (Eigen::Index b = 0; b < q; ++b) {
      rr.push_back(s.state(a, b).real());
      ii.push_back(s.state(a, b).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  doc["populations"] = std::move(pop);
  doc["rho_real"] = std::move(re);
  doc["rho_imag"] = std::move(im);
  if (s.record) {
    const int n = s.chain.n_sites;
    json obs = json::object();
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        obs["C_" + std::to_string(i) + "_" + std::to_string(j)] = s.record->pair(i, j);
    obs["tau2"] = s.record->tau2[0];
    obs["purity"] = s.record->purity;
    doc["observables"] = std::move(obs);
  }
  return doc;
}

/// Two-column table: quantity,value; populations appear as p_<basis index>.
inline std::string steady_csv(const SteadyReport& s) {
  std::ostringstream out;
  out << "quantity,value\n";
  out << "null_dimension," << s.null_space.null_dimension << '\n';
  out << "residual," << format_number(s.null_space.residual) << '\n';
  if (s.record) {
    const int n = s.chain.n_sites;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        out << "C_" << i << '_' << j << ',' << format_number(s.record->pair(i, j)) << '\n';
    out << "tau2," << format_number(s.record->tau2[0]) << '\n';
    out << "purity," << format_number(s.record->purity) << '\n';
  }
  for (Eigen::Index a = 0; a < s.state.rows(); ++a)
    out << "p_" << a << ',' << format_number(s.state(a, a).real()) << '\n';
  return out.str();
}

inline void write_steady(const SteadyReport& s, const std::filesystem::path& path, Format fmt) {
  write_atomic(path, fmt == Format::Json ? dump(steady_json(s)) : steady_csv(s));
}

// ---------------------------------------------------------------------------

inline json error_record(std::string_view kind, std::string_view message) {
  return {{"schema_version", kSchemaVersion},
          {"status", "error"},
          {"kind", kind},
          {"message", message}};
}

}  // namespace spinchain::io

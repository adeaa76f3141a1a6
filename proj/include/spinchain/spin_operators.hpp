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

// Hilbert-space building blocks for the XYZ chain.
//
// Basis convention, fixed for the whole library: site 1 is the most
// significant bit of the basis index, |up> is bit value 0 and |down> is bit
// value 1. Index 0 is therefore |up up ... up> and index Q-1 is
// |down down ... down>.

#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "spinchain/core.hpp"

namespace spinchain {

enum class Boundary { Closed, Open };
enum class RateConvention { Literal, SqrtRate };
enum class InitialKind { Separable, WState, BellPair };

constexpr std::string_view to_string(Boundary b) {
  return b == Boundary::Closed ? "closed" : "open";
}
constexpr std::string_view to_string(RateConvention c) {
  return c == RateConvention::Literal ? "literal" : "sqrt";
}
constexpr std::string_view to_string(InitialKind k) {
  switch (k) {
    case InitialKind::Separable: return "separable";
    case InitialKind::WState: return "w";
    case InitialKind::BellPair: return "bellpair";
  }
  return "unknown";
}

inline Boundary parse_boundary(std::string_view s) {
  if (s == "closed" || s == "periodic") return Boundary::Closed;
  if (s == "open") return Boundary::Open;
  throw Error(ErrorKind::InvalidArgument, "unknown boundary '" + std::string(s) + "'");
}
inline RateConvention parse_rate_convention(std::string_view s) {
  if (s == "literal") return RateConvention::Literal;
  if (s == "sqrt" || s == "sqrtrate" || s == "sqrt-rate") return RateConvention::SqrtRate;
  throw Error(ErrorKind::InvalidArgument, "unknown rate convention '" + std::string(s) + "'");
}
inline InitialKind parse_initial_kind(std::string_view s) {
  if (s == "separable") return InitialKind::Separable;
  if (s == "w" || s == "wstate") return InitialKind::WState;
  if (s == "bellpair" || s == "bell") return InitialKind::BellPair;
  throw Error(ErrorKind::InvalidArgument, "unknown initial state '" + std::string(s) + "'");
}

/// Physical description of the chain. Energies are in units of the Zeeman
/// splitting omega, so b_field is normally 1.
struct ChainParams {
  int n_sites = 5;
  double gamma = 1.0;     // xy anisotropy: 1 = Ising, 0 = XX
  double delta = 0.0;     // z coupling relative to J
  double coupling = 0.05; // J
  double b_field = 1.0;   // B^z
  Boundary boundary = Boundary::Closed;

  Eigen::Index dim() const { return Eigen::Index{1} << n_sites; }

  void validate() const {
    require(n_sites >= 2 && n_sites <= kMaxSites, ErrorKind::InvalidArgument,
            "n_sites must lie in [2, " + std::to_string(kMaxSites) + "], got " +
                std::to_string(n_sites));
    require(gamma >= 0.0 && gamma <= 1.0, ErrorKind::InvalidArgument,
            "gamma must lie in [0, 1]");
    require(delta >= 0.0 && delta <= 1.0, ErrorKind::InvalidArgument,
            "delta must lie in [0, 1]");
    require(coupling >= 0.0, ErrorKind::InvalidArgument, "coupling must be >= 0");
    require(b_field > 0.0, ErrorKind::InvalidArgument, "b_field must be > 0");
  }
};

/// Environment coupling. coupling_strength is Gamma, nbar the thermal
/// occupation. Gamma = 0 switches the dissipator off entirely.
struct EnvParams {
  double coupling_strength = 0.05;
  double nbar = 0.0;
  RateConvention rate_convention = RateConvention::Literal;

  bool dissipative() const { return coupling_strength > 0.0; }

  void validate() const {
    require(coupling_strength >= 0.0, ErrorKind::InvalidArgument,
            "coupling_strength must be >= 0");
    require(nbar >= 0.0, ErrorKind::InvalidArgument, "nbar must be >= 0");
  }
};

namespace local {

using Op = Eigen::Matrix2cd;

inline Op identity() { return Op::Identity(); }

inline Op sx() {
  Op m;
  m << 0.0, 0.5, 0.5, 0.0;
  return m;
}

inline Op sy() {
  Op m;
  m << cplx(0.0), cplx(0.0, -0.5), cplx(0.0, 0.5), cplx(0.0);
  return m;
}

inline Op sz() {
  Op m;
  m << 0.5, 0.0, 0.0, -0.5;
  return m;
}

// S^- = |down><up|, S^+ = |up><down|.
inline Op sminus() {
  Op m = Op::Zero();
  m(1, 0) = 1.0;
  return m;
}

inline Op splus() {
  Op m = Op::Zero();
  m(0, 1) = 1.0;
  return m;
}

}  // namespace local

/// Bit position (from the least significant end) of a 1-based site.
inline int site_bit(int site, int n_sites) { return n_sites - site; }

/// 1 (x) ... (x) local (x) ... (x) 1 with `local` acting on `site` (1-based).
inline SpinOperator embed_site_operator(const local::Op& op, int site, int n_sites) {
  require(n_sites >= 1 && n_sites <= kMaxSites, ErrorKind::InvalidArgument,
          "n_sites out of range");
  require(site >= 1 && site <= n_sites, ErrorKind::InvalidArgument,
          "site " + std::to_string(site) + " out of range [1, " +
              std::to_string(n_sites) + "]");
  const Eigen::Index q = Eigen::Index{1} << n_sites;
  const int bit = site_bit(site, n_sites);
  const Eigen::Index mask = Eigen::Index{1} << bit;

  Triplets entries;
  entries.reserve(static_cast<std::size_t>(2 * q));
  for (Eigen::Index col = 0; col < q; ++col) {
    const int c = static_cast<int>((col >> bit) & 1);
    for (int r = 0; r < 2; ++r) {
      const cplx v = op(r, c);
      if (v == cplx(0.0)) continue;
      const Eigen::Index row = r == c ? col : (col ^ mask);
      entries.emplace_back(row, col, v);
    }
  }
  SpinOperator out(q, q);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

/// XYZ Hamiltonian with a uniform longitudinal field. For a closed chain the
/// bond sum runs over i = 1..N with site N+1 identified with site 1 (so N = 2
/// closed counts the single bond twice).
inline SpinOperator build_hamiltonian(const ChainParams& p) {
  p.validate();
  const int n = p.n_sites;
  const Eigen::Index q = p.dim();

  std::vector<SpinOperator> sx(n), sy(n), sz(n);
  for (int k = 1; k <= n; ++k) {
    sx[k - 1] = embed_site_operator(local::sx(), k, n);
    sy[k - 1] = embed_site_operator(local::sy(), k, n);
    sz[k - 1] = embed_site_operator(local::sz(), k, n);
  }

  const double cx = 0.5 * (1.0 + p.gamma) * p.coupling;
  const double cy = 0.5 * (1.0 - p.gamma) * p.coupling;
  const double cz = p.delta * p.coupling;

  SpinOperator h(q, q);
  const int bonds = p.boundary == Boundary::Closed ? n : n - 1;
  for (int i = 0; i < bonds; ++i) {
    const int j = (i + 1) % n;
    if (cx != 0.0) h += SpinOperator(cx * (sx[i] * sx[j]));
    if (cy != 0.0) h += SpinOperator(cy * (sy[i] * sy[j]));
    if (cz != 0.0) h += SpinOperator(cz * (sz[i] * sz[j]));
  }
  for (int i = 0; i < n; ++i) h += SpinOperator(p.b_field * sz[i]);
  h.prune(cplx(0.0), 0.0);
  h.makeCompressed();
  return h;
}

/// Per-site Lindblad operators
///   L_k = g [ (nbar+1)/2 S^-_k + nbar S^+_k ],
/// with g = Gamma (Literal) or sqrt(Gamma) (SqrtRate).
inline std::vector<SpinOperator> build_lindblad_ops(int n_sites, const EnvParams& env) {
  env.validate();
  require(n_sites >= 1 && n_sites <= kMaxSites, ErrorKind::InvalidArgument,
          "n_sites out of range");
  const double g = env.rate_convention == RateConvention::Literal
                       ? env.coupling_strength
                       : std::sqrt(env.coupling_strength);
  const local::Op op =
      g * (0.5 * (env.nbar + 1.0) * local::sminus() + env.nbar * local::splus());

  std::vector<SpinOperator> ops;
  ops.reserve(static_cast<std::size_t>(n_sites));
  for (int k = 1; k <= n_sites; ++k) ops.push_back(embed_site_operator(op, k, n_sites));
  return ops;
}

inline std::vector<SpinOperator> build_lindblad_ops(const ChainParams& chain,
                                                    const EnvParams& env) {
  chain.validate();
  return build_lindblad_ops(chain.n_sites, env);
}

/// Canonical initial states: all up; the single-excitation W state; a
/// (|ud> + |du>)/sqrt(2) pair on sites 1,2 with all remaining sites down.
inline PureState initial_state(InitialKind kind, int n_sites) {
  require(n_sites >= 2 && n_sites <= kMaxSites, ErrorKind::InvalidArgument,
          "initial_state requires 2 <= n_sites <= " + std::to_string(kMaxSites));
  const Eigen::Index q = Eigen::Index{1} << n_sites;
  const Eigen::Index all_down = q - 1;
  PureState psi = PureState::Zero(q);

  switch (kind) {
    case InitialKind::Separable:
      psi(0) = 1.0;
      break;
    case InitialKind::WState: {
      const double a = 1.0 / std::sqrt(static_cast<double>(n_sites));
      for (int k = 1; k <= n_sites; ++k)
        psi(all_down ^ (Eigen::Index{1} << site_bit(k, n_sites))) = a;
      break;
    }
    case InitialKind::BellPair: {
      const double a = 1.0 / std::sqrt(2.0);
      psi(all_down ^ (Eigen::Index{1} << site_bit(1, n_sites))) = a;
      psi(all_down ^ (Eigen::Index{1} << site_bit(2, n_sites))) = a;
      break;
    }
    default:
      throw Error(ErrorKind::InvalidArgument, "invalid initial state kind");
  }
  return psi;
}

inline DensityMatrix to_density(const PureState& psi) { return psi * psi.adjoint(); }

/// Permutation that moves the spin on site k to site k+1 (site N wraps to 1).
inline SpinOperator cyclic_shift(int n_sites) {
  const Eigen::Index q = Eigen::Index{1} << n_sites;
  Triplets entries;
  entries.reserve(static_cast<std::size_t>(q));
  for (Eigen::Index b = 0; b < q; ++b) {
    Eigen::Index shifted = 0;
    for (int k = 1; k <= n_sites; ++k) {
      const int dest = k == n_sites ? 1 : k + 1;
      if ((b >> site_bit(k, n_sites)) & 1) shifted |= Eigen::Index{1} << site_bit(dest, n_sites);
    }
    entries.emplace_back(shifted, b, 1.0);
  }
  SpinOperator p(q, q);
  p.setFromTriplets(entries.begin(), entries.end());
  return p;
}

}  // namespace spinchain

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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinchain/core.hpp"

namespace spinchain {

struct ReducedDensityMatrix {
  std::vector<int> kept_sites;  // 1-based, ascending
  DenseMatrix entries;
};

/// Trace out every site not in `keep`. Kept sites retain their relative
/// ordering, so the lowest-numbered kept site is the most significant bit.
inline ReducedDensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const int n = sites_for_dimension(rho.rows());
  require(rho.rows() == rho.cols() && n >= 1, ErrorKind::DimensionMismatch,
          "partial_trace expects a square 2^N matrix");
  require(!keep.empty(), ErrorKind::InvalidArgument, "keep list is empty");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    require(keep[i] >= 1 && keep[i] <= n, ErrorKind::InvalidArgument,
            "kept site " + std::to_string(keep[i]) + " out of range");
    require(i == 0 || keep[i] > keep[i - 1], ErrorKind::InvalidArgument,
            "keep list must be strictly ascending");
  }

  const int k = static_cast<int>(keep.size());
  std::vector<int> traced;
  for (int s = 1; s <= n; ++s)
    if (std::find(keep.begin(), keep.end(), s) == keep.end()) traced.push_back(s);

  // Scatter a compact index over the given sites into a full basis index.
  auto expand = [n](Eigen::Index compact, const std::vector<int>& sites) {
    Eigen::Index full = 0;
    const int m = static_cast<int>(sites.size());
    for (int i = 0; i < m; ++i)
      if ((compact >> (m - 1 - i)) & 1) full |= Eigen::Index{1} << (n - sites[static_cast<std::size_t>(i)]);
    return full;
  };

  const Eigen::Index dk = Eigen::Index{1} << k;
  const Eigen::Index de = Eigen::Index{1} << (n - k);
  std::vector<Eigen::Index> kept_idx(static_cast<std::size_t>(dk));
  std::vector<Eigen::Index> env_idx(static_cast<std::size_t>(de));
  for (Eigen::Index a = 0; a < dk; ++a) kept_idx[static_cast<std::size_t>(a)] = expand(a, keep);
  for (Eigen::Index e = 0; e < de; ++e) env_idx[static_cast<std::size_t>(e)] = expand(e, traced);

  ReducedDensityMatrix out{keep, DenseMatrix::Zero(dk, dk)};
  for (Eigen::Index a = 0; a < dk; ++a)
    for (Eigen::Index b = 0; b < dk; ++b) {
      cplx sum = 0.0;
      const Eigen::Index ra = kept_idx[static_cast<std::size_t>(a)];
      const Eigen::Index rb = kept_idx[static_cast<std::size_t>(b)];
      for (Eigen::Index e : env_idx) sum += rho(ra | e, rb | e);
      out.entries(a, b) = sum;
    }
  return out;
}

namespace detail {

inline const Eigen::Matrix4cd& sigma_y_sigma_y() {
  static const Eigen::Matrix4cd yy = [] {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m(0, 3) = -1.0;
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    m(3, 0) = -1.0;
    return m;
  }();
  return yy;
}

inline Eigen::Matrix4cd spin_flip(const Eigen::Matrix4cd& rho) {
  const auto& yy = sigma_y_sigma_y();
  return yy * rho.conjugate() * yy;
}

inline double wootters_combination(std::array<double, 4> eps) {
  std::sort(eps.begin(), eps.end(), [](double a, double b) { return a > b; });
  return eps[0] - eps[1] - eps[2] - eps[3];
}

inline Eigen::Matrix4cd checked_pair(const DenseMatrix& rho2) {
  require(rho2.rows() == 4 && rho2.cols() == 4, ErrorKind::DimensionMismatch,
          "concurrence expects a 4x4 two-site density matrix");
  const Eigen::Matrix4cd r = rho2;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (r + r.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-7) {
    std::ostringstream msg;
    msg << "two-site matrix has eigenvalue " << lo;
    throw Error(ErrorKind::NonPhysicalInput, msg.str());
  }
  return r;
}

inline double finish_concurrence(double raw) {
  if (raw > 1.0 + 1e-7) {
    std::ostringstream msg;
    msg << "concurrence " << raw << " exceeds 1";
    throw Error(ErrorKind::NonPhysicalInput, msg.str());
  }
  return std::clamp(raw, 0.0, 1.0);
}

}  // namespace detail

/// Wootters concurrence max{0, e1 - e2 - e3 - e4}, with e_i the eigenvalues
/// of R = sqrt(sqrt(rho) rho~ sqrt(rho)). Writing rho = W W^H with
/// W = V sqrt(D), the e_i are the singular values of W^T (sy x sy) W, which
/// keeps vanishing e_i at rounding level on rank-deficient marginals.
inline double concurrence(const DenseMatrix& rho2) {
  const Eigen::Matrix4cd r = detail::checked_pair(rho2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (r + r.adjoint()));
  const Eigen::Matrix4cd w =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Eigen::JacobiSVD<Eigen::Matrix4cd> svd(w.transpose() * detail::sigma_y_sigma_y() * w);
  std::array<double, 4> eps{};
  for (int i = 0; i < 4; ++i) eps[static_cast<std::size_t>(i)] = svd.singularValues()(i);
  return detail::finish_concurrence(detail::wootters_combination(eps));
}

inline double concurrence(const ReducedDensityMatrix& rho2) {
  require(rho2.kept_sites.size() == 2, ErrorKind::InvalidArgument,
          "concurrence needs a two-site marginal");
  return concurrence(rho2.entries);
}

/// Same quantity from the square roots of the eigenvalues of rho * rho~
/// (general complex eigen-solver). Exact zeros of that spectrum come back as
/// rounding noise, whose square root is ~1e-8, so this route is a cross-check
/// for full-rank marginals only.
inline double concurrence_product_route(const DenseMatrix& rho2) {
  const Eigen::Matrix4cd r = detail::checked_pair(rho2);
  const Eigen::Matrix4cd product = r * detail::spin_flip(r);
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(product, /*computeEigenvectors=*/false);
  std::array<double, 4> eps{};
  for (int i = 0; i < 4; ++i)
    eps[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  return detail::finish_concurrence(detail::wootters_combination(eps));
}

inline double purity(const DensityMatrix& rho) {
  // Tr rho^2 = sum |rho_ij|^2 for Hermitian rho.
  return rho.cwiseAbs2().sum();
}

inline constexpr double kPurityThreshold = 1.0 - 1e-6;

/// 4 det rho_1, reported only when the full state is pure.
inline std::optional<double> one_tangle(const DenseMatrix& rho1, double purity_of_full_state) {
  require(rho1.rows() == 2 && rho1.cols() == 2, ErrorKind::DimensionMismatch,
          "one_tangle expects a 2x2 marginal");
  if (purity_of_full_state < kPurityThreshold) return std::nullopt;
  const double det = (rho1(0, 0) * rho1(1, 1) - rho1(0, 1) * rho1(1, 0)).real();
  return std::clamp(4.0 * det, 0.0, 1.0);
}

/// Pairwise concurrences of every unordered pair; C(i, j) uses 0-based
/// indices, the diagonal is zero and the matrix is symmetric by construction.
inline Eigen::MatrixXd pair_concurrences(const DensityMatrix& rho) {
  const int n = sites_for_dimension(rho.rows());
  require(n >= 2, ErrorKind::DimensionMismatch, "need at least two sites");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      const double v = concurrence(partial_trace(rho, {i, j}).entries);
      c(i - 1, j - 1) = v;
      c(j - 1, i - 1) = v;
    }
  return c;
}

inline double tau2(const Eigen::MatrixXd& concurrences, int site) {
  require(site >= 1 && site <= concurrences.rows(), ErrorKind::InvalidArgument,
          "site out of range");
  double sum = 0.0;
  for (Eigen::Index j = 0; j < concurrences.cols(); ++j)
    if (j != site - 1) sum += concurrences(site - 1, j) * concurrences(site - 1, j);
  return sum;
}

/// Sum over j != site of C_{site,j}^2.
inline double tau2(const DensityMatrix& rho, int site) {
  const int n = sites_for_dimension(rho.rows());
  require(site >= 1 && site <= n, ErrorKind::InvalidArgument, "site out of range");
  double sum = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (j == site) continue;
    const double c = concurrence(partial_trace(rho, {std::min(site, j), std::max(site, j)}).entries);
    sum += c * c;
  }
  return sum;
}

struct EntanglementRecord {
  Eigen::MatrixXd concurrences;              // N x N, symmetric, zero diagonal
  std::vector<std::optional<double>> tau1;   // per site; empty optional when undefined
  std::vector<double> tau2;                  // per site
  std::vector<std::optional<double>> ratio;  // tau2 / tau1 where defined
  double purity = 0.0;

  double pair(int i, int j) const { return concurrences(i - 1, j - 1); }
};

inline EntanglementRecord evaluate_entanglement(const DensityMatrix& rho) {
  const int n = sites_for_dimension(rho.rows());
  EntanglementRecord rec;
  rec.purity = purity(rho);
  rec.concurrences = pair_concurrences(rho);
  rec.tau1.resize(static_cast<std::size_t>(n));
  rec.tau2.resize(static_cast<std::size_t>(n));
  rec.ratio.resize(static_cast<std::size_t>(n));
  for (int s = 1; s <= n; ++s) {
    const auto idx = static_cast<std::size_t>(s - 1);
    rec.tau2[idx] = tau2(rec.concurrences, s);
    rec.tau1[idx] = one_tangle(partial_trace(rho, {s}).entries, rec.purity);
    if (rec.tau1[idx] && *rec.tau1[idx] > 1e-12) rec.ratio[idx] = rec.tau2[idx] / *rec.tau1[idx];
  }
  return rec;
}

}  // namespace spinchain

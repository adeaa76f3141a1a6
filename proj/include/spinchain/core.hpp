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

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spinchain {

using cplx = std::complex<double>;

// Hilbert-space operators and Liouville-space superoperators are both stored
// row-major so that matrix-vector products stream over contiguous rows.
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Triplet = Eigen::Triplet<cplx>;
using Triplets = std::vector<Triplet>;

using SpinOperator = SparseMatrix;   // Q x Q, Q = 2^N
using DensityMatrix = DenseMatrix;   // Q x Q, Hermitian, unit trace
using PureState = Vector;            // Q amplitudes
using VectorizedState = Vector;      // Q^2 entries, row-major flattening

inline constexpr int kMaxSites = 8;

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  IllConditioned,
  DimensionCap,
  StepTooLarge,
  DiagnosticBreach,
  NoNullVector,
  NonUnique,
  NonPhysicalInput,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::DimensionCap: return "DimensionCap";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::DiagnosticBreach: return "DiagnosticBreach";
    case ErrorKind::NoNullVector: return "NoNullVector";
    case ErrorKind::NonUnique: return "NonUnique";
    case ErrorKind::NonPhysicalInput: return "NonPhysicalInput";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The kind is the
/// machine-readable part; what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

/// Number of qubits encoded by a Hilbert dimension, or -1 if not a power of two.
inline int sites_for_dimension(Eigen::Index dim) {
  if (dim < 1) return -1;
  int n = 0;
  Eigen::Index q = 1;
  while (q < dim) {
    q <<= 1;
    ++n;
  }
  return q == dim ? n : -1;
}

inline double max_abs(const DenseMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const DenseMatrix& m) {
  return max_abs(m - m.adjoint());
}

}  // namespace spinchain

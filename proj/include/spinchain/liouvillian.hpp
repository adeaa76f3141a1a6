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

// Liouville-space representation of the master equation.
//
// A Q x Q density matrix is flattened row-major: rho(j, l) lives in slot
// j*Q + l. Every superoperator in this header uses that index map, and so
// does every solver built on top of it.

#pragma once

#include <string>
#include <vector>

#include "spinchain/core.hpp"

namespace spinchain {

inline VectorizedState vectorize(const DensityMatrix& rho) {
  require(rho.rows() == rho.cols(), ErrorKind::DimensionMismatch,
          "vectorize expects a square matrix");
  const Eigen::Index q = rho.rows();
  VectorizedState v(q * q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index l = 0; l < q; ++l) v(j * q + l) = rho(j, l);
  return v;
}

inline DensityMatrix devectorize(const VectorizedState& v) {
  Eigen::Index q = 0;
  while (q * q < v.size()) ++q;
  require(q * q == v.size(), ErrorKind::DimensionMismatch,
          "devectorize expects a vector of square length, got " + std::to_string(v.size()));
  DensityMatrix rho(q, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index l = 0; l < q; ++l) rho(j, l) = v(j * q + l);
  return rho;
}

namespace detail {

inline void append_kron(Triplets& out, const SparseMatrix& a, const SparseMatrix& b,
                        cplx scale) {
  const Eigen::Index nb_rows = b.rows();
  const Eigen::Index nb_cols = b.cols();
  for (Eigen::Index ra = 0; ra < a.outerSize(); ++ra)
    for (SparseMatrix::InnerIterator ia(a, ra); ia; ++ia)
      for (Eigen::Index rb = 0; rb < b.outerSize(); ++rb)
        for (SparseMatrix::InnerIterator ib(b, rb); ib; ++ib)
          out.emplace_back(ia.row() * nb_rows + ib.row(), ia.col() * nb_cols + ib.col(),
                           scale * ia.value() * ib.value());
}

inline SparseMatrix sparse_identity(Eigen::Index q) {
  SparseMatrix id(q, q);
  id.setIdentity();
  return id;
}

inline SparseMatrix from_triplets(Eigen::Index n, const Triplets& entries) {
  SparseMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  m.prune(cplx(0.0), 0.0);
  m.makeCompressed();
  return m;
}

}  // namespace detail

/// Sparse Kronecker product under the row-major index map.
inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  Triplets entries;
  entries.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  detail::append_kron(entries, a, b, 1.0);
  SparseMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

/// Four-index commutator matrix L^H_{jl,mn} = H_{jm} d_{ln} - d_{jm} H_{nl},
/// i.e. H (x) 1 - 1 (x) H^T. The generator applies the overall -i.
inline SparseMatrix assemble_hamiltonian_superop(const SpinOperator& h) {
  require(h.rows() == h.cols(), ErrorKind::DimensionMismatch,
          "Hamiltonian must be square");
  const Eigen::Index q = h.rows();
  const SparseMatrix id = detail::sparse_identity(q);
  const SparseMatrix ht = h.transpose();
  Triplets entries;
  entries.reserve(static_cast<std::size_t>(2 * h.nonZeros() * q));
  detail::append_kron(entries, h, id, 1.0);
  detail::append_kron(entries, id, ht, -1.0);
  return detail::from_triplets(q * q, entries);
}

/// Four-index dissipator matrix
///   L^D_{jl,mn} = (i/2) sum_k [ 2 (L_k^+)_{nl} (L_k)_{jm}
///                               - (L_k^+ L_k)_{jm} d_{ln} - d_{jm} (L_k^+ L_k)_{nl} ].
/// After the generator's -i this acts as sum_k L rho L^+ - {L^+ L, rho}/2.
inline SparseMatrix assemble_dissipator_superop(const std::vector<SpinOperator>& ops,
                                                Eigen::Index q) {
  for (const auto& op : ops)
    require(op.rows() == q && op.cols() == q, ErrorKind::DimensionMismatch,
            "Lindblad operator dimension does not match the Hilbert space");
  const SparseMatrix id = detail::sparse_identity(q);
  const cplx half_i(0.0, 0.5);
  Triplets entries;
  for (const auto& op : ops) {
    const SparseMatrix op_conj = op.conjugate();
    const SparseMatrix ldl = SparseMatrix(op.adjoint()) * op;
    const SparseMatrix ldl_t = ldl.transpose();
    detail::append_kron(entries, op, op_conj, 2.0 * half_i);
    detail::append_kron(entries, ldl, id, -half_i);
    detail::append_kron(entries, id, ldl_t, -half_i);
  }
  return detail::from_triplets(q * q, entries);
}

inline SparseMatrix assemble_dissipator_superop(const std::vector<SpinOperator>& ops) {
  require(!ops.empty(), ErrorKind::InvalidArgument,
          "empty operator list needs an explicit Hilbert dimension");
  return assemble_dissipator_superop(ops, ops.front().rows());
}

/// Full generator d vec(rho)/dt = total * vec(rho). The two parts are stored
/// with the -i prefactor already applied.
struct Liouvillian {
  Eigen::Index hilbert_dim = 0;
  SparseMatrix hamiltonian_part;
  SparseMatrix dissipative_part;
  SparseMatrix total;

  Eigen::Index dim() const { return total.rows(); }
  bool dissipative() const { return dissipative_part.nonZeros() > 0; }

  DenseMatrix dense() const { return DenseMatrix(total); }

  VectorizedState apply(const VectorizedState& v) const { return total * v; }
};

inline Liouvillian assemble_liouvillian(const SpinOperator& h,
                                        const std::vector<SpinOperator>& lindblad_ops) {
  const Eigen::Index q = h.rows();
  const cplx minus_i(0.0, -1.0);
  Liouvillian gen;
  gen.hilbert_dim = q;
  gen.hamiltonian_part = minus_i * assemble_hamiltonian_superop(h);
  gen.dissipative_part = minus_i * assemble_dissipator_superop(lindblad_ops, q);
  gen.dissipative_part.prune(cplx(0.0), 0.0);
  gen.total = gen.hamiltonian_part + gen.dissipative_part;
  gen.total.makeCompressed();
  return gen;
}

/// Row vector selecting the diagonal slots; its product with vec(rho) is Tr rho.
inline Vector trace_functional(Eigen::Index q) {
  Vector t = Vector::Zero(q * q);
  for (Eigen::Index j = 0; j < q; ++j) t(j * q + j) = 1.0;
  return t;
}

inline cplx vectorized_trace(const VectorizedState& v, Eigen::Index q) {
  cplx tr = 0.0;
  for (Eigen::Index j = 0; j < q; ++j) tr += v(j * q + j);
  return tr;
}

}  // namespace spinchain

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

#include <random>

#include "spinchain/core.hpp"

namespace spinchain::testing {

inline DenseMatrix random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline DenseMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index q) {
  const DenseMatrix a = random_complex(rng, q, q);
  return 0.5 * (a + a.adjoint());
}

/// Random full-rank density matrix G G^+ / Tr(G G^+).
inline DensityMatrix random_density(std::mt19937_64& rng, Eigen::Index q) {
  const DenseMatrix g = random_complex(rng, q, q);
  DensityMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return rho;
}

inline PureState random_pure(std::mt19937_64& rng, Eigen::Index q) {
  PureState psi = random_complex(rng, q, 1);
  psi.normalize();
  return psi;
}

inline Eigen::Matrix2cd random_unitary2(std::mt19937_64& rng) {
  const DenseMatrix a = random_complex(rng, 2, 2);
  const Eigen::Matrix2cd m = a;
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(m);
  return qr.householderQ();
}

}  // namespace spinchain::testing

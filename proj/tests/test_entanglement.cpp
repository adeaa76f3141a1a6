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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spinchain/entanglement.hpp"
#include "spinchain/spin_operators.hpp"
#include "test_support.hpp"

namespace spinchain {
namespace {

using testing::random_density;
using testing::random_pure;
using testing::random_unitary2;

DenseMatrix psi_plus() {
  Vector v = Vector::Zero(4);
  v(1) = v(2) = 1.0 / std::sqrt(2.0);
  return v * v.adjoint();
}

DenseMatrix werner(double p) {
  return p * psi_plus() + (1.0 - p) * DenseMatrix::Identity(4, 4) / 4.0;
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
  const DensityMatrix rho = to_density(initial_state(InitialKind::BellPair, 2));
  const auto r = partial_trace(rho, {1});
  EXPECT_LE(max_abs(r.entries - DenseMatrix::Identity(2, 2) / 2.0), 1e-15);
  EXPECT_EQ(r.kept_sites, std::vector<int>{1});
}

TEST(PartialTrace, ProductMarginal) {
  const DensityMatrix rho = to_density(initial_state(InitialKind::Separable, 2));
  DenseMatrix up = DenseMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  EXPECT_EQ(max_abs(partial_trace(rho, {2}).entries - up), 0.0);
}

TEST(PartialTrace, WStatePairMarginal) {
  const DensityMatrix rho = to_density(initial_state(InitialKind::WState, 3));
  DenseMatrix expected = (2.0 / 3.0) * psi_plus();
  expected(3, 3) += 1.0 / 3.0;
  EXPECT_LE(max_abs(partial_trace(rho, {1, 2}).entries - expected), 1e-15);
}

TEST(PartialTrace, KeepsSiteOrderAndTrace) {
  std::mt19937_64 rng(5);
  const DensityMatrix rho = random_density(rng, 16);
  const auto r = partial_trace(rho, {2, 4});
  EXPECT_NEAR(std::abs(r.entries.trace() - 1.0), 0.0, 1e-14);
  EXPECT_LE(hermiticity_error(r.entries), 1e-14);

  // |u_1 d_2 u_3 d_4> marginal on (2, 4) is |dd>, index 3.
  PureState psi = PureState::Zero(16);
  psi(0b0101) = 1.0;
  EXPECT_NEAR(partial_trace(to_density(psi), {2, 4}).entries(3, 3).real(), 1.0, 0.0);
  EXPECT_NEAR(partial_trace(to_density(psi), {1, 2}).entries(1, 1).real(), 1.0, 0.0);
}

TEST(PartialTrace, Composes) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = random_density(rng, 32);
    for (int i = 1; i <= 5; ++i)
      for (int j = i + 1; j <= 5; ++j) {
        const DenseMatrix pair = partial_trace(rho, {i, j}).entries;
        EXPECT_LE(max_abs(partial_trace(pair, {1}).entries - partial_trace(rho, {i}).entries), 1e-12);
        EXPECT_LE(max_abs(partial_trace(pair, {2}).entries - partial_trace(rho, {j}).entries), 1e-12);
      }
  }
}

TEST(PartialTrace, RejectsBadSiteLists) {
  const DensityMatrix rho = DensityMatrix::Identity(8, 8) / 8.0;
  EXPECT_THROW(partial_trace(rho, {}), Error);
  EXPECT_THROW(partial_trace(rho, {0}), Error);
  EXPECT_THROW(partial_trace(rho, {4}), Error);
  EXPECT_THROW(partial_trace(rho, {2, 1}), Error);
  EXPECT_THROW(partial_trace(rho, {2, 2}), Error);
  EXPECT_THROW(partial_trace(DensityMatrix::Identity(6, 6), {1}), Error);
}

TEST(Concurrence, BellAndProduct) {
  EXPECT_DOUBLE_EQ(concurrence(psi_plus()), 1.0);
  DenseMatrix uu = DenseMatrix::Zero(4, 4);
  uu(0, 0) = 1.0;
  EXPECT_EQ(concurrence(uu), 0.0);
  EXPECT_EQ(concurrence(DenseMatrix(DenseMatrix::Identity(4, 4) / 4.0)), 0.0);
}

TEST(Concurrence, WStatePair) {
  const DensityMatrix rho = to_density(initial_state(InitialKind::WState, 3));
  EXPECT_NEAR(concurrence(partial_trace(rho, {1, 2})), 2.0 / 3.0, 1e-10);
  const DensityMatrix rho5 = to_density(initial_state(InitialKind::WState, 5));
  EXPECT_NEAR(concurrence(partial_trace(rho5, {2, 4})), 0.4, 1e-10);
}

TEST(Concurrence, WernerFamily) {
  EXPECT_NEAR(concurrence(werner(0.5)), 0.25, 1e-10);
  for (double p = 0.0; p <= 1.0; p += 0.05)
    EXPECT_NEAR(concurrence(werner(p)), std::max(0.0, (3.0 * p - 1.0) / 2.0), 1e-10) << "p = " << p;
}

TEST(Concurrence, RoutesAgree) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const DenseMatrix rho = random_density(rng, 4);
    EXPECT_NEAR(concurrence(rho), concurrence_product_route(rho), 1e-10);
  }
}

TEST(Concurrence, PureStateClosedForm) {
  // For |psi>, C = |psi^T (sy x sy) psi|.
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = yy(3, 0) = -1.0;
  yy(1, 2) = yy(2, 1) = 1.0;
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const PureState psi = random_pure(rng, 4);
    const double expected = std::abs((psi.transpose() * yy * psi)(0, 0));
    EXPECT_NEAR(concurrence(DenseMatrix(psi * psi.adjoint())), expected, 1e-12);
  }
}

TEST(Concurrence, LocalUnitaryInvariance) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const PureState a = random_pure(rng, 4), b = random_pure(rng, 4);
    const DenseMatrix rho = 0.8 * a * a.adjoint() + 0.2 * b * b.adjoint();
    const Eigen::Matrix2cd u1 = random_unitary2(rng), u2 = random_unitary2(rng);
    Eigen::Matrix4cd u;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) u.block<2, 2>(2 * i, 2 * j) = u1(i, j) * u2;
    const DenseMatrix rotated = u * rho * u.adjoint();
    EXPECT_NEAR(concurrence(rotated), concurrence(rho), 1e-9);
  }
}

TEST(Concurrence, RejectsUnphysicalInput) {
  DenseMatrix bad = psi_plus();
  bad(0, 0) = -0.01;
  bad(3, 3) = 0.01;
  try {
    concurrence(bad);
    FAIL() << "expected NonPhysicalInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPhysicalInput);
  }
  EXPECT_THROW(concurrence(DenseMatrix(DenseMatrix::Identity(2, 2))), Error);
}

TEST(OneTangle, Oracles) {
  EXPECT_NEAR(*one_tangle(DenseMatrix(DenseMatrix::Identity(2, 2) / 2.0), 1.0), 1.0, 1e-15);
  DenseMatrix up = DenseMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  EXPECT_EQ(*one_tangle(up, 1.0), 0.0);
  const DensityMatrix w = to_density(initial_state(InitialKind::WState, 3));
  const auto m = partial_trace(w, {1});
  EXPECT_NEAR(m.entries(0, 0).real(), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(*one_tangle(m.entries, purity(w)), 8.0 / 9.0, 1e-12);
}

TEST(OneTangle, UndefinedForMixedStates) {
  EXPECT_FALSE(one_tangle(DenseMatrix(DenseMatrix::Identity(2, 2) / 2.0), 0.9).has_value());
  EXPECT_TRUE(one_tangle(DenseMatrix(DenseMatrix::Identity(2, 2) / 2.0), 1.0 - 1e-7).has_value());
}

TEST(Tau2, Oracles) {
  for (int n = 3; n <= 5; ++n)
    EXPECT_NEAR(tau2(to_density(initial_state(InitialKind::BellPair, n)), 1), 1.0, 1e-12);
  const DensityMatrix w = to_density(initial_state(InitialKind::WState, 3));
  EXPECT_NEAR(tau2(w, 1), 8.0 / 9.0, 1e-10);
  EXPECT_EQ(tau2(to_density(initial_state(InitialKind::Separable, 4)), 2), 0.0);

  const EntanglementRecord rec = evaluate_entanglement(w);
  ASSERT_TRUE(rec.ratio[0].has_value());
  EXPECT_NEAR(*rec.ratio[0], 1.0, 1e-10);
}

TEST(EntanglementRecord, ShapeAndGating) {
  const DensityMatrix sep = to_density(initial_state(InitialKind::Separable, 4));
  const EntanglementRecord rec = evaluate_entanglement(sep);
  ASSERT_EQ(rec.concurrences.rows(), 4);
  EXPECT_EQ(rec.concurrences.maxCoeff(), 0.0);
  ASSERT_TRUE(rec.tau1[0].has_value());
  EXPECT_EQ(*rec.tau1[0], 0.0);
  EXPECT_FALSE(rec.ratio[0].has_value());  // tau1 = 0

  const DensityMatrix mixed = DensityMatrix::Identity(16, 16) / 16.0;
  const EntanglementRecord m = evaluate_entanglement(mixed);
  EXPECT_FALSE(m.tau1[0].has_value());
  EXPECT_FALSE(m.ratio[0].has_value());
  EXPECT_NEAR(m.purity, 1.0 / 16.0, 1e-15);
}

TEST(EntanglementRecord, SymmetricAndBounded) {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = to_density(random_pure(rng, 32));
    const EntanglementRecord rec = evaluate_entanglement(rho);
    EXPECT_EQ((rec.concurrences - rec.concurrences.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(rec.concurrences.minCoeff(), 0.0);
    EXPECT_LE(rec.concurrences.maxCoeff(), 1.0);
    for (int s = 0; s < 5; ++s) {
      ASSERT_TRUE(rec.tau1[static_cast<std::size_t>(s)].has_value());
      EXPECT_GE(*rec.tau1[static_cast<std::size_t>(s)], 0.0);
      EXPECT_LE(*rec.tau1[static_cast<std::size_t>(s)], 1.0);
    }
  }
}

TEST(Monogamy, PureStatesSatisfyCkw) {
  std::mt19937_64 rng(33);
  for (int n = 2; n <= 5; ++n)
    for (int trial = 0; trial < 100; ++trial) {
      const DensityMatrix rho = to_density(random_pure(rng, Eigen::Index{1} << n));
      const EntanglementRecord rec = evaluate_entanglement(rho);
      for (int s = 0; s < n; ++s)
        ASSERT_LE(rec.tau2[static_cast<std::size_t>(s)], *rec.tau1[static_cast<std::size_t>(s)] + 1e-8);
    }
}

}  // namespace
}  // namespace spinchain

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

#include "spinchain/evolution.hpp"
#include "spinchain/spin_operators.hpp"
#include "test_support.hpp"

namespace spinchain {
namespace {

Liouvillian single_site(double env_gamma, double nbar, double field = 1.0,
                        RateConvention conv = RateConvention::Literal) {
  EnvParams env;
  env.coupling_strength = env_gamma;
  env.nbar = nbar;
  env.rate_convention = conv;
  return assemble_liouvillian(embed_site_operator(field * local::sz(), 1, 1),
                              build_lindblad_ops(1, env));
}

Liouvillian chain_generator(const ChainParams& chain, const EnvParams& env) {
  return assemble_liouvillian(build_hamiltonian(chain), build_lindblad_ops(chain, env));
}

DensityMatrix up_state() {
  DensityMatrix rho = DensityMatrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  return rho;
}

double max_state_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) gap = std::max(gap, max_abs(a.states[i] - b.states[i]));
  return gap;
}

TEST(TimeGrid, UniformEndpoints) {
  const TimeGrid g = TimeGrid::uniform(300.0, 3001);
  EXPECT_EQ(g.size(), 3001u);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g.t_max(), 300.0);
  EXPECT_TRUE(g.is_uniform());
  EXPECT_NEAR(g.spacing(), 0.1, 1e-15);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
}

TEST(TimeGrid, RejectsBadSamples) {
  EXPECT_THROW(TimeGrid::uniform(0.0, 10), Error);
  EXPECT_THROW(TimeGrid::uniform(1.0, 1), Error);
  EXPECT_THROW(TimeGrid::from_samples({0.1, 0.2}), Error);
  EXPECT_THROW(TimeGrid::from_samples({0.0, 0.2, 0.2}), Error);
  EXPECT_NO_THROW(TimeGrid::from_samples({0.0, 0.5, 3.0}));
}

TEST(Spectral, FieldEigenstateIsStationary) {
  const Liouvillian gen = single_site(0.0, 0.0);
  const Trajectory tr = spectral_evolve(gen, up_state(), TimeGrid::uniform(50.0, 51));
  for (const auto& rho : tr.states) EXPECT_LE(max_abs(rho - up_state()), 1e-14);
}

TEST(Spectral, SingleSiteAmplitudeDamping) {
  const Liouvillian gen = single_site(0.05, 0.0);
  const TimeGrid grid = TimeGrid::uniform(300.0, 301);
  const Trajectory tr = spectral_evolve(gen, up_state(), grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(tr.states[i](0, 0).real(), std::exp(-6.25e-4 * grid[i]), 1e-8);
}

TEST(Spectral, SingleSiteThermalRatio) {
  const double nbar = 0.1;
  const Liouvillian gen = single_site(0.05, nbar);
  const Trajectory tr = spectral_evolve(gen, up_state(), TimeGrid::from_samples({0.0, 1e5}));
  const DensityMatrix& rho = tr.states.back();
  const double ratio = rho(0, 0).real() / rho(1, 1).real();
  EXPECT_NEAR(ratio, std::pow(2.0 * nbar / (nbar + 1.0), 2), 1e-8);
  EXPECT_LE(std::abs(rho(0, 1)), 1e-12);
}

TEST(Spectral, DecompositionInvariants) {
  ChainParams chain;
  chain.n_sites = 3;
  chain.gamma = 0.6;
  chain.delta = 0.4;
  EnvParams env;
  env.nbar = 0.05;
  const Liouvillian gen = chain_generator(chain, env);
  const VectorizedState v0 = vectorize(to_density(initial_state(InitialKind::WState, 3)));
  const SpectralDecomposition sd = spectral_decompose(gen, v0);
  EXPECT_LE(sd.eigenvalues.real().maxCoeff(), 1e-10);
  EXPECT_LE((sd.eigenvectors * sd.coefficients - v0).norm() / v0.norm(), 1e-8);
  EXPECT_LE((sd.evaluate(0.0) - v0).norm(), 1e-10);
  EXPECT_GT(sd.condition_estimate, 0.0);
}

TEST(Spectral, DimensionCap) {
  ChainParams chain;
  chain.n_sites = 6;
  const Liouvillian gen = chain_generator(chain, EnvParams{});
  const DensityMatrix rho0 = to_density(initial_state(InitialKind::Separable, 6));
  try {
    spectral_evolve(gen, rho0, TimeGrid::uniform(1.0, 2));
    FAIL() << "expected DimensionCap";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionCap);
  }
}

TEST(Spectral, DefectiveGeneratorIsIllConditioned) {
  // A Jordan block has a single eigenvector; the eigenvector matrix is singular.
  Liouvillian gen;
  gen.hilbert_dim = 2;
  Triplets t = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
  gen.total.resize(4, 4);
  gen.total.setFromTriplets(t.begin(), t.end());
  gen.dissipative_part = gen.total;
  gen.hamiltonian_part.resize(4, 4);
  try {
    spectral_decompose(gen, vectorize(up_state()));
    FAIL() << "expected IllConditioned";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IllConditioned);
  }
}

TEST(Stepping, SingleSiteAmplitudeDamping) {
  const Liouvillian gen = single_site(0.05, 0.0);
  const TimeGrid grid = TimeGrid::uniform(300.0, 61);
  const Trajectory tr = ode_evolve(gen, up_state(), grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(tr.states[i](0, 0).real(), std::exp(-6.25e-4 * grid[i]), 1e-8);
}

TEST(Stepping, ZeroGeneratorIsConstant) {
  Liouvillian gen;
  gen.hilbert_dim = 4;
  gen.total.resize(16, 16);
  gen.hamiltonian_part.resize(16, 16);
  gen.dissipative_part.resize(16, 16);
  std::mt19937_64 rng(3);
  const DensityMatrix rho0 = testing::random_density(rng, 4);
  const Trajectory tr = ode_evolve(gen, rho0, TimeGrid::uniform(10.0, 11));
  for (const auto& rho : tr.states) EXPECT_EQ(max_abs(rho - rho0), 0.0);
}

TEST(Stepping, RejectsLargeStep) {
  const Liouvillian gen = single_site(0.05, 0.0);
  try {
    ode_evolve(gen, up_state(), TimeGrid::uniform(1.0, 2), 0.06);
    FAIL() << "expected StepTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StepTooLarge);
  }
}

TEST(Stepping, TraceBreachAborts) {
  Liouvillian gen;
  gen.hilbert_dim = 2;
  gen.total.resize(4, 4);
  gen.total.setIdentity();
  gen.total *= cplx(0.01);
  gen.dissipative_part = gen.total;
  gen.hamiltonian_part.resize(4, 4);
  try {
    ode_evolve(gen, up_state(), TimeGrid::uniform(10.0, 11));
    FAIL() << "expected DiagnosticBreach";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DiagnosticBreach);
    EXPECT_NE(std::string(e.what()).find("T = "), std::string::npos);
  }
}

TEST(Stepping, HalvingTheStepChangesLittle) {
  ChainParams chain;
  chain.n_sites = 3;
  EnvParams env;
  env.rate_convention = RateConvention::SqrtRate;
  const Liouvillian gen = chain_generator(chain, env);
  const DensityMatrix rho0 = to_density(initial_state(InitialKind::BellPair, 3));
  const TimeGrid grid = TimeGrid::uniform(100.0, 11);
  const Trajectory a = ode_evolve(gen, rho0, grid, 0.01);
  const Trajectory b = ode_evolve(gen, rho0, grid, 0.005);
  EXPECT_LE(max_state_gap(a, b), 1e-7);
}

TEST(CrossValidation, SpectralAgreesWithStepping) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const InitialKind kinds[] = {InitialKind::Separable, InitialKind::WState, InitialKind::BellPair};
  for (int trial = 0; trial < 3; ++trial) {
    ChainParams chain;
    chain.n_sites = 2 + trial;
    chain.gamma = u(rng);
    chain.delta = u(rng);
    chain.boundary = trial % 2 ? Boundary::Open : Boundary::Closed;
    EnvParams env;
    env.coupling_strength = 0.1 * u(rng) + 0.01;
    env.nbar = 0.1 * u(rng);
    env.rate_convention = trial % 2 ? RateConvention::SqrtRate : RateConvention::Literal;
    const Liouvillian gen = chain_generator(chain, env);
    const DensityMatrix rho0 = to_density(initial_state(kinds[trial], chain.n_sites));
    const TimeGrid grid = TimeGrid::uniform(300.0, 301);
    const Trajectory s = spectral_evolve(gen, rho0, grid);
    const Trajectory o = ode_evolve(gen, rho0, grid);
    EXPECT_LE(max_state_gap(s, o), 1e-6) << "trial " << trial;
    EXPECT_TRUE(s.healthy());
    EXPECT_TRUE(o.healthy());
  }
}

TEST(Unitary, AgreesWithSteppingAtZeroGamma) {
  ChainParams chain;
  chain.n_sites = 3;
  chain.gamma = 0.7;
  chain.delta = 0.2;
  EnvParams env;
  env.coupling_strength = 0.0;
  const SpinOperator h = build_hamiltonian(chain);
  const PureState psi0 = initial_state(InitialKind::WState, 3);
  const TimeGrid grid = TimeGrid::uniform(300.0, 301);
  const Trajectory u = unitary_evolve(h, psi0, grid);
  const Trajectory o = ode_evolve(assemble_liouvillian(h, build_lindblad_ops(chain, env)),
                                  to_density(psi0), grid, 0.005);
  EXPECT_LE(max_state_gap(u, o), 1e-8);
}

TEST(Unitary, ExactAtTimeZeroAndStationaryEigenstates) {
  ChainParams chain;
  chain.n_sites = 3;
  const SpinOperator h = build_hamiltonian(chain);
  const PureState psi0 = initial_state(InitialKind::BellPair, 3);
  const Trajectory tr = unitary_evolve(h, psi0, TimeGrid::uniform(5.0, 6));
  EXPECT_EQ(max_abs(tr.states[0] - to_density(psi0)), 0.0);

  Eigen::SelfAdjointEigenSolver<DenseMatrix> es{DenseMatrix(h)};
  const PureState eig = es.eigenvectors().col(3);
  const Trajectory st = unitary_evolve(h, eig, TimeGrid::uniform(100.0, 11));
  for (const auto& rho : st.states) EXPECT_LE(max_abs(rho - to_density(eig)), 1e-12);
  EXPECT_THROW(unitary_evolve(h, 2.0 * psi0, TimeGrid::uniform(1.0, 2)), Error);
}

TEST(Unitary, ConservesPurityAndEnergy) {
  ChainParams chain;
  chain.n_sites = 4;
  chain.gamma = 0.5;
  chain.delta = 0.5;
  EnvParams env;
  env.coupling_strength = 0.0;
  const SpinOperator h = build_hamiltonian(chain);
  const DenseMatrix hd(h);
  const DensityMatrix rho0 = to_density(initial_state(InitialKind::BellPair, 4));
  const Trajectory o = ode_evolve(assemble_liouvillian(h, build_lindblad_ops(chain, env)), rho0,
                                  TimeGrid::uniform(300.0, 31));
  const double e0 = (hd * rho0).trace().real();
  for (const auto& rho : o.states) {
    EXPECT_NEAR((rho * rho).trace().real(), 1.0, 1e-8);
    EXPECT_NEAR((hd * rho).trace().real(), e0, 1e-8);
  }
}

TEST(SteadyState, ZeroCouplingGivesAllDown) {
  for (int n = 1; n <= 4; ++n) {
    EnvParams env;
    const Liouvillian gen =
        n == 1 ? single_site(0.05, 0.0)
               : [&] {
                   ChainParams chain;
                   chain.n_sites = n;
                   chain.coupling = 0.0;
                   return chain_generator(chain, env);
                 }();
    const DensityMatrix rho = steady_state(gen);
    DensityMatrix expected = DensityMatrix::Zero(rho.rows(), rho.cols());
    expected(rho.rows() - 1, rho.cols() - 1) = 1.0;
    EXPECT_LE(max_abs(rho - expected), 1e-10) << "N = " << n;
  }
}

TEST(SteadyState, SingleSiteThermalRatio) {
  const DensityMatrix rho = steady_state(single_site(0.05, 0.1));
  EXPECT_NEAR(rho(0, 0).real() / rho(1, 1).real(), std::pow(0.2 / 1.1, 2), 1e-8);
}

// Strong damping relaxes well before T = 300, so the trajectory endpoint is
// a faithful oracle for the null vector here.
TEST(SteadyState, MatchesLongTimeEvolution) {
  struct Case {
    int n;
    Boundary boundary;
    double env_gamma;
    RateConvention conv;
    double nbar;
  };
  const Case cases[] = {
      {2, Boundary::Closed, 0.5, RateConvention::Literal, 0.0},
      {3, Boundary::Open, 0.2, RateConvention::SqrtRate, 0.05},
      {4, Boundary::Closed, 0.2, RateConvention::SqrtRate, 0.0},
  };
  for (const auto& c : cases) {
    ChainParams chain;
    chain.n_sites = c.n;
    chain.boundary = c.boundary;
    chain.gamma = 0.8;
    chain.coupling = 0.2;
    EnvParams env;
    env.coupling_strength = c.env_gamma;
    env.nbar = c.nbar;
    env.rate_convention = c.conv;
    const Liouvillian gen = chain_generator(chain, env);
    const DensityMatrix ss = steady_state(gen);
    const Trajectory tr = spectral_evolve(gen, to_density(initial_state(InitialKind::BellPair, c.n)),
                                          TimeGrid::from_samples({0.0, 300.0}));
    EXPECT_LE(max_abs(ss - tr.states.back()), 1e-5) << "N = " << c.n;
    EXPECT_TRUE(within(diagnose(ss), HealthTolerances{}));
  }
}

TEST(SteadyState, DegenerateNullSpaceIsReportedNotChosen) {
  // Pure dephasing commutes with a field-only Hamiltonian: every diagonal
  // state is stationary.
  const int n = 2;
  std::vector<SpinOperator> ops;
  for (int k = 1; k <= n; ++k) ops.push_back(embed_site_operator(0.2 * local::sz(), k, n));
  ChainParams chain;
  chain.n_sites = n;
  chain.coupling = 0.0;
  const Liouvillian gen = assemble_liouvillian(build_hamiltonian(chain), ops);
  try {
    steady_state(gen);
    FAIL() << "expected NonUnique";
  } catch (const NonUniqueSteadyState& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonUnique);
    EXPECT_GE(e.report().null_dimension, 2);
    EXPECT_EQ(e.report().null_states.size(), static_cast<std::size_t>(e.report().null_dimension));
  }
}

TEST(SteadyState, RequiresDissipation) {
  ChainParams chain;
  chain.n_sites = 2;
  EnvParams env;
  env.coupling_strength = 0.0;
  EXPECT_THROW(steady_state(chain_generator(chain, env)), Error);
}

TEST(Diagnostics, FlagUnphysicalMatrices) {
  DensityMatrix bad = DensityMatrix::Zero(2, 2);
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  bad(0, 1) = 1e-6;
  const StateDiagnostics d = diagnose(bad);
  EXPECT_NEAR(d.trace_error, 0.0, 1e-15);
  EXPECT_GT(d.hermiticity_error, 1e-8);
  EXPECT_LT(d.min_eigenvalue, -0.1);
  EXPECT_FALSE(within(d, HealthTolerances{}));
}

}  // namespace
}  // namespace spinchain

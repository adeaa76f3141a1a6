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

// Time propagation of the master equation.
//
// Three independent propagators share one sampling/diagnostics path:
//   spectral_evolve  eigen-expansion of the dense generator (small chains)
//   ode_evolve       fixed-step classic RK4 on sparse mat-vec products
//   unitary_evolve   exp(-iHt) on a pure state, for Gamma = 0
// steady_state() extracts the null vector of the sparse generator.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseLU>

#if SPINCHAIN_HAVE_LAPACKE
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

#include "spinchain/core.hpp"
#include "spinchain/liouvillian.hpp"

namespace spinchain {

// ---------------------------------------------------------------------------
// Time grid

class TimeGrid {
 public:
  TimeGrid() = default;

  /// n_samples equally spaced points on [0, t_max], endpoints included.
  static TimeGrid uniform(double t_max, std::size_t n_samples) {
    require(t_max > 0.0, ErrorKind::InvalidArgument, "t_max must be > 0");
    require(n_samples >= 2, ErrorKind::InvalidArgument, "a time grid needs >= 2 samples");
    std::vector<double> s(n_samples);
    const double dt = t_max / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) s[i] = dt * static_cast<double>(i);
    s.back() = t_max;
    TimeGrid g;
    g.samples_ = std::move(s);
    g.uniform_ = true;
    return g;
  }

  static TimeGrid from_samples(std::vector<double> samples) {
    require(!samples.empty() && samples.front() == 0.0, ErrorKind::InvalidArgument,
            "time grid must start at 0");
    for (std::size_t i = 1; i < samples.size(); ++i)
      require(samples[i] > samples[i - 1], ErrorKind::InvalidArgument,
              "time grid must be strictly increasing");
    TimeGrid g;
    g.samples_ = std::move(samples);
    return g;
  }

  const std::vector<double>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  double t_max() const { return samples_.empty() ? 0.0 : samples_.back(); }
  bool is_uniform() const { return uniform_; }
  double spacing() const {
    return samples_.size() < 2 ? 0.0 : samples_[1] - samples_[0];
  }

 private:
  std::vector<double> samples_;
  bool uniform_ = false;
};

// ---------------------------------------------------------------------------
// Per-sample state health

struct StateDiagnostics {
  double trace_error = 0.0;        // |Tr rho - 1|
  double hermiticity_error = 0.0;  // max |rho - rho^+|
  double min_eigenvalue = 0.0;     // of the Hermitian part
};

struct HealthTolerances {
  double trace = 1e-7;
  double hermiticity = 1e-8;
  double min_eigenvalue = -1e-7;
};

inline double min_eigenvalue(const DensityMatrix& rho) {
  const DensityMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline StateDiagnostics diagnose(const DensityMatrix& rho, bool with_eigenvalues = true) {
  StateDiagnostics d;
  d.trace_error = std::abs(rho.trace() - cplx(1.0));
  d.hermiticity_error = hermiticity_error(rho);
  d.min_eigenvalue =
      with_eigenvalues ? min_eigenvalue(rho) : std::numeric_limits<double>::quiet_NaN();
  return d;
}

inline bool within(const StateDiagnostics& d, const HealthTolerances& tol) {
  return d.trace_error <= tol.trace && d.hermiticity_error <= tol.hermiticity &&
         !(d.min_eigenvalue < tol.min_eigenvalue);
}

// ---------------------------------------------------------------------------
// Trajectory

enum class StatePolicy { Keep, Discard };

using SampleCallback =
    std::function<void(std::size_t index, double t, const DensityMatrix& rho)>;

struct EvolveOptions {
  StatePolicy storage = StatePolicy::Keep;
  bool min_eigenvalue = true;
  SampleCallback on_sample;
};

struct SolverInfo {
  std::string solver;
  double step = 0.0;
  int threads = 1;
  double condition_estimate = 0.0;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<DensityMatrix> states;  // empty when StatePolicy::Discard
  std::vector<StateDiagnostics> diagnostics;
  SolverInfo info;

  StateDiagnostics worst() const {
    StateDiagnostics w;
    w.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& d : diagnostics) {
      w.trace_error = std::max(w.trace_error, d.trace_error);
      w.hermiticity_error = std::max(w.hermiticity_error, d.hermiticity_error);
      if (!std::isnan(d.min_eigenvalue)) w.min_eigenvalue = std::min(w.min_eigenvalue, d.min_eigenvalue);
    }
    return w;
  }

  bool healthy(const HealthTolerances& tol = {}) const {
    return std::all_of(diagnostics.begin(), diagnostics.end(),
                       [&](const StateDiagnostics& d) { return within(d, tol); });
  }
};

namespace detail {

class Recorder {
 public:
  Recorder(const TimeGrid& grid, const EvolveOptions& opts, SolverInfo info) : opts_(opts) {
    traj_.grid = grid;
    traj_.info = std::move(info);
    traj_.diagnostics.reserve(grid.size());
    if (opts_.storage == StatePolicy::Keep) traj_.states.reserve(grid.size());
  }

  const StateDiagnostics& record(std::size_t index, const DensityMatrix& rho) {
    traj_.diagnostics.push_back(diagnose(rho, opts_.min_eigenvalue));
    if (opts_.storage == StatePolicy::Keep) traj_.states.push_back(rho);
    if (opts_.on_sample) opts_.on_sample(index, traj_.grid[index], rho);
    return traj_.diagnostics.back();
  }

  Trajectory finish() { return std::move(traj_); }

 private:
  const EvolveOptions& opts_;
  Trajectory traj_;
};

inline void check_initial(const DensityMatrix& rho0, Eigen::Index q) {
  require(rho0.rows() == q && rho0.cols() == q, ErrorKind::DimensionMismatch,
          "initial density matrix does not match the generator dimension");
}

}  // namespace detail

namespace detail {

#if SPINCHAIN_HAVE_LAPACKE
extern "C" int openblas_get_num_threads(void) __attribute__((weak));
#endif

/// Threads the dense eigen-solver may use.
inline int dense_solver_threads() {
#if SPINCHAIN_HAVE_LAPACKE
  if (openblas_get_num_threads != nullptr) return openblas_get_num_threads();
#endif
  return 1;
}

/// Right eigenpairs of a general complex matrix (columns unit 2-norm).
inline void dense_eigen(DenseMatrix a, Vector& values, DenseMatrix& vectors) {
  const Eigen::Index n = a.rows();
#if SPINCHAIN_HAVE_LAPACKE
  values.resize(n);
  vectors.resize(n, n);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', static_cast<lapack_int>(n), a.data(),
                    static_cast<lapack_int>(n), values.data(), nullptr, 1, vectors.data(),
                    static_cast<lapack_int>(n));
  require(info == 0, ErrorKind::IllConditioned,
          "zgeev failed with info = " + std::to_string(info));
#else
  Eigen::ComplexEigenSolver<DenseMatrix> es(a, /*computeEigenvectors=*/true);
  require(es.info() == Eigen::Success, ErrorKind::IllConditioned,
          "eigen-decomposition of the generator did not converge");
  values = es.eigenvalues();
  vectors = es.eigenvectors();
#endif
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectral propagation: vec rho(t) = sum_i A_i eta_i exp(lambda_i t)

struct SpectralOptions {
  int max_sites = 5;
  double condition_threshold = 1e10;
  double reconstruction_tolerance = 1e-8;
};

struct SpectralDecomposition {
  Vector eigenvalues;
  DenseMatrix eigenvectors;  // columns eta_i
  Vector coefficients;       // A_i
  double condition_estimate = 0.0;

  VectorizedState evaluate(double t) const {
    const Vector weights =
        (coefficients.array() * (eigenvalues.array() * t).exp()).matrix();
    return eigenvectors * weights;
  }
};

inline SpectralDecomposition spectral_decompose(const Liouvillian& gen,
                                                const VectorizedState& v0,
                                                const SpectralOptions& opts = {}) {
  const int n = sites_for_dimension(gen.hilbert_dim);
  require(n >= 0 && n <= opts.max_sites, ErrorKind::DimensionCap,
          "dense spectral path is capped at " + std::to_string(opts.max_sites) +
              " sites (got " + std::to_string(n) + ")");
  require(v0.size() == gen.dim(), ErrorKind::DimensionMismatch,
          "initial vector does not match the generator dimension");

  SpectralDecomposition sd;
  detail::dense_eigen(gen.dense(), sd.eigenvalues, sd.eigenvectors);

  Eigen::PartialPivLU<DenseMatrix> lu(sd.eigenvectors);
  // rcond() misreports exactly singular factors, so the pivot spread of U is
  // taken as a second lower bound on the condition number.
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double pivot_ratio = pivots.minCoeff() > 0.0 ? pivots.maxCoeff() / pivots.minCoeff()
                                                     : std::numeric_limits<double>::infinity();
  const double rcond = lu.rcond();
  sd.condition_estimate =
      std::max(pivot_ratio, rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
  if (!(sd.condition_estimate <= opts.condition_threshold)) {
    std::ostringstream msg;
    msg << "eigenvector matrix condition estimate " << sd.condition_estimate
        << " exceeds " << opts.condition_threshold;
    throw Error(ErrorKind::IllConditioned, msg.str());
  }
  sd.coefficients = lu.solve(v0);

  const double rel = (sd.eigenvectors * sd.coefficients - v0).norm() / v0.norm();
  if (!(rel <= opts.reconstruction_tolerance)) {
    std::ostringstream msg;
    msg << "spectral expansion reproduces the initial state only to " << rel;
    throw Error(ErrorKind::IllConditioned, msg.str());
  }
  return sd;
}

inline Trajectory spectral_evolve(const Liouvillian& gen, const DensityMatrix& rho0,
                                  const TimeGrid& grid, const SpectralOptions& sopts = {},
                                  const EvolveOptions& opts = {}) {
  detail::check_initial(rho0, gen.hilbert_dim);
  const SpectralDecomposition sd = spectral_decompose(gen, vectorize(rho0), sopts);

  SolverInfo info{"spectral", 0.0, detail::dense_solver_threads(), sd.condition_estimate};
  detail::Recorder rec(grid, opts, info);
  for (std::size_t i = 0; i < grid.size(); ++i) rec.record(i, devectorize(sd.evaluate(grid[i])));
  return rec.finish();
}

// ---------------------------------------------------------------------------
// Fixed-step RK4

inline constexpr double kMaxStep = 0.05;
inline constexpr double kDefaultStep = 0.01;
inline constexpr double kBreachTraceError = 1e-6;

namespace detail {

/// Reusable RK4 workspace; advance() integrates `v` over `duration` in
/// ceil(duration / step) equal sub-steps.
class Rk4 {
 public:
  Rk4(const SparseMatrix& op, double step) : op_(op), step_(step) {
    const Eigen::Index n = op.rows();
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
  }

  void advance(Vector& v, double duration) {
    if (duration <= 0.0) return;
    const auto substeps = static_cast<long>(std::ceil(duration / step_ - 1e-9));
    const double h = duration / static_cast<double>(std::max(1L, substeps));
    for (long s = 0; s < std::max(1L, substeps); ++s) single(v, h);
  }

  void single(Vector& v, double h) {
    k1_.noalias() = op_ * v;
    tmp_ = v + (0.5 * h) * k1_;
    k2_.noalias() = op_ * tmp_;
    tmp_ = v + (0.5 * h) * k2_;
    k3_.noalias() = op_ * tmp_;
    tmp_ = v + h * k3_;
    k4_.noalias() = op_ * tmp_;
    v += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

 private:
  const SparseMatrix& op_;
  double step_;
  Vector k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace detail

inline Trajectory ode_evolve(const Liouvillian& gen, const DensityMatrix& rho0,
                             const TimeGrid& grid, double step = kDefaultStep,
                             const EvolveOptions& opts = {}) {
  if (!(step > 0.0 && step <= kMaxStep)) {
    std::ostringstream msg;
    msg << "step " << step << " outside (0, " << kMaxStep << "]";
    throw Error(ErrorKind::StepTooLarge, msg.str());
  }
  detail::check_initial(rho0, gen.hilbert_dim);
  const Eigen::Index q = gen.hilbert_dim;

  detail::Recorder rec(grid, opts, SolverInfo{"stepping", step, 1, 0.0});
  detail::Rk4 rk(gen.total, step);
  VectorizedState v = vectorize(rho0);
  double t = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rk.advance(v, grid[i] - t);
    t = grid[i];
    const double trace_err = std::abs(vectorized_trace(v, q) - cplx(1.0));
    if (trace_err > kBreachTraceError) {
      std::ostringstream msg;
      msg << "trace error " << trace_err << " at T = " << t;
      throw Error(ErrorKind::DiagnosticBreach, msg.str());
    }
    rec.record(i, devectorize(v));
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// Closed-system propagation in Hilbert space

inline Trajectory unitary_evolve(const SpinOperator& h, const PureState& psi0,
                                 const TimeGrid& grid, const EvolveOptions& opts = {}) {
  require(h.rows() == h.cols() && h.rows() == psi0.size(), ErrorKind::DimensionMismatch,
          "state and Hamiltonian dimensions differ");
  require(std::abs(psi0.norm() - 1.0) <= 1e-12, ErrorKind::InvalidArgument,
          "initial state must have unit norm");

  Eigen::SelfAdjointEigenSolver<DenseMatrix> es{DenseMatrix(h)};
  const DenseMatrix& basis = es.eigenvectors();
  const Eigen::VectorXd& energies = es.eigenvalues();
  const Vector amplitudes = basis.adjoint() * psi0;

  detail::Recorder rec(grid, opts, SolverInfo{"unitary", 0.0, 1, 0.0});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t == 0.0) {
      rec.record(i, psi0 * psi0.adjoint());
      continue;
    }
    Vector phased(amplitudes.size());
    for (Eigen::Index a = 0; a < amplitudes.size(); ++a)
      phased(a) = amplitudes(a) * std::exp(cplx(0.0, -energies(a) * t));
    const Vector psi = basis * phased;
    rec.record(i, psi * psi.adjoint());
  }
  return rec.finish();
}

// ---------------------------------------------------------------------------
// Steady state

struct SteadyStateOptions {
  double null_tolerance = 1e-9;  // |lambda| bound for a null eigenvalue
  int block_size = 4;
  int max_iterations = 50;
  double shift = 1e-10;
};

struct NullSpaceReport {
  std::vector<cplx> eigenvalues;        // Ritz values nearest zero, ascending |lambda|
  int null_dimension = 0;               // lower bound when == block size
  std::vector<DensityMatrix> null_states;
  double residual = 0.0;                // ||L y|| of the leading null vector
};

class NonUniqueSteadyState : public Error {
 public:
  explicit NonUniqueSteadyState(NullSpaceReport report)
      : Error(ErrorKind::NonUnique,
              "steady space has dimension " + std::to_string(report.null_dimension)),
        report_(std::move(report)) {}
  const NullSpaceReport& report() const { return report_; }

 private:
  NullSpaceReport report_;
};

namespace detail {

inline DenseMatrix orthonormalize(const DenseMatrix& x) {
  Eigen::HouseholderQR<DenseMatrix> qr(x);
  return qr.householderQ() * DenseMatrix::Identity(x.rows(), x.cols());
}

/// Normalize a devectorized null vector into a density matrix (phase fixed
/// by the trace). Returns false if the trace vanishes.
inline bool to_physical(const VectorizedState& y, DensityMatrix& rho) {
  DensityMatrix m = devectorize(y);
  const cplx tr = m.trace();
  if (std::abs(tr) <= 1e-8 * std::max(1.0, max_abs(m))) return false;
  m /= tr;
  rho = 0.5 * (m + m.adjoint());
  rho /= rho.trace().real();
  return true;
}

}  // namespace detail

/// Shift-and-invert block iteration for the eigenvalues of the generator
/// closest to zero, followed by a Rayleigh-Ritz projection.
inline NullSpaceReport analyze_null_space(const Liouvillian& gen,
                                          const SteadyStateOptions& opts = {}) {
  require(gen.dissipative(), ErrorKind::InvalidArgument,
          "steady-state analysis requires a dissipative generator (Gamma > 0)");
  const Eigen::Index n = gen.dim();
  const Eigen::Index q = gen.hilbert_dim;
  const int block = static_cast<int>(std::min<Eigen::Index>(opts.block_size, n));

  using ColMajor = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
  ColMajor shifted = gen.total;
  ColMajor id(n, n);
  id.setIdentity();
  shifted -= opts.shift * id;
  shifted.makeCompressed();

  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  require(lu.info() == Eigen::Success, ErrorKind::NoNullVector,
          "factorization of the shifted generator failed: " + lu.lastErrorMessage());

  // Deterministic start block: trace functional plus fixed diagonal profiles.
  DenseMatrix x = DenseMatrix::Zero(n, block);
  x.col(0) = trace_functional(q);
  for (int c = 1; c < block; ++c)
    for (Eigen::Index j = 0; j < q; ++j)
      x(j * q + j, c) = std::cos(static_cast<double>(c * (j + 1)));
  for (int c = 1; c < block; ++c) x(std::min<Eigen::Index>(n - 1, c), c) += 1.0;
  x = detail::orthonormalize(x);

  NullSpaceReport report;
  Eigen::ComplexEigenSolver<DenseMatrix> ritz;
  DenseMatrix y;
  std::vector<int> order(static_cast<std::size_t>(block));
  double prev_leading = std::numeric_limits<double>::infinity();

  for (int it = 0; it < opts.max_iterations; ++it) {
    DenseMatrix z(n, block);
    for (int c = 0; c < block; ++c) z.col(c) = lu.solve(Vector(x.col(c)));
    x = detail::orthonormalize(z);

    const DenseMatrix lx = gen.total * x;
    const DenseMatrix m = x.adjoint() * lx;
    ritz.compute(m, true);
    for (int c = 0; c < block; ++c) order[static_cast<std::size_t>(c)] = c;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(ritz.eigenvalues()(a)) < std::abs(ritz.eigenvalues()(b));
    });
    y = x * ritz.eigenvectors();
    const Vector lead = y.col(order[0]).normalized();
    const double residual = (gen.total * lead).norm();
    report.residual = residual;
    const double leading = std::abs(ritz.eigenvalues()(order[0]));
    if (residual <= 0.1 * opts.null_tolerance && it > 0 &&
        std::abs(leading - prev_leading) <= 0.1 * opts.null_tolerance)
      break;
    prev_leading = leading;
  }

  report.eigenvalues.clear();
  for (int c : order) {
    const cplx lambda = ritz.eigenvalues()(c);
    report.eigenvalues.push_back(lambda);
    if (std::abs(lambda) > opts.null_tolerance) continue;
    ++report.null_dimension;
    const Vector col = y.col(c).normalized();
    DensityMatrix rho;
    if (detail::to_physical(col, rho)) {
      report.null_states.push_back(rho);
    } else {
      DensityMatrix raw = devectorize(col);
      report.null_states.push_back(raw / std::max(1e-300, max_abs(raw)));
    }
  }
  return report;
}

inline DensityMatrix steady_state(const Liouvillian& gen, const SteadyStateOptions& opts = {}) {
  NullSpaceReport report = analyze_null_space(gen, opts);
  if (report.null_dimension == 0) {
    std::ostringstream msg;
    msg << "no eigenvalue within " << opts.null_tolerance << " of zero (closest |lambda| = "
        << (report.eigenvalues.empty() ? 0.0 : std::abs(report.eigenvalues.front())) << ")";
    throw Error(ErrorKind::NoNullVector, msg.str());
  }
  if (report.null_dimension > 1) throw NonUniqueSteadyState(std::move(report));
  const DensityMatrix& rho = report.null_states.front();
  require(std::abs(rho.trace() - cplx(1.0)) <= 1e-9, ErrorKind::NoNullVector,
          "null vector has vanishing trace");
  return rho;
}

}  // namespace spinchain

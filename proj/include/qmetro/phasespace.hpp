// Copyright 2026 The qmetro Authors
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

// Gaussian moment transport for quadratic Hamiltonians. Quadratures are
// ordered (X1, P1, ..., Xn, Pn); cov holds the symmetrized second moments,
// so the vacuum covariance is the identity.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qmetro/error.hpp"
#include "qmetro/fockspace.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/types.hpp"

namespace qmetro {

inline Index x_index(Index site) { return 2 * site; }
inline Index p_index(Index site) { return 2 * site + 1; }

template <typename Real>
RMatrix<Real> symplectic_form(Index modes) {
  RMatrix<Real> omega = RMatrix<Real>::Zero(2 * modes, 2 * modes);
  for (Index j = 0; j < modes; ++j) {
    omega(2 * j, 2 * j + 1) = 1;
    omega(2 * j + 1, 2 * j) = -1;
  }
  return omega;
}

template <typename Real = double>
class GaussianState {
 public:
  GaussianState(RVector<Real> mean, RMatrix<Real> cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0 || mean_.size() % 2 != 0) throw InvalidDimension("GaussianState: mean length must be 2n");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
      throw InvalidDimension("GaussianState: covariance must be 2n x 2n");
    }
    const Real scale = std::max(Real(1), cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > Real(1e-12) * scale) {
      throw InvalidArgument("GaussianState: covariance is not symmetric");
    }
    cov_ = (cov_ + cov_.transpose()) / Real(2);
    if (uncertainty_margin() < Real(-1e-10) * scale) {
      throw InvalidArgument("GaussianState: covariance violates the uncertainty relation");
    }
  }

  static GaussianState vacuum(Index modes) {
    if (modes < 1) throw InvalidDimension("GaussianState::vacuum: need at least one mode");
    return GaussianState(RVector<Real>::Zero(2 * modes), RMatrix<Real>::Identity(2 * modes, 2 * modes));
  }

  /// Product of single-mode states: squeezed vacua with the given Var X, or
  /// displaced versions thereof.
  static GaussianState product(std::span<const OscillatorState<Real>> sites) {
    if (sites.empty()) throw InvalidDimension("GaussianState::product: need at least one mode");
    const Index n = Index(sites.size());
    RVector<Real> mean = RVector<Real>::Zero(2 * n);
    RMatrix<Real> cov = RMatrix<Real>::Zero(2 * n, 2 * n);
    for (Index j = 0; j < n; ++j) {
      const auto& s = sites[std::size_t(j)];
      if (s.kind == OscillatorState<Real>::Kind::fock && s.level != 0) {
        throw UnsupportedState("GaussianState::product: Fock states are not Gaussian");
      }
      const Real vx = s.x_variance();
      cov(2 * j, 2 * j) = vx;
      cov(2 * j + 1, 2 * j + 1) = Real(1) / vx;
      mean(2 * j) = Real(2) * s.alpha.real();
      mean(2 * j + 1) = Real(2) * s.alpha.imag();
    }
    return GaussianState(std::move(mean), std::move(cov));
  }

  /// Product of undisplaced minimum-uncertainty states with Var X_j = var_x[j].
  static GaussianState squeezed_product(std::span<const Real> var_x) {
    if (var_x.empty()) throw InvalidDimension("GaussianState::squeezed_product: need at least one mode");
    const Index n = Index(var_x.size());
    RMatrix<Real> cov = RMatrix<Real>::Zero(2 * n, 2 * n);
    for (Index j = 0; j < n; ++j) {
      if (!(var_x[std::size_t(j)] > 0)) throw InvalidArgument("squeezed_product: Var X must be > 0");
      cov(2 * j, 2 * j) = var_x[std::size_t(j)];
      cov(2 * j + 1, 2 * j + 1) = Real(1) / var_x[std::size_t(j)];
    }
    return GaussianState(RVector<Real>::Zero(2 * n), std::move(cov));
  }

  Index modes() const { return mean_.size() / 2; }
  const RVector<Real>& mean() const { return mean_; }
  const RMatrix<Real>& cov() const { return cov_; }

  /// Smallest eigenvalue of cov + i Omega.
  Real uncertainty_margin() const {
    const Index d = cov_.rows();
    CMatrix<Real> m = cov_.template cast<Complex<Real>>();
    m += kI<Real> * symplectic_form<Real>(d / 2).template cast<Complex<Real>>();
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  RVector<Real> mean_;
  RMatrix<Real> cov_;
};

/// Symplectic eigenvalues (ascending, one per mode). All equal 1 iff pure.
template <typename Real>
RVector<Real> symplectic_eigenvalues(const RMatrix<Real>& cov) {
  const Index d = cov.rows();
  Eigen::LLT<RMatrix<Real>> llt(cov);
  if (llt.info() != Eigen::Success) throw SolverError("symplectic_eigenvalues: covariance is not positive definite");
  const RMatrix<Real> L = llt.matrixL();
  const RMatrix<Real> k = L.transpose() * symplectic_form<Real>(d / 2) * L;
  const CMatrix<Real> herm = kI<Real> * k.template cast<Complex<Real>>();
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(herm, Eigen::EigenvaluesOnly);
  // eigenvalues come in +-nu pairs; the upper half holds the nu's
  return es.eigenvalues().tail(d / 2);
}

template <typename Real>
bool is_pure(const GaussianState<Real>& s, Real tol = Real(1e-8)) {
  const RVector<Real> nu = symplectic_eigenvalues(s.cov());
  return (nu.array() - Real(1)).abs().maxCoeff() <= tol;
}

template <typename Real = double>
struct LinearDynamics {
  RMatrix<Real> drift;  // d<R>/dt = drift <R> + f drive
  RVector<Real> drive;

  Index size() const { return drive.size(); }
};

/// H = -f X1 + g sum_j P_j X_{j+1} with [X, P] = 2i:
/// dX_j/dt = 2g X_{j+1}, dP_j/dt = -2g P_{j-1} + 2f delta_{j1}.
template <typename Real>
LinearDynamics<Real> chain_linear_dynamics(int n, Real g) {
  if (n < 1) throw InvalidArgument("chain_linear_dynamics: n must be >= 1");
  if (!std::isfinite(g)) throw InvalidArgument("chain_linear_dynamics: g must be finite");
  LinearDynamics<Real> dyn{RMatrix<Real>::Zero(2 * n, 2 * n), RVector<Real>::Zero(2 * n)};
  for (Index j = 0; j + 1 < n; ++j) {
    dyn.drift(x_index(j), x_index(j + 1)) = Real(2) * g;
    dyn.drift(p_index(j + 1), p_index(j)) = Real(-2) * g;
  }
  dyn.drive(p_index(0)) = 2;
  return dyn;
}

namespace detail {

/// sum_k c_k (M t)^k applied to a block, with c_k = 1/(k + shift)!, sign^k.
/// Terminates on an exactly vanishing term (nilpotent M) or when the term
/// drops below rounding of the sum.
template <typename Real, typename Block>
Block drift_series(const RMatrix<Real>& M, const Block& x, Real t, int shift, Real sign) {
  const Eigen::SparseMatrix<Real> Ms = M.sparseView();
  Block term = x;
  for (int k = 1; k <= shift; ++k) term *= t / Real(k);
  Block sum = term;
  const int cap = int(4 * M.rows() + 200);
  for (int k = 1; k <= cap; ++k) {
    term = (Ms * term).eval();
    term *= sign * t / Real(k + shift);
    const Real tn = term.cwiseAbs().maxCoeff();
    if (tn == 0) return sum;
    sum += term;
    if (tn <= std::numeric_limits<Real>::epsilon() * Real(1e-3) * sum.cwiseAbs().maxCoeff()) return sum;
  }
  throw SolverError("drift_series: exponential series did not terminate");
}

}  // namespace detail

/// e^{M t} as a finite polynomial when M is nilpotent.
template <typename Real>
RMatrix<Real> drift_exponential(const RMatrix<Real>& M, Real t) {
  return detail::drift_series<Real>(M, RMatrix<Real>(RMatrix<Real>::Identity(M.rows(), M.cols())), t, 0, Real(1));
}

/// M^k == 0 for the given k.
template <typename Real>
bool is_nilpotent(const RMatrix<Real>& M, Index k) {
  RMatrix<Real> p = RMatrix<Real>::Identity(M.rows(), M.cols());
  for (Index i = 0; i < k; ++i) p = p * M;
  return p.cwiseAbs().maxCoeff() == 0;
}

template <typename Real>
GaussianState<Real> evolve_moments(const GaussianState<Real>& state, const LinearDynamics<Real>& dyn, Real f, Real T) {
  const Index d = state.mean().size();
  if (dyn.drift.rows() != d || dyn.drift.cols() != d || dyn.drive.size() != d) {
    throw InvalidDimension("evolve_moments: dynamics and state sizes differ");
  }
  const RMatrix<Real> S = drift_exponential(dyn.drift, T);
  RVector<Real> mean = S * state.mean();
  if (f != 0) mean += f * detail::drift_series<Real>(dyn.drift, dyn.drive, T, 1, Real(1));
  RMatrix<Real> cov = S * state.cov() * S.transpose();
  cov = (cov + cov.transpose()) / Real(2);
  return GaussianState<Real>(std::move(mean), std::move(cov));
}

/// F = d^T cov(T)^{-1} d with d = d mean(T)/df. Evaluated in the initial
/// frame, d0 = e^{-MT} d, against cov(0); cov(T) grows like e^{2|M|T} and its
/// direct inverse loses digits. The direct value is kept as a diagnostic.
template <typename Real>
QfiEstimate<Real> gaussian_qfi(const LinearDynamics<Real>& dyn, const GaussianState<Real>& state0, Real T,
                               std::string model_id = {}) {
  const Index d = state0.mean().size();
  if (dyn.drift.rows() != d || dyn.drive.size() != d) throw InvalidDimension("gaussian_qfi: size mismatch");
  if (!std::isfinite(T) || T < 0) throw InvalidArgument("gaussian_qfi: T must be finite and >= 0");
  const RVector<Real> nu = symplectic_eigenvalues(state0.cov());
  const Real impurity = (nu.array() - Real(1)).abs().maxCoeff();
  if (impurity > Real(1e-8)) {
    throw UnsupportedState("gaussian_qfi: input state is mixed (symplectic eigenvalue deviation " +
                           std::to_string(double(impurity)) + ")");
  }
  QfiEstimate<Real> est;
  est.method = QfiMethod::gaussian;
  est.model_id = std::move(model_id);
  est.T = T;
  if (T == 0) return est;

  const RVector<Real> d0 = detail::drift_series<Real>(dyn.drift, dyn.drive, T, 1, Real(-1));
  Eigen::LLT<RMatrix<Real>> llt0(state0.cov());
  if (llt0.info() != Eigen::Success) throw SolverError("gaussian_qfi: initial covariance is singular");
  est.value = d0.dot(llt0.solve(d0));

  Real direct = std::numeric_limits<Real>::quiet_NaN();
  const RVector<Real> dT = detail::drift_series<Real>(dyn.drift, dyn.drive, T, 1, Real(1));
  const RMatrix<Real> S = drift_exponential(dyn.drift, T);
  const RMatrix<Real> covT = S * state0.cov() * S.transpose();
  Eigen::LDLT<RMatrix<Real>> ldlt(covT);
  if (ldlt.info() == Eigen::Success) direct = dT.dot(ldlt.solve(dT));
  est.diagnostics = {{"direct_value", direct}, {"purity_deviation", impurity}};
  return est;
}

}  // namespace qmetro

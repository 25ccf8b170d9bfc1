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

// Time evolution under time-independent Hamiltonians and the estimation
// generator h = i (dU/df) U^dag, U = exp(-i H_f T), in three independent
// constructions:
//
//   series      sum_j (-i)^j T^{j+1}/(j+1)! ad_H^j(dH)
//   integral    int_0^T exp(-iHt) dH exp(iHt) dt   (composite Simpson)
//   propagator  central difference of U(f), Richardson-extrapolated
//
// h acts on the evolved state: F_Q = 4 Var(h) on U|psi0>.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmetro/error.hpp"
#include "qmetro/fockspace.hpp"
#include "qmetro/numerics.hpp"
#include "qmetro/types.hpp"

namespace qmetro {

/// Cached eigendecomposition H = V diag(lambda) V^dag.
template <typename Real>
class HermitianSpectrum {
 public:
  explicit HermitianSpectrum(const Operator<Real>& h) : layout_(h.layout()) {
    if (!h.is_hermitian()) throw DomainError("HermitianSpectrum: Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(h.matrix());
    if (es.info() != Eigen::Success) throw SolverError("HermitianSpectrum: eigensolver failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  const SpaceLayout& layout() const noexcept { return layout_; }
  const RVector<Real>& eigenvalues() const noexcept { return values_; }
  const CMatrix<Real>& eigenvectors() const noexcept { return vectors_; }

  /// exp(-i lambda t) per eigenvalue.
  CVector<Real> phases(Real t) const {
    CVector<Real> p(values_.size());
    for (Index k = 0; k < values_.size(); ++k) p(k) = std::polar(Real(1), -values_(k) * t);
    return p;
  }

  /// exp(-i H t)
  CMatrix<Real> propagator(Real t) const {
    return vectors_ * phases(t).asDiagonal() * vectors_.adjoint();
  }

  CVector<Real> apply(const CVector<Real>& psi, Real t) const {
    return vectors_ * (phases(t).cwiseProduct(vectors_.adjoint() * psi));
  }

  StateVector<Real> evolve(const StateVector<Real>& psi, Real t) const {
    require_same_layout(layout_, psi.layout(), "evolve");
    if (!std::isfinite(t)) throw InvalidArgument("evolve: time must be finite");
    return StateVector<Real>(layout_, apply(psi.amplitudes(), t));
  }

 private:
  SpaceLayout layout_;
  RVector<Real> values_;
  CMatrix<Real> vectors_;
};

/// exp(-i H T) |psi>
template <typename Real>
StateVector<Real> evolve(const Operator<Real>& H, const StateVector<Real>& psi, Real T) {
  require_same_layout(H.layout(), psi.layout(), "evolve");
  if (T == 0) return psi;
  return HermitianSpectrum<Real>(H).evolve(psi, T);
}

/// exp(-i H T) psi for a sparse Hermitian H, by Taylor steps with ||H dt||_1 <= 1.
/// For spaces too large for a dense eigendecomposition.
template <typename Real>
CVector<Real> evolve_taylor(const SparseCMatrix<Real>& H, const CVector<Real>& psi, Real T, Real tol = Real(1e-15)) {
  if (H.rows() != H.cols() || H.rows() != psi.size()) throw InvalidDimension("evolve_taylor: size mismatch");
  if (!std::isfinite(T)) throw InvalidArgument("evolve_taylor: T must be finite");
  if (T == 0) return psi;
  Real norm1 = 0;
  for (Eigen::Index c = 0; c < H.outerSize(); ++c) {
    Real col = 0;
    for (typename SparseCMatrix<Real>::InnerIterator it(H, c); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  const long steps = std::max(1L, static_cast<long>(std::ceil(norm1 * std::abs(T))));
  const Real dt = T / Real(steps);
  CVector<Real> out = psi;
  for (long s = 0; s < steps; ++s) {
    CVector<Real> term = out;
    int k = 1;
    for (; k <= 60; ++k) {
      term = (H * term) * Complex<Real>(0, -dt / Real(k));
      out += term;
      if (term.norm() <= tol * out.norm()) break;
    }
    if (k > 60) throw SolverError("evolve_taylor: Taylor series did not converge");
  }
  return out;
}

enum class GeneratorMethod { series, integral, propagator_derivative };

inline const char* to_string(GeneratorMethod m) {
  switch (m) {
    case GeneratorMethod::series: return "series";
    case GeneratorMethod::integral: return "integral";
    case GeneratorMethod::propagator_derivative: return "propagator-derivative";
  }
  return "unknown";
}

template <typename Real>
struct GeneratorResult {
  Operator<Real> h_op;
  GeneratorMethod method = GeneratorMethod::series;
  Real T = 0;
  int terms_used = 0;        // series
  Real last_term_norm = 0;   // series: norm of the first term left out
  bool truncated = false;    // series hit max_terms before converging
  Index quadrature_points = 0;  // integral
  Real antihermitian_residual = 0;  // Frobenius norm of (M - M^dag)/2 before symmetrization
};

namespace detail {

template <typename Real>
Operator<Real> symmetrize(const SpaceLayout& layout, const CMatrix<Real>& m, Real& residual) {
  residual = (Real(0.5) * (m - m.adjoint())).norm();
  return Operator<Real>(layout, Real(0.5) * (m + m.adjoint()));
}

template <typename Real>
void require_hermitian_pair(const Operator<Real>& H, const Operator<Real>& dH, const char* where) {
  require_same_layout(H.layout(), dH.layout(), where);
  if (!H.is_hermitian()) throw DomainError(std::string(where) + ": H is not Hermitian");
  if (!dH.is_hermitian()) throw DomainError(std::string(where) + ": dH is not Hermitian");
}

}  // namespace detail

template <typename Real>
struct SeriesOptions {
  Real rel_tol = Real(1e-12);  // relative to the partial sum
  Real abs_tol = Real(1e-14);
  int max_terms = 64;
  /// Basis indices on which term norms are measured; empty means the whole
  /// space. Use buffered_indices() to keep the truncation edge out of the
  /// stopping rule.
  std::vector<Index> check_subspace;
};

/// Nested-commutator series for h. Stops at the first term whose Frobenius
/// norm (an upper bound on its operator norm) on the check subspace falls
/// below rel_tol * ||partial sum|| + abs_tol.
template <typename Real>
GeneratorResult<Real> generator_series(const Operator<Real>& H, const Operator<Real>& dH, Real T,
                                       const SeriesOptions<Real>& opt = {}) {
  detail::require_hermitian_pair(H, dH, "generator_series");
  if (!(opt.abs_tol > 0) || opt.rel_tol < 0) throw InvalidArgument("generator_series: tolerances must be > 0");
  if (opt.max_terms < 1) throw InvalidArgument("generator_series: max_terms must be >= 1");

  const std::span<const Index> core(opt.check_subspace);
  auto measure = [&](const CMatrix<Real>& m) -> Real { return core.empty() ? m.norm() : restrict_to(m, core).norm(); };

  CMatrix<Real> term = T * dH.matrix();
  CMatrix<Real> sum = term;
  GeneratorResult<Real> out{Operator<Real>::zero(H.layout()), GeneratorMethod::series, T};
  out.terms_used = 1;
  const Complex<Real> minus_i(0, -1);
  for (int j = 1;; ++j) {
    term = (minus_i * T / Real(j + 1)) * (H.matrix() * term - term * H.matrix());
    const Real norm = measure(term);
    out.last_term_norm = norm;
    if (norm <= opt.rel_tol * measure(sum) + opt.abs_tol) break;
    if (out.terms_used == opt.max_terms) {
      out.truncated = true;
      break;
    }
    sum += term;
    ++out.terms_used;
  }
  out.h_op = detail::symmetrize(H.layout(), sum, out.antihermitian_residual);
  return out;
}

template <typename Real>
struct IntegralOptions {
  Index steps = 200;            // Simpson intervals (rounded up to even)
  Real refine_tol = Real(1e-9);  // relative change allowed when doubling
  Index max_steps = Index(1) << 24;
};

namespace detail {

/// e^{-i x} - 1 without cancellation.
template <typename Real>
Complex<Real> expm1_neg_i(Real x) {
  const Real s = std::sin(x / 2);
  return {Real(-2) * s * s, -std::sin(x)};
}

/// Composite Simpson sum of exp(-i omega t) over [0, T] with N (even) intervals,
/// evaluated through closed-form geometric sums.
template <typename Real>
Complex<Real> simpson_phase_sum(Real omega, Real T, Index N) {
  const Real h = T / Real(N);
  const Real theta = omega * h;
  if (theta == 0) return Complex<Real>(T);
  const Complex<Real> z = std::polar(Real(1), -theta);
  const Complex<Real> zN = std::polar(Real(1), -theta * Real(N));
  const Complex<Real> d1 = expm1_neg_i(theta);
  const Complex<Real> d2 = expm1_neg_i(Real(2) * theta);
  if (std::abs(theta) > Real(0.5) && (std::abs(d1) < Real(1e-9) || std::abs(d2) < Real(1e-9))) {
    // theta at a multiple of pi: sum directly.
    Complex<Real> acc = Complex<Real>(1) + zN;
    for (Index k = 1; k < N; ++k) acc += Real(k % 2 ? 4 : 2) * std::polar(Real(1), -theta * Real(k));
    return acc * (h / Real(3));
  }
  const Complex<Real> all = expm1_neg_i(theta * Real(N + 1)) / d1;      // sum_{k=0}^{N}
  const Complex<Real> odd = z * (expm1_neg_i(theta * Real(N)) / d2);   // sum over odd k
  return (Real(2) * all + Real(2) * odd - Real(1) - zN) * (h / Real(3));
}

template <typename Real>
CMatrix<Real> simpson_eigenbasis(const RVector<Real>& lambda, const CMatrix<Real>& d_eig, Real T, Index N) {
  const Index n = lambda.size();
  CMatrix<Real> out(n, n);
  for (Index b = 0; b < n; ++b) {
    for (Index a = 0; a < n; ++a) out(a, b) = d_eig(a, b) * simpson_phase_sum(lambda(a) - lambda(b), T, N);
  }
  return out;
}

}  // namespace detail

/// Quadrature of the Heisenberg-rotated dH, with exp(+-iHt) evaluated exactly
/// at each node through the spectrum of H. Steps double until the result
/// changes by less than refine_tol relative.
template <typename Real>
GeneratorResult<Real> generator_integral(const HermitianSpectrum<Real>& spectrum, const Operator<Real>& dH, Real T,
                                         const IntegralOptions<Real>& opt = {}) {
  require_same_layout(spectrum.layout(), dH.layout(), "generator_integral");
  if (!dH.is_hermitian()) throw DomainError("generator_integral: dH is not Hermitian");
  if (opt.steps < 8) throw InvalidArgument("generator_integral: steps must be >= 8");
  GeneratorResult<Real> out{Operator<Real>::zero(dH.layout()), GeneratorMethod::integral, T};
  Index N = opt.steps + (opt.steps % 2);
  if (T == 0) {
    out.quadrature_points = N + 1;
    return out;
  }
  const CMatrix<Real>& V = spectrum.eigenvectors();
  const CMatrix<Real> d_eig = V.adjoint() * dH.matrix() * V;
  CMatrix<Real> coarse = detail::simpson_eigenbasis(spectrum.eigenvalues(), d_eig, T, N);
  for (;;) {
    if (2 * N > opt.max_steps) break;
    CMatrix<Real> fine = detail::simpson_eigenbasis(spectrum.eigenvalues(), d_eig, T, 2 * N);
    const Real change = (fine - coarse).norm();
    N *= 2;
    coarse = std::move(fine);
    if (change <= opt.refine_tol * std::max(Real(1), coarse.norm())) break;
  }
  out.quadrature_points = N + 1;
  const CMatrix<Real> m = V * coarse * V.adjoint();
  out.h_op = detail::symmetrize(dH.layout(), m, out.antihermitian_residual);
  return out;
}

template <typename Real>
GeneratorResult<Real> generator_integral(const Operator<Real>& H, const Operator<Real>& dH, Real T,
                                         const IntegralOptions<Real>& opt = {}) {
  detail::require_hermitian_pair(H, dH, "generator_integral");
  return generator_integral(HermitianSpectrum<Real>(H), dH, T, opt);
}

template <typename Real>
struct PropagatorOptions {
  Real delta = Real(1e-4);
  Real max_residual = Real(1e-4);  // anti-Hermitian residual, relative to ||h||_F
};

/// h = i (dU/df) U^dag with dU/df from central differences at delta and
/// delta/2 combined by one Richardson step.
template <typename Real>
GeneratorResult<Real> generator_from_propagator(const std::function<Operator<Real>(Real)>& H_of_f, Real f, Real T,
                                                const PropagatorOptions<Real>& opt = {}) {
  if (!(opt.delta > 0)) throw InvalidArgument("generator_from_propagator: delta must be > 0");
  auto U = [&](Real x) { return HermitianSpectrum<Real>(H_of_f(x)).propagator(T); };
  const Operator<Real> H0 = H_of_f(f);
  const CMatrix<Real> u0 = HermitianSpectrum<Real>(H0).propagator(T);
  const Real d = opt.delta;
  const CMatrix<Real> wide = (U(f + d) - U(f - d)) / (Real(2) * d);
  const CMatrix<Real> narrow = (U(f + d / 2) - U(f - d / 2)) / d;
  const CMatrix<Real> du = (Real(4) * narrow - wide) / Real(3);
  const CMatrix<Real> m = kI<Real> * du * u0.adjoint();
  GeneratorResult<Real> out{Operator<Real>::zero(H0.layout()), GeneratorMethod::propagator_derivative, T};
  out.h_op = detail::symmetrize(H0.layout(), m, out.antihermitian_residual);
  const Real scale = std::max(Real(1), out.h_op.matrix().norm());
  if (out.antihermitian_residual > opt.max_residual * scale) {
    throw StepSizeError("generator_from_propagator: anti-Hermitian residual " +
                        std::to_string(double(out.antihermitian_residual / scale)) +
                        " too large; try a different delta");
  }
  return out;
}

/// Operator-norm defect of
///   exp(-i(g sz P - f X)T) = exp(-i g sz P T) exp(i f X T) exp(i g sz f T^2)
/// on a qubit + oscillator(dim), restricted on both sides to Fock levels
/// below dim - buffer.
template <typename Real>
Real check_ramsey_factorization(Real g, Real f, Real T, Index dim, Index buffer = -1) {
  if (buffer < 0) buffer = boundary_buffer(dim);
  if (buffer >= dim) throw InvalidArgument("check_ramsey_factorization: buffer swallows the space");
  const SpaceLayout layout = SpaceLayout::make(1, {dim});
  const auto q = quadratures<Real>(dim);
  const auto szP = kron(pauli_z<Real>(), q.P);
  const auto X = embed(q.X, 1, layout);
  const auto sz = embed(pauli_z<Real>(), 0, layout);
  const Index n = layout.total_dim();

  const CMatrix<Real> lhs = HermitianSpectrum<Real>(g * szP - f * X).propagator(T);
  const CMatrix<Real> id = CMatrix<Real>::Identity(n, n);
  const CMatrix<Real> a = g == 0 ? id : HermitianSpectrum<Real>(g * szP).propagator(T);
  const CMatrix<Real> b = f == 0 ? id : HermitianSpectrum<Real>(-f * X).propagator(T);
  CMatrix<Real> c = id;
  if (g != 0 && f != 0) {
    for (Index k = 0; k < n; ++k) c(k, k) = std::polar(Real(1), g * f * T * T * sz.matrix()(k, k).real());
  }
  const CMatrix<Real> rhs = a * b * c;
  const std::vector<Index> limits{dim - buffer - 1};
  const auto idx = low_level_indices(layout, limits);
  return operator_norm(restrict_to((lhs - rhs).eval(), idx));
}

}  // namespace qmetro

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

// Truncated Fock-space algebra for composite qubit/oscillator systems.
//
// Conventions: X = a + a^dag, P = i(a^dag - a), so [X, P] = 2i and the vacuum
// has Var(X) = Var(P) = 1. Qubit basis is ordered (|g>, |e>) with
// sigma_z = diag(-1, +1). Composite spaces list qubits first, then
// oscillators; basis index is row-major in that order.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmetro/error.hpp"
#include "qmetro/types.hpp"

namespace qmetro {

enum class SubsystemKind { qubit, oscillator };

struct Subsystem {
  SubsystemKind kind = SubsystemKind::oscillator;
  Index dim = 2;

  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

class SpaceLayout {
 public:
  /// Scalar space (no subsystems, total dimension 1).
  SpaceLayout() = default;

  explicit SpaceLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
    bool seen_oscillator = false;
    for (const auto& s : subsystems_) {
      if (s.kind == SubsystemKind::qubit) {
        if (s.dim != 2) throw InvalidDimension("qubit subsystem must have dim 2");
        if (seen_oscillator) throw InvalidArgument("layout must list qubits before oscillators");
      } else {
        if (s.dim < 2) throw InvalidDimension("oscillator dim must be >= 2");
        seen_oscillator = true;
      }
      total_ *= s.dim;
    }
  }

  static SpaceLayout qubit() { return SpaceLayout({{SubsystemKind::qubit, 2}}); }
  static SpaceLayout oscillator(Index dim) { return SpaceLayout({{SubsystemKind::oscillator, dim}}); }

  /// `qubits` qubits followed by one oscillator per entry of `oscillator_dims`.
  static SpaceLayout make(Index qubits, std::span<const Index> oscillator_dims) {
    std::vector<Subsystem> subs;
    for (Index q = 0; q < qubits; ++q) subs.push_back({SubsystemKind::qubit, 2});
    for (Index d : oscillator_dims) subs.push_back({SubsystemKind::oscillator, d});
    return SpaceLayout(std::move(subs));
  }
  static SpaceLayout make(Index qubits, std::initializer_list<Index> oscillator_dims) {
    return make(qubits, std::span<const Index>(oscillator_dims.begin(), oscillator_dims.size()));
  }

  Index size() const noexcept { return static_cast<Index>(subsystems_.size()); }
  Index total_dim() const noexcept { return total_; }
  std::span<const Subsystem> subsystems() const noexcept { return subsystems_; }

  const Subsystem& at(Index site) const {
    if (site < 0 || site >= size()) throw InvalidArgument("site index out of range");
    return subsystems_[static_cast<std::size_t>(site)];
  }
  Index dim(Index site) const { return at(site).dim; }
  SubsystemKind kind(Index site) const { return at(site).kind; }

  /// Number of basis states spanned by the sites after `site`.
  Index stride(Index site) const {
    Index s = 1;
    for (Index k = site + 1; k < size(); ++k) s *= subsystems_[static_cast<std::size_t>(k)].dim;
    return s;
  }

  /// Local level of `site` in composite basis state `basis`.
  Index level(Index basis, Index site) const { return (basis / stride(site)) % dim(site); }

  std::string describe() const {
    std::ostringstream os;
    os << '[';
    for (Index k = 0; k < size(); ++k) {
      const auto& s = subsystems_[static_cast<std::size_t>(k)];
      if (k) os << ", ";
      if (s.kind == SubsystemKind::qubit) {
        os << "qubit";
      } else {
        os << "osc(" << s.dim << ')';
      }
    }
    os << ']';
    return os.str();
  }

  friend bool operator==(const SpaceLayout& a, const SpaceLayout& b) {
    return a.subsystems_ == b.subsystems_;
  }

 private:
  std::vector<Subsystem> subsystems_;
  Index total_ = 1;
};

inline SpaceLayout concat(const SpaceLayout& a, const SpaceLayout& b) {
  std::vector<Subsystem> subs(a.subsystems().begin(), a.subsystems().end());
  subs.insert(subs.end(), b.subsystems().begin(), b.subsystems().end());
  return SpaceLayout(std::move(subs));
}

inline void require_same_layout(const SpaceLayout& a, const SpaceLayout& b, const char* where) {
  if (!(a == b)) {
    throw LayoutMismatch(std::string(where) + ": layout " + a.describe() + " vs " + b.describe());
  }
}

template <typename Real>
class Operator {
 public:
  using Scalar = Complex<Real>;
  using Matrix = CMatrix<Real>;

  static constexpr Real kHermitianTol = Real(1e-12);

  Operator(SpaceLayout layout, Matrix matrix) : layout_(std::move(layout)), m_(std::move(matrix)) {
    if (m_.rows() != layout_.total_dim() || m_.cols() != layout_.total_dim()) {
      throw InvalidDimension("operator matrix does not match layout " + layout_.describe());
    }
  }

  static Operator identity(const SpaceLayout& layout) {
    return Operator(layout, Matrix::Identity(layout.total_dim(), layout.total_dim()));
  }
  static Operator zero(const SpaceLayout& layout) {
    return Operator(layout, Matrix::Zero(layout.total_dim(), layout.total_dim()));
  }

  const SpaceLayout& layout() const noexcept { return layout_; }
  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

  Operator adjoint() const { return Operator(layout_, m_.adjoint()); }

  /// max_ij |M_ij - conj(M_ji)|
  Real hermiticity_defect() const {
    if (m_.size() == 0) return 0;
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  }

  /// Entrywise M = M^dag test, scaled by the largest entry when that exceeds one.
  bool is_hermitian(Real tol = kHermitianTol) const {
    const Real scale = m_.size() ? std::max(Real(1), m_.cwiseAbs().maxCoeff()) : Real(1);
    return hermiticity_defect() <= tol * scale;
  }

  Operator& operator+=(const Operator& o) {
    require_same_layout(layout_, o.layout_, "operator+");
    m_ += o.m_;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    require_same_layout(layout_, o.layout_, "operator-");
    m_ -= o.m_;
    return *this;
  }
  Operator& operator*=(Scalar s) {
    m_ *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator-(Operator a) {
    a.m_ = -a.m_;
    return a;
  }
  friend Operator operator*(Operator a, Scalar s) { return a *= s; }
  friend Operator operator*(Scalar s, Operator a) { return a *= s; }
  friend Operator operator*(Operator a, Real s) { return a *= Scalar(s); }
  friend Operator operator*(Real s, Operator a) { return a *= Scalar(s); }
  friend Operator operator*(const Operator& a, const Operator& b) {
    require_same_layout(a.layout_, b.layout_, "operator*");
    return Operator(a.layout_, a.m_ * b.m_);
  }

 private:
  SpaceLayout layout_;
  Matrix m_;
};

template <typename Real>
Operator<Real> commutator(const Operator<Real>& a, const Operator<Real>& b) {
  require_same_layout(a.layout(), b.layout(), "commutator");
  return Operator<Real>(a.layout(), a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

/// Tensor product; the result lives on concat(a.layout(), b.layout()).
template <typename Real>
Operator<Real> kron(const Operator<Real>& a, const Operator<Real>& b) {
  const Index da = a.dim(), db = b.dim();
  CMatrix<Real> out(da * db, da * db);
  for (Index i = 0; i < da; ++i) {
    for (Index j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  }
  return Operator<Real>(concat(a.layout(), b.layout()), std::move(out));
}

/// Lift a single-subsystem operator onto `site` of `layout`, identity elsewhere.
template <typename Real>
Operator<Real> embed(const Operator<Real>& op, Index site, const SpaceLayout& layout) {
  if (site < 0 || site >= layout.size()) throw InvalidArgument("embed: site out of range");
  const SpaceLayout& local = op.layout();
  if (local.size() != 1 || !(local.at(0) == layout.at(site))) {
    throw InvalidDimension("embed: operator on " + local.describe() + " does not fit site " +
                           std::to_string(site) + " of " + layout.describe());
  }
  const Index d = layout.dim(site);
  const Index right = layout.stride(site);
  const Index left = layout.total_dim() / (d * right);
  CMatrix<Real> out = CMatrix<Real>::Zero(layout.total_dim(), layout.total_dim());
  for (Index l = 0; l < left; ++l) {
    for (Index a = 0; a < d; ++a) {
      for (Index b = 0; b < d; ++b) {
        const auto v = op.matrix()(a, b);
        if (v == Complex<Real>(0)) continue;
        const Index row0 = (l * d + a) * right;
        const Index col0 = (l * d + b) * right;
        for (Index r = 0; r < right; ++r) out(row0 + r, col0 + r) = v;
      }
    }
  }
  return Operator<Real>(layout, std::move(out));
}

// ---------------------------------------------------------------------------
// Single-subsystem operators

template <typename Real = double>
Operator<Real> make_annihilation(Index dim) {
  if (dim < 2) throw InvalidDimension("make_annihilation: dim must be >= 2");
  CMatrix<Real> a = CMatrix<Real>::Zero(dim, dim);
  for (Index k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<Real>(k));
  return Operator<Real>(SpaceLayout::oscillator(dim), std::move(a));
}

template <typename Real = double>
Operator<Real> make_number(Index dim) {
  if (dim < 2) throw InvalidDimension("make_number: dim must be >= 2");
  CMatrix<Real> n = CMatrix<Real>::Zero(dim, dim);
  for (Index k = 0; k < dim; ++k) n(k, k) = static_cast<Real>(k);
  return Operator<Real>(SpaceLayout::oscillator(dim), std::move(n));
}

template <typename Real>
struct Quadratures {
  Operator<Real> X;
  Operator<Real> P;
};

/// X = a + a^dag, P = i(a^dag - a).
template <typename Real = double>
Quadratures<Real> quadratures(Index dim) {
  const auto a = make_annihilation<Real>(dim);
  const auto ad = a.adjoint();
  return {a + ad, kI<Real> * (ad - a)};
}

template <typename Real = double>
Operator<Real> pauli_x() {
  CMatrix<Real> m(2, 2);
  m << 0, 1, 1, 0;
  return Operator<Real>(SpaceLayout::qubit(), std::move(m));
}

/// sigma_y in the (|g>, |e>) ordering, chosen so that sigma_x sigma_y = i sigma_z.
template <typename Real = double>
Operator<Real> pauli_y() {
  CMatrix<Real> m(2, 2);
  m << Complex<Real>(0), kI<Real>, -kI<Real>, Complex<Real>(0);
  return Operator<Real>(SpaceLayout::qubit(), std::move(m));
}

template <typename Real = double>
Operator<Real> pauli_z() {
  CMatrix<Real> m(2, 2);
  m << -1, 0, 0, 1;
  return Operator<Real>(SpaceLayout::qubit(), std::move(m));
}

/// Integer power of an operator. For truncated quadratures this is the
/// power of the truncated matrix, exact on states below the top `k` levels.
template <typename Real>
Operator<Real> power(const Operator<Real>& op, int k) {
  if (k < 0) throw InvalidArgument("power: negative exponent");
  CMatrix<Real> out = CMatrix<Real>::Identity(op.dim(), op.dim());
  for (int i = 0; i < k; ++i) out = (out * op.matrix()).eval();
  return Operator<Real>(op.layout(), std::move(out));
}

// ---------------------------------------------------------------------------
// States

template <typename Real>
class StateVector {
 public:
  using Vector = CVector<Real>;

  static constexpr Real kNormTol = Real(1e-10);

  StateVector(SpaceLayout layout, Vector amplitudes)
      : layout_(std::move(layout)), amps_(std::move(amplitudes)) {
    if (amps_.size() != layout_.total_dim()) {
      throw InvalidDimension("state length does not match layout " + layout_.describe());
    }
    if (std::abs(amps_.norm() - Real(1)) > kNormTol) {
      throw InvalidArgument("state is not normalized (norm " + std::to_string(double(amps_.norm())) + ")");
    }
  }

  static StateVector normalized(SpaceLayout layout, Vector amplitudes) {
    const Real n = amplitudes.norm();
    if (!(n > 0)) throw InvalidArgument("cannot normalize a zero vector");
    amplitudes /= n;
    return StateVector(std::move(layout), std::move(amplitudes));
  }

  static StateVector basis(SpaceLayout layout, Index index) {
    if (index < 0 || index >= layout.total_dim()) throw InvalidArgument("basis index out of range");
    Vector v = Vector::Zero(layout.total_dim());
    v(index) = 1;
    return StateVector(std::move(layout), std::move(v));
  }

  const SpaceLayout& layout() const noexcept { return layout_; }
  const Vector& amplitudes() const noexcept { return amps_; }
  Index dim() const noexcept { return amps_.size(); }

 private:
  SpaceLayout layout_;
  Vector amps_;
};

template <typename Real>
StateVector<Real> kron(const StateVector<Real>& a, const StateVector<Real>& b) {
  CVector<Real> out(a.dim() * b.dim());
  for (Index i = 0; i < a.dim(); ++i) out.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  return StateVector<Real>::normalized(concat(a.layout(), b.layout()), std::move(out));
}

/// <a|b>
template <typename Real>
Complex<Real> inner(const StateVector<Real>& a, const StateVector<Real>& b) {
  require_same_layout(a.layout(), b.layout(), "inner");
  return a.amplitudes().dot(b.amplitudes());
}

template <typename Real>
Complex<Real> expectation(const StateVector<Real>& psi, const Operator<Real>& op) {
  require_same_layout(psi.layout(), op.layout(), "expectation");
  return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

/// <op^2> - <op>^2, evaluated as ||(op - <op>) psi||^2 so it cannot go negative.
template <typename Real>
Real variance(const StateVector<Real>& psi, const Operator<Real>& op) {
  require_same_layout(psi.layout(), op.layout(), "variance");
  if (!op.is_hermitian()) throw DomainError("variance: operator is not Hermitian");
  const CVector<Real> opsi = op.matrix() * psi.amplitudes();
  const Real mean = psi.amplitudes().dot(opsi).real();
  return (opsi - mean * psi.amplitudes()).squaredNorm();
}

/// Symmetrized covariance Re<AB> - <A><B> for Hermitian A, B.
template <typename Real>
Real covariance(const StateVector<Real>& psi, const Operator<Real>& a, const Operator<Real>& b) {
  require_same_layout(psi.layout(), a.layout(), "covariance");
  require_same_layout(psi.layout(), b.layout(), "covariance");
  const CVector<Real> apsi = a.matrix() * psi.amplitudes();
  const CVector<Real> bpsi = b.matrix() * psi.amplitudes();
  const Real ma = psi.amplitudes().dot(apsi).real();
  const Real mb = psi.amplitudes().dot(bpsi).real();
  return apsi.dot(bpsi).real() - ma * mb;
}

inline constexpr double kLeakThreshold = 1e-10;

/// Default per-oscillator truncation for a state of amplitude scale |alpha|.
inline Index default_truncation(double alpha_abs) {
  const double n = alpha_abs * alpha_abs;
  return static_cast<Index>(std::ceil(n + 10.0 * std::sqrt(n + 1.0) + 20.0));
}

template <typename Real = double>
StateVector<Real> fock_state(Index level, Index dim) {
  if (dim < 2) throw InvalidDimension("fock_state: dim must be >= 2");
  if (level < 0 || level >= dim) throw InvalidArgument("fock_state: level outside truncation");
  return StateVector<Real>::basis(SpaceLayout::oscillator(dim), level);
}

/// Coherent state truncated to `dim` levels and renormalized. Throws
/// TruncationLeak when the discarded Poisson tail exceeds 1e-10.
template <typename Real = double>
StateVector<Real> coherent_state(Complex<Real> alpha, Index dim) {
  if (dim < 2) throw InvalidDimension("coherent_state: dim must be >= 2");
  const Real n = std::norm(alpha);
  if (n > 0) {
    // Poisson tail sum_{k >= dim} e^{-n} n^k / k!
    Real tail = 0;
    Real log_p = Real(dim) * std::log(n) - n - std::lgamma(Real(dim) + 1);
    for (Index k = dim; k < dim + 100000; ++k) {
      const Real p = std::exp(log_p);
      tail += p;
      if (Real(k + 1) > n && p < Real(1e-30) * std::max(tail, Real(1e-300))) break;
      if (Real(k + 1) > n && p == 0) break;
      log_p += std::log(n) - std::log(Real(k + 1));
    }
    if (tail > Real(kLeakThreshold)) {
      throw TruncationLeak("coherent_state: tail mass beyond dim " + std::to_string(dim) + " is " +
                               std::to_string(double(tail)),
                           double(tail));
    }
  }
  CVector<Real> c(dim);
  c(0) = std::exp(-n / 2);
  for (Index k = 1; k < dim; ++k) c(k) = c(k - 1) * alpha / std::sqrt(Real(k));
  return StateVector<Real>::normalized(SpaceLayout::oscillator(dim), std::move(c));
}

/// Squeezed vacuum S(r)|0>, Var(X) = exp(-2r), Var(P) = exp(2r).
template <typename Real = double>
StateVector<Real> squeezed_vacuum(Real r, Index dim) {
  if (dim < 2) throw InvalidDimension("squeezed_vacuum: dim must be >= 2");
  const Real t = -std::tanh(r);
  CVector<Real> c = CVector<Real>::Zero(dim);
  Real amp = Real(1) / std::sqrt(std::cosh(r));
  Real tail = 0;
  for (Index m = 0;; ++m) {
    const Index k = 2 * m;
    if (m > 0) amp *= t * std::sqrt(Real(2 * m - 1) / Real(2 * m));
    if (k < dim) {
      c(k) = amp;
    } else {
      tail += amp * amp;
      if (amp * amp < Real(1e-30) * std::max(tail, Real(1e-300)) || amp == 0 || m > 1000000) break;
    }
  }
  if (tail > Real(kLeakThreshold)) {
    throw TruncationLeak("squeezed_vacuum: tail mass beyond dim " + std::to_string(dim) + " is " +
                             std::to_string(double(tail)),
                         double(tail));
  }
  return StateVector<Real>::normalized(SpaceLayout::oscillator(dim), std::move(c));
}

/// Declarative oscillator initial state.
template <typename Real = double>
struct OscillatorState {
  enum class Kind { vacuum, coherent, squeezed, fock };
  Kind kind = Kind::vacuum;
  Complex<Real> alpha{0, 0};
  Real squeeze = 0;
  Index level = 0;

  static OscillatorState vacuum() { return {}; }
  static OscillatorState coherent(Complex<Real> a) { return {Kind::coherent, a, 0, 0}; }
  static OscillatorState squeezed(Real r) { return {Kind::squeezed, {0, 0}, r, 0}; }
  static OscillatorState fock(Index n) { return {Kind::fock, {0, 0}, 0, n}; }

  /// Amplitude scale used by the default truncation rule.
  Real amplitude_scale() const {
    switch (kind) {
      case Kind::coherent: return std::abs(alpha);
      case Kind::squeezed: return Real(2) * std::sinh(std::abs(squeeze)) + std::abs(squeeze);
      case Kind::fock: return std::sqrt(Real(level));
      case Kind::vacuum: break;
    }
    return 0;
  }

  /// Var(X) of the untruncated state.
  Real x_variance() const {
    switch (kind) {
      case Kind::squeezed: return std::exp(Real(-2) * squeeze);
      case Kind::fock: return Real(2 * level + 1);
      default: break;
    }
    return 1;
  }

  StateVector<Real> prepare(Index dim) const {
    switch (kind) {
      case Kind::coherent: return coherent_state<Real>(alpha, dim);
      case Kind::squeezed: return squeezed_vacuum<Real>(squeeze, dim);
      case Kind::fock: return fock_state<Real>(level, dim);
      case Kind::vacuum: break;
    }
    return fock_state<Real>(0, dim);
  }
};

// ---------------------------------------------------------------------------
// Truncation diagnostics

/// Number of top Fock levels whose population counts as truncation leak.
inline Index leak_levels(Index dim) { return std::max<Index>(2, (dim + 9) / 10); }

/// Number of top Fock levels excluded from operator-identity checks.
inline Index boundary_buffer(Index dim) { return (dim + 2) / 3; }

/// Probability that oscillator `site` occupies one of its top `levels` levels.
template <typename Real>
Real tail_mass(const StateVector<Real>& psi, Index site, Index levels) {
  const auto& layout = psi.layout();
  if (layout.kind(site) != SubsystemKind::oscillator) throw InvalidArgument("tail_mass: site is not an oscillator");
  const Index d = layout.dim(site);
  const Index stride = layout.stride(site);
  Real mass = 0;
  for (Index i = 0; i < psi.dim(); ++i) {
    if ((i / stride) % d >= d - levels) mass += std::norm(psi.amplitudes()(i));
  }
  return mass;
}

/// Largest top-level population over all oscillators.
template <typename Real>
Real truncation_leak(const StateVector<Real>& psi) {
  Real worst = 0;
  for (Index s = 0; s < psi.layout().size(); ++s) {
    if (psi.layout().kind(s) == SubsystemKind::oscillator) {
      worst = std::max(worst, tail_mass(psi, s, leak_levels(psi.layout().dim(s))));
    }
  }
  return worst;
}

template <typename Real>
void require_no_leak(const StateVector<Real>& psi, const char* where, double threshold = kLeakThreshold) {
  const Real leak = truncation_leak(psi);
  if (leak > Real(threshold)) {
    throw TruncationLeak(std::string(where) + ": population " + std::to_string(double(leak)) +
                             " at the truncation boundary; increase dim",
                         double(leak));
  }
}

/// Basis indices whose oscillator levels are all <= max_level[site]
/// (qubits unrestricted). `max_level` holds one entry per oscillator.
inline std::vector<Index> low_level_indices(const SpaceLayout& layout, std::span<const Index> max_level) {
  std::vector<Index> out;
  for (Index i = 0; i < layout.total_dim(); ++i) {
    bool keep = true;
    Index osc = 0;
    for (Index s = 0; s < layout.size() && keep; ++s) {
      if (layout.kind(s) != SubsystemKind::oscillator) continue;
      if (osc >= static_cast<Index>(max_level.size())) throw InvalidArgument("low_level_indices: too few limits");
      keep = layout.level(i, s) <= max_level[static_cast<std::size_t>(osc)];
      ++osc;
    }
    if (keep) out.push_back(i);
  }
  return out;
}

/// Basis indices excluding the top boundary_buffer(dim) levels of every oscillator.
inline std::vector<Index> buffered_indices(const SpaceLayout& layout) {
  std::vector<Index> limits;
  for (const auto& s : layout.subsystems()) {
    if (s.kind == SubsystemKind::oscillator) limits.push_back(s.dim - boundary_buffer(s.dim) - 1);
  }
  return low_level_indices(layout, limits);
}

/// Principal submatrix on the given basis indices.
template <typename Derived>
typename Derived::PlainObject restrict_to(const Eigen::MatrixBase<Derived>& m, std::span<const Index> idx) {
  const auto n = static_cast<Index>(idx.size());
  typename Derived::PlainObject out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace qmetro

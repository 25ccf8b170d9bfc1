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

// Hamiltonian families and their closed-form QFI expressions.
//
//   classical-force   H = -f X
//   ramsey            H = g sigma_z P - f X
//   nqubit-ramsey     H = sum_j (g sigma_z^(j) P_j - f X_j), cat-state qubits
//   power-g           H = f X^n + g sigma_z P
//   chain             H = -f X_1 + g sum_j P_j X_{j+1}
//   rotated-qubit     H = B (cos f sigma_x + sin f sigma_z)

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "qmetro/error.hpp"
#include "qmetro/fockspace.hpp"
#include "qmetro/numerics.hpp"
#include "qmetro/types.hpp"

namespace qmetro {

enum class ModelFamily { classical_force, ramsey, nqubit_ramsey, power_g, chain, rotated_qubit };

inline constexpr std::array<std::pair<ModelFamily, std::string_view>, 6> kFamilyIds{{
    {ModelFamily::classical_force, "classical-force"},
    {ModelFamily::ramsey, "ramsey"},
    {ModelFamily::nqubit_ramsey, "nqubit-ramsey"},
    {ModelFamily::power_g, "power-g"},
    {ModelFamily::chain, "chain"},
    {ModelFamily::rotated_qubit, "rotated-qubit"},
}};

inline std::string_view family_id(ModelFamily f) {
  for (const auto& [fam, id] : kFamilyIds) {
    if (fam == f) return id;
  }
  return "unknown";
}

inline std::optional<ModelFamily> parse_family(std::string_view id) {
  for (const auto& [fam, name] : kFamilyIds) {
    if (name == id) return fam;
  }
  return std::nullopt;
}

/// Qubit preparation. `superposition` is the post-first-pulse state
/// (|g> - i|e>)/sqrt(2); for nqubit-ramsey it selects the cat state
/// (|g...g> - i|e...e>)/sqrt(2).
enum class QubitInit { superposition, ground, excited };

template <typename Real = double>
struct ModelSpec {
  ModelFamily family = ModelFamily::ramsey;
  Real g = 1;  // coupling strength; the field amplitude B for rotated-qubit
  Real f = 0;
  int n = 1;   // chain sites, qubit count, or power exponent
  std::vector<Index> dims;  // per oscillator; empty selects the default rule
  OscillatorState<Real> oscillator;
  std::optional<QubitInit> qubit;  // family default when unset
  Real T_hint = 1;  // longest evolution time, only consulted by the default truncation

  void validate() const {
    if (!std::isfinite(g) || g < 0) throw InvalidArgument("model: coupling must be finite and >= 0");
    if (!std::isfinite(f)) throw InvalidArgument("model: f must be finite");
    if (n < 1) throw InvalidArgument("model: n must be >= 1");
    if (!std::isfinite(T_hint) || T_hint < 0) throw InvalidArgument("model: T_hint must be >= 0");
    const Index osc = oscillator_count();
    if (!dims.empty() && static_cast<Index>(dims.size()) != osc && dims.size() != 1) {
      throw InvalidArgument("model: dims must list one entry per oscillator (or a single shared value)");
    }
  }

  Index oscillator_count() const {
    switch (family) {
      case ModelFamily::chain:
      case ModelFamily::nqubit_ramsey: return n;
      case ModelFamily::rotated_qubit: return 0;
      default: return 1;
    }
  }

  Index qubit_count() const {
    switch (family) {
      case ModelFamily::ramsey:
      case ModelFamily::power_g:
      case ModelFamily::rotated_qubit: return 1;
      case ModelFamily::nqubit_ramsey: return n;
      default: return 0;
    }
  }

  QubitInit qubit_init() const {
    if (qubit) return *qubit;
    return family == ModelFamily::power_g ? QubitInit::ground : QubitInit::superposition;
  }

  std::string id() const { return std::string(family_id(family)); }
};

template <typename Real>
struct Model {
  Operator<Real> H;
  Operator<Real> dH;
  StateVector<Real> psi0;
};

// ---------------------------------------------------------------------------
// Qubit pulses and states

/// pi/2 rotation about X: |g> -> (|g> - i|e>)/sqrt(2).
template <typename Real = double>
Operator<Real> pulse_x_half() {
  const auto id = Operator<Real>::identity(SpaceLayout::qubit());
  return (id - kI<Real> * pauli_x<Real>()) * (Real(1) / std::sqrt(Real(2)));
}

/// pi/2 rotation about Y.
template <typename Real = double>
Operator<Real> pulse_y_half() {
  const auto id = Operator<Real>::identity(SpaceLayout::qubit());
  return (id - kI<Real> * pauli_y<Real>()) * (Real(1) / std::sqrt(Real(2)));
}

template <typename Real = double>
StateVector<Real> qubit_state(QubitInit init) {
  switch (init) {
    case QubitInit::ground: return StateVector<Real>::basis(SpaceLayout::qubit(), 0);
    case QubitInit::excited: return StateVector<Real>::basis(SpaceLayout::qubit(), 1);
    case QubitInit::superposition: break;
  }
  CVector<Real> v = pulse_x_half<Real>().matrix().col(0);
  return StateVector<Real>::normalized(SpaceLayout::qubit(), std::move(v));
}

/// (|g...g> - i|e...e>)/sqrt(2) on `n` qubits.
template <typename Real = double>
StateVector<Real> cat_state(Index n) {
  const SpaceLayout layout = SpaceLayout::make(n, {});
  CVector<Real> v = CVector<Real>::Zero(layout.total_dim());
  v(0) = Real(1);
  v(layout.total_dim() - 1) = -kI<Real>;
  return StateVector<Real>::normalized(layout, std::move(v));
}

/// Tensor product of local operators placed on the listed sites, identity elsewhere.
template <typename Real>
Operator<Real> site_product(const SpaceLayout& layout, const std::map<Index, Operator<Real>>& local) {
  CMatrix<Real> acc = CMatrix<Real>::Identity(1, 1);
  for (Index s = 0; s < layout.size(); ++s) {
    const Index d = layout.dim(s);
    auto it = local.find(s);
    CMatrix<Real> m = it == local.end() ? CMatrix<Real>::Identity(d, d) : it->second.matrix();
    if (m.rows() != d) throw InvalidDimension("site_product: operator does not fit its site");
    CMatrix<Real> next = CMatrix<Real>::Zero(acc.rows() * d, acc.cols() * d);
    for (Index i = 0; i < acc.rows(); ++i) {
      for (Index j = 0; j < acc.cols(); ++j) {
        if (acc(i, j) != Complex<Real>(0)) next.block(i * d, j * d, d, d) = acc(i, j) * m;
      }
    }
    acc = std::move(next);
  }
  return Operator<Real>(layout, std::move(acc));
}

// ---------------------------------------------------------------------------
// Default truncation

namespace detail {

template <typename Real>
Index thermal_truncation(Real var_x, Real var_p, Real mean_amp) {
  // Marginal occupation of a Gaussian mode; tail ~ (nbar/(nbar+1))^k.
  const Real nbar = std::max(Real(1e-6), (var_x + var_p - Real(2)) / Real(4));
  const Real spread = Real(23) / std::log1p(Real(1) / nbar);
  return static_cast<Index>(std::ceil(spread + mean_amp * mean_amp + Real(10) * mean_amp + Real(6)));
}

}  // namespace detail

/// Per-oscillator dims used when ModelSpec leaves them empty.
template <typename Real>
std::vector<Index> default_dims(const ModelSpec<Real>& spec) {
  const Index count = spec.oscillator_count();
  if (!spec.dims.empty()) {
    return spec.dims.size() == 1 ? std::vector<Index>(static_cast<std::size_t>(count), spec.dims[0]) : spec.dims;
  }
  const Real T = spec.T_hint;
  const Real a0 = spec.oscillator.amplitude_scale();
  std::vector<Index> dims;
  switch (spec.family) {
    case ModelFamily::classical_force:
      dims.push_back(default_truncation(double(a0 + std::abs(spec.f) * T)));
      break;
    case ModelFamily::ramsey:
    case ModelFamily::nqubit_ramsey:
      dims.assign(static_cast<std::size_t>(count),
                  default_truncation(double(a0 + spec.g * T + std::abs(spec.f) * T)));
      break;
    case ModelFamily::power_g:
      dims.push_back(default_truncation(double(a0 + spec.g * T)) + spec.n);
      break;
    case ModelFamily::chain: {
      const Real vx = spec.oscillator.x_variance();
      const Real vp = Real(1) / vx;
      const Real x = Real(2) * spec.g * T;
      for (Index j = 0; j < count; ++j) {
        // Heisenberg spreading of X_j from downstream sites and of P_j from upstream sites.
        Real sx = 0, sp = 0, c = 1;
        for (Index k = 0; k < count; ++k) {
          if (k > 0) c *= x / Real(k);
          if (j + k < count) sx += c * c;
          if (k <= j) sp += c * c;
        }
        const Real drive = j == 0 ? std::abs(spec.f) * T : Real(0);
        dims.push_back(std::max<Index>(6, detail::thermal_truncation(vx * sx, vp * sp, a0 + drive)));
      }
      break;
    }
    case ModelFamily::rotated_qubit: break;
  }
  return dims;
}

// ---------------------------------------------------------------------------
// Hamiltonian construction

template <typename Real>
Model<Real> build_hamiltonian(const ModelSpec<Real>& spec) {
  spec.validate();
  const std::vector<Index> dims = default_dims(spec);
  const Index nq = spec.qubit_count();
  const SpaceLayout layout = SpaceLayout::make(nq, dims);
  const Real g = spec.g, f = spec.f;

  auto osc_site = [&](Index j) { return nq + j; };
  auto quad = [&](Index j) { return quadratures<Real>(dims[static_cast<std::size_t>(j)]); };
  auto osc_states = [&]() {
    std::optional<StateVector<Real>> acc;
    for (Index d : dims) {
      auto s = spec.oscillator.prepare(d);
      acc = acc ? kron(*acc, s) : s;
    }
    return *acc;
  };

  switch (spec.family) {
    case ModelFamily::classical_force: {
      const auto q = quad(0);
      return {-f * q.X, -q.X, osc_states()};
    }
    case ModelFamily::ramsey: {
      const auto q = quad(0);
      auto H = g * site_product<Real>(layout, {{0, pauli_z<Real>()}, {1, q.P}}) - f * embed(q.X, 1, layout);
      auto dH = -embed(q.X, 1, layout);
      return {std::move(H), std::move(dH), kron(qubit_state<Real>(spec.qubit_init()), osc_states())};
    }
    case ModelFamily::nqubit_ramsey: {
      auto H = Operator<Real>::zero(layout);
      auto dH = Operator<Real>::zero(layout);
      for (Index j = 0; j < spec.n; ++j) {
        const auto q = quad(j);
        const auto x = embed(q.X, osc_site(j), layout);
        H += g * site_product<Real>(layout, {{j, pauli_z<Real>()}, {osc_site(j), q.P}}) - f * x;
        dH -= x;
      }
      std::optional<StateVector<Real>> qubits;
      if (spec.qubit_init() == QubitInit::superposition) {
        qubits = cat_state<Real>(spec.n);
      } else {
        for (Index j = 0; j < spec.n; ++j) {
          auto s = qubit_state<Real>(spec.qubit_init());
          qubits = qubits ? kron(*qubits, s) : s;
        }
      }
      return {std::move(H), std::move(dH), kron(*qubits, osc_states())};
    }
    case ModelFamily::power_g: {
      const auto q = quad(0);
      const auto gx = embed(power(q.X, spec.n), 1, layout);
      auto H = f * gx + g * site_product<Real>(layout, {{0, pauli_z<Real>()}, {1, q.P}});
      return {std::move(H), gx, kron(qubit_state<Real>(spec.qubit_init()), osc_states())};
    }
    case ModelFamily::chain: {
      const auto x1 = embed(quad(0).X, 0, layout);
      auto H = -f * x1;
      for (Index j = 0; j + 1 < spec.n; ++j) {
        H += g * site_product<Real>(layout, {{j, quad(j).P}, {j + 1, quad(j + 1).X}});
      }
      return {std::move(H), -x1, osc_states()};
    }
    case ModelFamily::rotated_qubit: {
      const auto sx = pauli_x<Real>(), sz = pauli_z<Real>();
      auto H = g * (std::cos(f) * sx + std::sin(f) * sz);
      auto dH = g * (-std::sin(f) * sx + std::cos(f) * sz);
      return {std::move(H), std::move(dH), qubit_state<Real>(spec.qubit_init())};
    }
  }
  throw InvalidArgument("build_hamiltonian: unknown family");
}

/// f -> H_f for the given family, all other parameters frozen.
template <typename Real>
std::function<Operator<Real>(Real)> hamiltonian_of_f(ModelSpec<Real> spec) {
  spec.dims = default_dims(spec);
  return [spec](Real f) {
    ModelSpec<Real> s = spec;
    s.f = f;
    return build_hamiltonian(s).H;
  };
}

// ---------------------------------------------------------------------------
// Closed forms

/// 4 (g^2 T^4 + T^2 Var X)
/// Per-site truncation for the chain's Fock-space QFI oracle. Site j needs
/// room for Var X_j(T) ~ S_j = sum_{k < n-j} (2gT)^{2k}/(k!)^2; calibrated
/// so n = 3, gT = 1 lands near 1e-8 relative (dims 80, 48, 16).
template <typename Real>
std::vector<Index> chain_fock_dims(int n, Real g, Real T, const OscillatorState<Real>& site) {
  if (n < 1) throw InvalidArgument("chain_fock_dims: n must be >= 1");
  const Real x = Real(2) * std::abs(g) * T;
  const Real v = std::max(site.x_variance(), Real(1) / site.x_variance());
  std::vector<Index> dims;
  for (int j = 0; j < n; ++j) {
    Real S = 0, m = 0, c = 1;
    for (int k = 0; k < n - j; ++k) {
      if (k > 0) c *= x / Real(k);
      S += c * c;
      m += c;
    }
    const Real mean = std::abs(site.alpha) * m;
    dims.push_back(std::max<Index>(12, Index(std::ceil(Real(8) * v * S + Real(8) + Real(4) * mean * mean))));
  }
  return dims;
}

/// Chain Hamiltonian kept sparse: H(f) = coupling - f x1. Used where the
/// dense product space no longer fits (n = 3 beyond a dozen levels per site).
template <typename Real>
struct SparseChain {
  SpaceLayout layout;
  SparseCMatrix<Real> coupling;  // g sum_j P_j X_{j+1}
  SparseCMatrix<Real> x1;
  CVector<Real> psi0;

  SparseCMatrix<Real> H(Real f) const { return coupling - Complex<Real>(f) * x1; }
};

namespace detail {

template <typename Real>
SparseCMatrix<Real> sparse_on_site(const CMatrix<Real>& local, Index site, const std::vector<Index>& dims) {
  SparseCMatrix<Real> out(1, 1);
  out.insert(0, 0) = 1;
  for (Index j = 0; j < Index(dims.size()); ++j) {
    const Index d = dims[std::size_t(j)];
    SparseCMatrix<Real> m(d, d);
    if (j == site) {
      m = local.sparseView();
    } else {
      m.setIdentity();
    }
    SparseCMatrix<Real> next = Eigen::kroneckerProduct(out, m);
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

template <typename Real>
SparseChain<Real> build_sparse_chain(const ModelSpec<Real>& spec) {
  if (spec.family != ModelFamily::chain) throw InvalidArgument("build_sparse_chain: family must be chain");
  spec.validate();
  const std::vector<Index> dims = default_dims(spec);
  SparseChain<Real> out;
  out.layout = SpaceLayout::make(0, dims);
  std::vector<Quadratures<Real>> q;
  for (Index d : dims) q.push_back(quadratures<Real>(d));
  out.x1 = detail::sparse_on_site<Real>(q[0].X.matrix(), 0, dims);
  out.coupling.resize(out.x1.rows(), out.x1.cols());
  for (Index j = 0; j + 1 < spec.n; ++j) {
    const auto p = detail::sparse_on_site<Real>(q[std::size_t(j)].P.matrix(), j, dims);
    const auto x = detail::sparse_on_site<Real>(q[std::size_t(j + 1)].X.matrix(), j + 1, dims);
    SparseCMatrix<Real> px = p * x;
    out.coupling += Complex<Real>(spec.g) * px;
  }
  std::optional<StateVector<Real>> acc;
  for (Index d : dims) {
    auto s = spec.oscillator.prepare(d);
    acc = acc ? kron(*acc, s) : s;
  }
  out.psi0 = acc->amplitudes();
  return out;
}

template <typename Real>
Real qfi_ramsey_closed(Real g, Real T, Real var_x) {
  if (var_x < 0) throw InvalidArgument("qfi_ramsey_closed: negative variance");
  return Real(4) * (g * g * T * T * T * T + T * T * var_x);
}

/// 4 (g^2 n^2 T^4 + T^2 n Var X)
template <typename Real>
Real qfi_nqubit_closed(Real g, Real T, int n, Real var_x) {
  if (n < 1) throw InvalidArgument("qfi_nqubit_closed: n must be >= 1");
  if (var_x < 0) throw InvalidArgument("qfi_nqubit_closed: negative variance");
  const Real nn = Real(n);
  return Real(4) * (g * g * nn * nn * T * T * T * T + T * T * nn * var_x);
}

/// 4 sin^2(B T)
template <typename Real>
Real qfi_rotated_qubit(Real B, Real T) {
  const Real s = std::sin(B * T);
  return Real(4) * s * s;
}

/// log of the j-th chain term 2^{2j}/(j!)^2 g^{2j-2} T^{2j} Var X_j.
template <typename Real>
Real log_chain_term(int j, Real g, Real T, Real var_x) {
  if (j < 1) throw InvalidArgument("chain term index starts at 1");
  if (var_x < 0) throw InvalidArgument("chain: negative variance");
  const Real neg_inf = -std::numeric_limits<Real>::infinity();
  if (var_x == 0 || T == 0) return neg_inf;
  if (g == 0) return j == 1 ? std::log(Real(4) * T * T * var_x) : neg_inf;
  const Real jj = Real(j);
  return Real(2) * jj * std::log(Real(2) * g * T) - Real(2) * std::log(g) -
         Real(2) * std::lgamma(jj + 1) + std::log(var_x);
}

template <typename Real>
Real chain_term(int j, Real g, Real T, Real var_x) {
  return std::exp(log_chain_term(j, g, T, var_x));
}

/// log of sum_{j=1}^n 2^{2j}/(j!)^2 g^{2j-2} T^{2j} Var X_j. `var_x` holds
/// either n per-site variances or one shared value.
template <typename Real>
Real log_qfi_chain_closed(int n, Real g, Real T, std::span<const Real> var_x) {
  if (n < 1) throw InvalidArgument("qfi_chain_closed: n must be >= 1");
  if (var_x.size() != 1 && var_x.size() != static_cast<std::size_t>(n)) {
    throw InvalidArgument("qfi_chain_closed: need one variance per site or a single shared value");
  }
  std::vector<Real> logs;
  logs.reserve(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const Real v = var_x.size() == 1 ? var_x[0] : var_x[static_cast<std::size_t>(j - 1)];
    logs.push_back(log_chain_term(j, g, T, v));
  }
  return log_sum_exp<Real>(logs);
}

template <typename Real>
Real qfi_chain_closed(int n, Real g, Real T, std::span<const Real> var_x) {
  return std::exp(log_qfi_chain_closed(n, g, T, var_x));
}

template <typename Real>
Real qfi_chain_closed(int n, Real g, Real T, Real var_x) {
  return qfi_chain_closed<Real>(n, g, T, std::span<const Real>(&var_x, 1));
}

/// log sum_{j=1}^n (x^j / j!)^2
template <typename Real>
Real log_chain_partial_sum(int n, Real x) {
  std::vector<Real> logs;
  for (int j = 1; j <= n; ++j) logs.push_back(Real(2) * (Real(j) * std::log(x) - std::lgamma(Real(j) + 1)));
  return log_sum_exp<Real>(logs);
}

template <typename Real>
struct ChainBound {
  int n = 0;
  Real log_lhs = 0;  // log F_Q
  Real log_mid = 0;  // log[(Var X/g^2) e^{4gT} / (4n)]
  Real log_rhs = 0;  // log[(Var X/g^2) e^{2gT}]
  bool lhs_ge_mid = false;
  bool mid_ge_rhs = false;

  bool holds() const { return lhs_ge_mid && mid_ge_rhs; }
};

/// Exponential lower bounds for the chain with n = ceil(a g T) sites, in log space.
template <typename Real>
ChainBound<Real> chain_bound_check(Real g, Real T, Real var_x, Real a) {
  if (!(g > 0) || !(T > 0) || !(var_x > 0)) throw InvalidArgument("chain_bound_check: g, T, Var X must be > 0");
  if (!(a > 3)) throw InvalidArgument("chain_bound_check: a must exceed 3");
  ChainBound<Real> b;
  b.n = std::max(1, static_cast<int>(std::ceil(a * g * T)));
  const Real prefactor = std::log(var_x) - Real(2) * std::log(g);
  b.log_lhs = prefactor + log_chain_partial_sum(b.n, Real(2) * g * T);
  b.log_mid = prefactor + Real(4) * g * T - std::log(Real(4) * Real(b.n));
  b.log_rhs = prefactor + Real(2) * g * T;
  b.lhs_ge_mid = b.log_lhs >= b.log_mid;
  b.mid_ge_rhs = b.log_mid >= b.log_rhs;
  return b;
}

/// log of the per-particle average (Var X / n) sum_{j<=n} (2T)^{2j}/(j!)^2 (g = 1).
template <typename Real>
Real log_chain_average_qfi(int n, Real T, Real var_x) {
  if (n < 1) throw InvalidArgument("chain_average_qfi: n must be >= 1");
  if (!(var_x > 0)) throw InvalidArgument("chain_average_qfi: Var X must be > 0");
  if (T == 0) return -std::numeric_limits<Real>::infinity();
  return std::log(var_x) - std::log(Real(n)) + log_chain_partial_sum(n, Real(2) * T);
}

template <typename Real>
Real chain_average_qfi(int n, Real T, Real var_x) {
  return std::exp(log_chain_average_qfi(n, T, var_x));
}

template <typename Real>
struct OptimalN {
  int n_star = 1;
  Real log10_value = 0;
  Real value = 0;
  bool at_boundary = false;  // the scan limit cut off a still-rising average
};

/// argmax_{1<=n<=n_max} of the per-particle chain average; ties go to the smaller n.
template <typename Real>
OptimalN<Real> optimal_n(Real T, Real var_x, int n_max) {
  if (n_max < 1) throw InvalidArgument("optimal_n: n_max must be >= 1");
  if (!(T > 0)) throw InvalidArgument("optimal_n: T must be > 0");
  const Real x = Real(2) * T;
  const Real lv = std::log(var_x);
  std::vector<Real> logs;
  Real best = -std::numeric_limits<Real>::infinity();
  OptimalN<Real> out;
  Real last = best;
  for (int n = 1; n <= n_max + 1; ++n) {
    logs.push_back(Real(2) * (Real(n) * std::log(x) - std::lgamma(Real(n) + 1)));
    const Real avg = lv - std::log(Real(n)) + log_sum_exp<Real>(logs);
    if (n == n_max + 1) {
      out.at_boundary = avg > last;
      break;
    }
    if (avg > best) {
      best = avg;
      out.n_star = n;
    }
    last = avg;
  }
  out.log10_value = best / std::log(Real(10));
  out.value = std::exp(best);
  return out;
}

/// 4 Var(h) for H = f X^n + g sigma_z P with the qubit in the sigma_z
/// eigenstate `sigma_z_eigenvalue`. The generator is pulled back to the
/// initial state: h = sum_m (2 g s)^m T^{m+1}/(m+1)! n!/(n-m)! X^{n-m}, so the
/// variance is taken on psi_osc directly and keeps every cross-covariance.
template <typename Real>
Real qfi_power_series(int n_exp, Real T, const StateVector<Real>& psi_osc, int sigma_z_eigenvalue, Real g) {
  if (n_exp < 1) throw InvalidArgument("qfi_power_series: exponent must be >= 1");
  if (sigma_z_eigenvalue != 1 && sigma_z_eigenvalue != -1) throw InvalidArgument("sigma_z eigenvalue must be +-1");
  const auto& layout = psi_osc.layout();
  if (layout.size() != 1 || layout.kind(0) != SubsystemKind::oscillator) {
    throw LayoutMismatch("qfi_power_series: expects a single-oscillator state");
  }
  const Index d = layout.dim(0);
  const Real top = tail_mass(psi_osc, 0, std::min<Index>(d, n_exp + leak_levels(d)));
  if (top > Real(kLeakThreshold)) {
    throw TruncationLeak("qfi_power_series: state too close to the truncation for X^n moments", double(top));
  }
  const auto X = quadratures<Real>(d).X;
  auto h = Operator<Real>::zero(layout);
  const Real c = Real(2) * g * Real(sigma_z_eigenvalue);
  Real coef = T;  // (c)^m T^{m+1}/(m+1)! * n!/(n-m)!
  for (int m = 0; m < n_exp; ++m) {
    h += coef * power(X, n_exp - m);
    coef *= c * T / Real(m + 2) * Real(n_exp - m);
  }
  return Real(4) * variance(psi_osc, h);
}

/// The diagonal-only power-law series (g generalizes the printed g = 1 form):
/// sum_{k<n} (n!)^2 (2g)^{2k} T^{2k+2} / ([(k+1)!]^2 [(n-k)!]^2) Var(X^{n-k}).
/// Carries no overall factor 4 and drops covariances between powers of X.
template <typename Real>
Real qfi_power_diagonal_reference(int n_exp, Real T, const StateVector<Real>& psi_osc, Real g) {
  if (n_exp < 1) throw InvalidArgument("qfi_power_diagonal_reference: exponent must be >= 1");
  const Index d = psi_osc.layout().dim(0);
  const auto X = quadratures<Real>(d).X;
  CompensatedSum<Real> acc;
  for (int k = 0; k < n_exp; ++k) {
    const Real log_c = Real(2) * (std::lgamma(Real(n_exp) + 1) + (k ? Real(k) * std::log(Real(2) * g) : Real(0)) +
                                  Real(k + 1) * std::log(T) - std::lgamma(Real(k) + 2) -
                                  std::lgamma(Real(n_exp - k) + 1));
    acc += std::exp(log_c) * variance(psi_osc, power(X, n_exp - k));
  }
  return acc.value();
}

}  // namespace qmetro

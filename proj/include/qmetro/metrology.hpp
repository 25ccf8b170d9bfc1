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

// Pure-state QFI estimators, the quantum Cramer-Rao bound and the Ramsey
// measurement protocol (pi/2 pulse, evolution, pi/2 pulse, projector A).

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmetro/dynamics.hpp"
#include "qmetro/error.hpp"
#include "qmetro/fockspace.hpp"
#include "qmetro/models.hpp"
#include "qmetro/numerics.hpp"
#include "qmetro/types.hpp"

namespace qmetro {

enum class QfiMethod { generator_variance, fidelity_fd, closed_form, gaussian };

inline const char* to_string(QfiMethod m) {
  switch (m) {
    case QfiMethod::generator_variance: return "generator-variance";
    case QfiMethod::fidelity_fd: return "fidelity-fd";
    case QfiMethod::closed_form: return "closed-form";
    case QfiMethod::gaussian: return "gaussian";
  }
  return "unknown";
}

template <typename Real>
struct QfiEstimate {
  Real value = 0;
  QfiMethod method = QfiMethod::closed_form;
  std::string model_id;
  Real T = 0;
  std::vector<std::pair<std::string, Real>> diagnostics;

  /// NaN when the record has no such entry.
  Real diagnostic(std::string_view name) const {
    for (const auto& [k, v] : diagnostics) {
      if (k == name) return v;
    }
    return std::numeric_limits<Real>::quiet_NaN();
  }
};

namespace detail {

template <typename Real>
Real clamp_qfi(Real v) {
  return v < 0 && v > Real(-1e-10) ? Real(0) : v;
}

}  // namespace detail

/// 4 Var(h) on `probe`. For h = i (dU/df) U^dag the probe is the evolved
/// state U|psi0>.
template <typename Real>
QfiEstimate<Real> qfi_from_generator(const StateVector<Real>& probe, const GeneratorResult<Real>& h,
                                     std::string model_id = {}) {
  require_same_layout(probe.layout(), h.h_op.layout(), "qfi_from_generator");
  QfiEstimate<Real> est;
  est.value = detail::clamp_qfi(Real(4) * variance(probe, h.h_op));
  est.method = QfiMethod::generator_variance;
  est.model_id = std::move(model_id);
  est.T = h.T;
  est.diagnostics = {{"antihermitian_residual", h.antihermitian_residual}};
  switch (h.method) {
    case GeneratorMethod::series:
      est.diagnostics.push_back({"terms_used", Real(h.terms_used)});
      est.diagnostics.push_back({"last_term_norm", h.last_term_norm});
      est.diagnostics.push_back({"truncated", h.truncated ? Real(1) : Real(0)});
      break;
    case GeneratorMethod::integral:
      est.diagnostics.push_back({"quadrature_points", Real(h.quadrature_points)});
      break;
    case GeneratorMethod::propagator_derivative: break;
  }
  return est;
}

/// Evolve psi0, build h with the chosen construction and return 4 Var(h).
/// The series stopping rule is measured on buffered_indices() of the layout.
template <typename Real>
QfiEstimate<Real> qfi_generator_variance(const Operator<Real>& H, const Operator<Real>& dH,
                                         const StateVector<Real>& psi0, Real T,
                                         GeneratorMethod method = GeneratorMethod::integral,
                                         std::string model_id = {}) {
  const HermitianSpectrum<Real> spectrum(H);
  const StateVector<Real> probe = spectrum.evolve(psi0, T);
  if (method == GeneratorMethod::series) {
    SeriesOptions<Real> opt;
    opt.check_subspace = buffered_indices(H.layout());
    return qfi_from_generator(probe, generator_series(H, dH, T, opt), std::move(model_id));
  }
  if (method == GeneratorMethod::integral) {
    return qfi_from_generator(probe, generator_integral(spectrum, dH, T), std::move(model_id));
  }
  throw InvalidArgument("qfi_generator_variance: propagator construction needs H(f); use generator_from_propagator");
}

template <typename Real>
struct FidelityOptions {
  Real delta = Real(1e-4);
  Real max_richardson_rel = Real(1e-3);
};

/// Fidelity-susceptibility estimate 8 (1 - |<psi(f - s/2)|psi(f + s/2)>|) / s^2
/// at s = delta and delta/2, combined by one Richardson step.
template <typename Real>
QfiEstimate<Real> qfi_fidelity_states(const std::function<CVector<Real>(Real)>& state, Real f, Real T,
                                      const FidelityOptions<Real>& opt = {}, std::string model_id = {}) {
  if (!(opt.delta > 0)) throw InvalidArgument("qfi_fidelity: delta must be > 0");
  QfiEstimate<Real> est;
  est.method = QfiMethod::fidelity_fd;
  est.model_id = std::move(model_id);
  est.T = T;
  if (T == 0) {
    est.diagnostics = {{"delta", opt.delta}};
    return est;
  }
  auto estimate = [&](Real s) {
    const CVector<Real> a = state(f - s / 2);
    const CVector<Real> b = state(f + s / 2);
    const Complex<Real> z = a.dot(b);
    const Complex<Real> phase = std::abs(z) > 0 ? std::conj(z) / std::abs(z) : Complex<Real>(1);
    const Real one_minus = Real(0.5) * (a - phase * b).squaredNorm();  // 1 - |<a|b>|
    return Real(8) * one_minus / (s * s);
  };
  const Real coarse = estimate(opt.delta);
  const Real fine = estimate(opt.delta / 2);
  const Real value = (Real(4) * fine - coarse) / Real(3);
  const Real spread = std::abs(fine - coarse);
  const Real rel = spread / std::max(std::abs(value), Real(1e-300));
  est.value = detail::clamp_qfi(value);
  est.diagnostics = {{"delta", opt.delta}, {"half_delta", opt.delta / 2}, {"coarse", coarse},
                     {"fine", fine},       {"richardson_rel", rel}};
  if (spread > opt.max_richardson_rel * std::abs(value) + Real(1e-9)) {
    throw StepSizeError("qfi_fidelity: Richardson steps disagree by " + std::to_string(double(rel)) +
                        " (relative); the quadratic regime does not hold at this delta");
  }
  return est;
}

template <typename Real>
QfiEstimate<Real> qfi_fidelity(const std::function<Operator<Real>(Real)>& H_of_f, const StateVector<Real>& psi0,
                               Real f, Real T, const FidelityOptions<Real>& opt = {}, std::string model_id = {}) {
  return qfi_fidelity_states<Real>(
      [&](Real x) { return HermitianSpectrum<Real>(H_of_f(x)).apply(psi0.amplitudes(), T); }, f, T, opt,
      std::move(model_id));
}

/// Same oracle with sparse Taylor propagation, for spaces beyond dense reach.
template <typename Real>
QfiEstimate<Real> qfi_fidelity_sparse(const std::function<SparseCMatrix<Real>(Real)>& H_of_f,
                                      const CVector<Real>& psi0, Real f, Real T, const FidelityOptions<Real>& opt = {},
                                      std::string model_id = {}) {
  return qfi_fidelity_states<Real>([&](Real x) { return evolve_taylor<Real>(H_of_f(x), psi0, T); }, f, T, opt,
                                   std::move(model_id));
}

template <typename Real>
QfiEstimate<Real> closed_form_estimate(Real value, std::string model_id, Real T) {
  QfiEstimate<Real> est;
  est.value = value;
  est.method = QfiMethod::closed_form;
  est.model_id = std::move(model_id);
  est.T = T;
  return est;
}

/// 1/sqrt(nu F). F = 0 gives +inf: no finite deviation is implied.
template <typename Real>
Real qcrb(Real F, long nu = 1) {
  if (F < 0 || !std::isfinite(F)) throw InvalidArgument("qcrb: F must be finite and >= 0");
  if (nu < 1) throw InvalidArgument("qcrb: nu must be >= 1");
  if (F == 0) return std::numeric_limits<Real>::infinity();
  return Real(1) / std::sqrt(Real(nu) * F);
}

// ---------------------------------------------------------------------------
// Ramsey protocol

template <typename Real>
struct MeasurementRecord {
  Real f = 0;
  Real expectation_A = 0;
  Real variance_A = 0;
  Real slope = std::numeric_limits<Real>::quiet_NaN();    // d<A>/df
  Real delta_f = std::numeric_limits<Real>::quiet_NaN();  // Delta A / |slope|
};

template <typename Real>
Index ramsey_dim(Real g, Real f, Real T, const OscillatorState<Real>& alpha0) {
  ModelSpec<Real> spec;
  spec.family = ModelFamily::ramsey;
  spec.g = g;
  spec.f = f;
  spec.T_hint = T;
  spec.oscillator = alpha0;
  return default_dims(spec).front();
}

/// Final state of pulse(X, pi/2) -> exp(-i(g sz P - f X)T) -> pulse(Y, pi/2)
/// applied to |g> (x) |alpha0>. dim = 0 selects the default truncation.
template <typename Real>
StateVector<Real> ramsey_sequence(Real g, Real f, Real T, const OscillatorState<Real>& alpha0, Index dim = 0) {
  ModelSpec<Real> spec;
  spec.family = ModelFamily::ramsey;
  spec.g = g;
  spec.f = f;
  spec.T_hint = T;
  spec.oscillator = alpha0;
  spec.qubit = QubitInit::ground;
  if (dim > 0) spec.dims = {dim};
  const Model<Real> model = build_hamiltonian(spec);
  const SpaceLayout& layout = model.H.layout();
  const auto px = embed(pulse_x_half<Real>(), 0, layout);
  const auto py = embed(pulse_y_half<Real>(), 0, layout);
  CVector<Real> amp = px.matrix() * model.psi0.amplitudes();
  // H commutes with sigma_z: evolve the |g> and |e> oscillator blocks apart
  const Index d = layout.stride(0);
  const SpaceLayout osc = SpaceLayout::oscillator(d);
  for (Index q = 0; q < 2; ++q) {
    const Operator<Real> block(osc, model.H.matrix().block(q * d, q * d, d, d));
    amp.segment(q * d, d) = HermitianSpectrum<Real>(block).apply(amp.segment(q * d, d), T);
  }
  StateVector<Real> out(layout, py.matrix() * amp);
  require_no_leak(out, "ramsey_sequence");
  return out;
}

/// A = (1/2)(|g> + i|e>)(<g| - i<e|) (x) I on a [qubit, oscillator...] layout.
template <typename Real>
Operator<Real> measurement_operator_A(const SpaceLayout& layout) {
  CMatrix<Real> a(2, 2);
  a << Complex<Real>(0.5), Complex<Real>(0, -0.5), Complex<Real>(0, 0.5), Complex<Real>(0.5);
  return embed(Operator<Real>(SpaceLayout::qubit(), a), 0, layout);
}

template <typename Real>
MeasurementRecord<Real> measure_A(const StateVector<Real>& psi_f) {
  const auto& layout = psi_f.layout();
  bool ok = layout.size() >= 2 && layout.kind(0) == SubsystemKind::qubit;
  for (Index s = 1; ok && s < layout.size(); ++s) ok = layout.kind(s) == SubsystemKind::oscillator;
  if (!ok) throw LayoutMismatch("measure_A: expects [qubit, oscillator...], got " + layout.describe());
  const Index rest = layout.stride(0);
  const auto& amp = psi_f.amplitudes();
  Real p = 0;
  for (Index r = 0; r < rest; ++r) p += std::norm(amp(r) - kI<Real> * amp(rest + r));
  p = std::clamp(p / Real(2), Real(0), Real(1));
  MeasurementRecord<Real> rec;
  rec.expectation_A = p;
  rec.variance_A = p * (Real(1) - p);
  return rec;
}

/// <A> = 1/2 - 1/2 exp(-2 g^2 T^2) cos(2 g f T^2 + 2 g T <P>) for a coherent
/// input |alpha>, <P> = 2 Im(alpha).
template <typename Real>
Real reference_expectation_A(Real g, Real f, Real T, Complex<Real> alpha) {
  const Real beta = Real(2) * g * f * T * T + Real(4) * g * T * alpha.imag();
  return Real(0.5) - Real(0.5) * std::exp(Real(-2) * g * g * T * T) * std::cos(beta);
}

template <typename Real>
Real ramsey_fringe_period(Real g, Real T) {
  if (!(g > 0) || !(T > 0)) throw InvalidArgument("Ramsey fringe requires g > 0 and T > 0");
  return std::numbers::pi_v<Real> / (g * T * T);
}

template <typename Real>
Real default_fd_step(Real g, Real T) {
  return Real(1e-5) * ramsey_fringe_period(g, T) / Real(2);
}

/// <A>, Var A, slope by central difference in f, and Delta f = Delta A / |slope|.
template <typename Real>
MeasurementRecord<Real> error_propagation_deltaf(Real g, Real f, Real T, const OscillatorState<Real>& alpha0,
                                                 Real fd_step = 0, Index dim = 0) {
  if (fd_step < 0) throw InvalidArgument("error_propagation_deltaf: fd_step must be > 0");
  if (fd_step == 0) fd_step = default_fd_step(g, T);
  if (dim == 0) dim = ramsey_dim(g, std::abs(f) + fd_step, T, alpha0);
  MeasurementRecord<Real> rec = measure_A(ramsey_sequence(g, f, T, alpha0, dim));
  rec.f = f;
  const Real up = measure_A(ramsey_sequence(g, f + fd_step, T, alpha0, dim)).expectation_A;
  const Real down = measure_A(ramsey_sequence(g, f - fd_step, T, alpha0, dim)).expectation_A;
  rec.slope = (up - down) / (Real(2) * fd_step);
  if (std::abs(rec.slope) < Real(1e-12)) {
    throw InsensitiveOperatingPoint("error_propagation_deltaf: |d<A>/df| below 1e-12 at f = " + std::to_string(double(f)));
  }
  rec.delta_f = std::sqrt(rec.variance_A) / std::abs(rec.slope);
  return rec;
}

template <typename Real>
struct FringeFit {
  Real visibility = 0;
  Real offset = 0;
  Real phase = 0;  // <A> = offset - (V/2) cos(2 g T^2 f + phase)
  Real max_residual = 0;
};

/// Sample <A> on f in [f0 - w/2, f0 + w/2), w = window * fringe period, and
/// fit offset + c cos(2gT^2 f) + s sin(2gT^2 f) by least squares. Half a
/// period already fixes all three coefficients; wider windows need a larger
/// truncation because f displaces P by 2fT.
template <typename Real>
FringeFit<Real> fit_fringe(Real g, Real T, const OscillatorState<Real>& alpha0, int samples = 24, Real f0 = 0,
                           Index dim = 0, Real window = Real(0.5)) {
  if (samples < 4) throw InvalidArgument("fit_fringe: need at least 4 samples");
  if (!(window > 0) || window > 1) throw InvalidArgument("fit_fringe: window must be in (0, 1]");
  const Real width = window * ramsey_fringe_period(g, T);
  const Real omega = Real(2) * g * T * T;
  if (dim == 0) dim = ramsey_dim(g, std::abs(f0) + width / Real(2), T, alpha0);
  RMatrix<Real> design(samples, 3);
  RVector<Real> y(samples);
  for (int k = 0; k < samples; ++k) {
    const Real f = f0 - width / Real(2) + width * Real(k) / Real(samples);
    design(k, 0) = 1;
    design(k, 1) = std::cos(omega * f);
    design(k, 2) = std::sin(omega * f);
    y(k) = measure_A(ramsey_sequence(g, f, T, alpha0, dim)).expectation_A;
  }
  const RVector<Real> c = design.colPivHouseholderQr().solve(y);
  FringeFit<Real> fit;
  fit.offset = c(0);
  fit.visibility = Real(2) * std::hypot(c(1), c(2));
  fit.phase = std::atan2(c(2), -c(1));
  fit.max_residual = (y - design * c).cwiseAbs().maxCoeff();
  return fit;
}

/// Maximize |d<A>/df| / Delta A (= 1/Delta f) over one sensitivity period,
/// by grid scan then golden-section refinement.
template <typename Real>
MeasurementRecord<Real> find_operating_point(Real g, Real T, const OscillatorState<Real>& alpha0, Index dim = 0,
                                             int grid = 12) {
  // the window is centred on f = 0 to keep the required truncation small
  const Real span = ramsey_fringe_period(g, T) / Real(2);
  const Real origin = -span / Real(2);
  const Real step = default_fd_step(g, T);
  if (dim == 0) dim = ramsey_dim(g, span / Real(2) + span / Real(grid) + step, T, alpha0);
  auto sensitivity = [&](Real f) -> Real {
    try {
      return Real(1) / error_propagation_deltaf(g, f, T, alpha0, step, dim).delta_f;
    } catch (const InsensitiveOperatingPoint&) {
      return 0;
    }
  };
  int best = 0;
  Real best_val = -1;
  for (int k = 0; k < grid; ++k) {
    const Real v = sensitivity(origin + span * Real(k) / Real(grid));
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  const Real lo = origin + span * Real(best - 1) / Real(grid);
  const Real hi = origin + span * Real(best + 1) / Real(grid);
  const auto peak = golden_section_maximize<Real>(sensitivity, lo, hi, span * Real(1e-4));
  return error_propagation_deltaf(g, peak.x, T, alpha0, step, dim);
}

// ---------------------------------------------------------------------------
// Rotated-qubit validation family

template <typename Real>
struct RotatedQubitProbe {
  StateVector<Real> initial;  // psi0 with U psi0 = probe
  StateVector<Real> probe;    // equal superposition of the two eigenvectors of h
  GeneratorResult<Real> generator;
};

/// Optimal probe for H = B(cos f sx + sin f sz): builds h by quadrature,
/// superposes its extremal eigenvectors, and pulls that back through U.
template <typename Real>
RotatedQubitProbe<Real> rotated_qubit_optimal_probe(Real B, Real f, Real T) {
  ModelSpec<Real> spec;
  spec.family = ModelFamily::rotated_qubit;
  spec.g = B;
  spec.f = f;
  const Model<Real> model = build_hamiltonian(spec);
  const HermitianSpectrum<Real> spectrum(model.H);
  auto h = generator_integral(spectrum, model.dH, T);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(h.h_op.matrix());
  CVector<Real> v = (es.eigenvectors().col(0) + es.eigenvectors().col(1)) / std::sqrt(Real(2));
  StateVector<Real> probe = StateVector<Real>::normalized(SpaceLayout::qubit(), v);
  CVector<Real> back = spectrum.propagator(T).adjoint() * probe.amplitudes();
  StateVector<Real> initial = StateVector<Real>::normalized(SpaceLayout::qubit(), back);
  return {std::move(initial), std::move(probe), std::move(h)};
}

}  // namespace qmetro

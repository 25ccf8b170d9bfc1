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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qmetro/dynamics.hpp"
#include "qmetro/models.hpp"

using namespace qmetro;
using C = std::complex<double>;
using Op = Operator<double>;
using State = StateVector<double>;

namespace {

double opnorm_on(const CMatrix<double>& m, const SpaceLayout& layout) {
  const auto idx = buffered_indices(layout);
  return operator_norm(restrict_to(m, idx));
}

ModelSpec<double> ramsey(double g, double f, double T) {
  ModelSpec<double> s;
  s.family = ModelFamily::ramsey;
  s.g = g;
  s.f = f;
  s.T_hint = T;
  return s;
}

ModelSpec<double> chain(int n, double g, double T, Index dim) {
  ModelSpec<double> s;
  s.family = ModelFamily::chain;
  s.n = n;
  s.g = g;
  s.T_hint = T;
  s.dims = {dim};
  return s;
}

SeriesOptions<double> buffered(const SpaceLayout& layout) {
  SeriesOptions<double> opt;
  opt.check_subspace = buffered_indices(layout);
  return opt;
}

}  // namespace

TEST_CASE("evolve basics") {
  const auto N = make_number<double>(8);
  const auto psi = fock_state<double>(3, 8);
  CHECK((evolve(N, psi, 0.0).amplitudes() - psi.amplitudes()).norm() == 0);
  const double T = 0.37;
  const auto out = evolve(N, psi, T);
  CHECK(std::abs(out.amplitudes()(3) - std::polar(1.0, -3 * T)) < 1e-14);

  CMatrix<double> bad = CMatrix<double>::Zero(2, 2);
  bad(0, 1) = 1;
  CHECK_THROWS_AS(evolve(Op(SpaceLayout::qubit(), bad), qubit_state<double>(QubitInit::ground), 1.0), DomainError);
  CHECK_THROWS_AS(evolve(N, fock_state<double>(0, 7), 1.0), LayoutMismatch);
  CHECK_THROWS_AS(evolve(N, psi, std::nan("")), InvalidArgument);
}

TEST_CASE("Heisenberg drift of X under the dispersive coupling") {
  auto spec = ramsey(1, 0, 0.3);
  spec.qubit = QubitInit::ground;
  const auto m = build_hamiltonian(spec);
  const auto X = embed(quadratures<double>(spec.dims.empty() ? default_dims(spec)[0] : spec.dims[0]).X, 1,
                       m.H.layout());
  const auto out = evolve(m.H, m.psi0, 0.3);
  CHECK(expectation(out, X).real() == doctest::Approx(-0.6).epsilon(1e-10));
}

TEST_CASE("evolution is unitary and composes") {
  const auto m = build_hamiltonian(ramsey(0.8, 0.4, 1.3));
  const HermitianSpectrum<double> hs(m.H);
  for (double t : {0.1, 0.7, 1.3}) {
    const auto a = hs.evolve(m.psi0, t);
    CHECK(a.amplitudes().norm() == doctest::Approx(1).epsilon(1e-10));
    const auto b = hs.evolve(hs.evolve(m.psi0, t), 0.9 - t);
    const auto c = hs.evolve(m.psi0, 0.9);
    CHECK((b.amplitudes() - c.amplitudes()).norm() < 1e-9);
  }
  const CMatrix<double> U = hs.propagator(0.6);
  CHECK((U * U.adjoint() - CMatrix<double>::Identity(U.rows(), U.cols())).norm() < 1e-10);
}

TEST_CASE("series: commuting case stops after one term") {
  const auto H0 = make_number<double>(6);
  const double f = 0.3, T = 1.7;
  const auto r = generator_series(f * H0, H0, T);
  CHECK(r.terms_used == 1);
  CHECK(!r.truncated);
  CHECK((r.h_op.matrix() - T * H0.matrix()).norm() < 1e-14);

  const auto p = generator_from_propagator<double>([&](double x) { return x * H0; }, f, T);
  CHECK((p.h_op.matrix() - T * H0.matrix()).norm() < 1e-6);
}

TEST_CASE("series: Ramsey generator has two terms") {
  for (double g : {0.5, 1.0, 2.0}) {
    for (double T : {0.25, 1.0, 2.0}) {
      const auto spec = ramsey(g, 0.3, T);
      const auto m = build_hamiltonian(spec);
      const auto& layout = m.H.layout();
      const auto r = generator_series(m.H, m.dH, T, buffered(layout));
      CHECK(r.terms_used == 2);
      CHECK(!r.truncated);
      const Index d = layout.dim(1);
      const auto X = embed(quadratures<double>(d).X, 1, layout);
      const auto sz = embed(pauli_z<double>(), 0, layout);
      const CMatrix<double> expect = (-T * X + g * T * T * sz).matrix();
      CHECK(opnorm_on(r.h_op.matrix() - expect, layout) < 1e-10);
      CHECK(r.antihermitian_residual < 1e-8);
    }
  }
}

TEST_CASE("series: chain generator has n terms") {
  struct Case {
    int n;
    double T;
    Index dim;
  };
  for (const Case c : {Case{1, 1.0, 8}, Case{2, 0.7, 10}, Case{3, 0.5, 9}, Case{4, 0.4, 6}}) {
    const auto m = build_hamiltonian(chain(c.n, 1.0, c.T, c.dim));
    const auto r = generator_series(m.H, m.dH, c.T, buffered(m.H.layout()));
    CAPTURE(c.n);
    CHECK(r.terms_used == c.n);
    CHECK(r.last_term_norm < 1e-10);
  }
}

TEST_CASE("series rejects bad input") {
  const auto m = build_hamiltonian(ramsey(1, 0, 1));
  SeriesOptions<double> opt;
  opt.abs_tol = 0;
  CHECK_THROWS_AS(generator_series(m.H, m.dH, 1.0, opt), InvalidArgument);
  CMatrix<double> bad = m.dH.matrix();
  bad(0, 1) += 1;
  CHECK_THROWS_AS(generator_series(m.H, Op(m.H.layout(), bad), 1.0), DomainError);
  SeriesOptions<double> few;
  few.max_terms = 1;
  const auto r = generator_series(m.H, m.dH, 1.0, few);
  CHECK(r.truncated);
  CHECK(r.terms_used == 1);
}

TEST_CASE("integral") {
  auto spec = ramsey(1, 0.2, 2);
  spec.dims = {200};
  const auto m = build_hamiltonian(spec);
  const auto z = generator_integral(m.H, m.dH, 0.0);
  CHECK(z.h_op.matrix().norm() == 0);
  IntegralOptions<double> few;
  few.steps = 6;
  CHECK_THROWS_AS(generator_integral(m.H, m.dH, 1.0, few), InvalidArgument);

  const HermitianSpectrum<double> hs(m.H);
  for (double T : {0.1, 0.5, 1.0, 2.0}) {
    const auto s = generator_series(m.H, m.dH, T, buffered(m.H.layout()));
    const auto q = generator_integral(hs, m.dH, T);
    CHECK(opnorm_on(s.h_op.matrix() - q.h_op.matrix(), m.H.layout()) < 1e-8);
    CHECK(q.quadrature_points >= 201);
    CHECK(q.antihermitian_residual < 1e-8);
  }
}

TEST_CASE("closed-form Simpson sum matches direct summation") {
  for (double omega : {0.0, 1e-9, 0.3, 2.0, 40.0, std::numbers::pi * 10}) {
    for (Index N : {8, 50, 200}) {
      const double T = 1.3, h = T / double(N);
      C direct = 1.0 + std::polar(1.0, -omega * T);
      for (Index k = 1; k < N; ++k) direct += double(k % 2 ? 4 : 2) * std::polar(1.0, -omega * h * double(k));
      direct *= h / 3;
      CHECK(std::abs(detail::simpson_phase_sum(omega, T, N) - direct) < 1e-12);
    }
  }
}

// Single-oscillator families, with truncations large enough that the
// truncation edge cannot reach the buffered block within T.
TEST_CASE("three generator constructions agree in operator norm") {
  std::vector<ModelSpec<double>> specs;
  for (auto [T, d] : {std::pair{0.1, Index(60)}, std::pair{1.0, Index(110)}, std::pair{2.0, Index(200)}}) {
    auto s = ramsey(1.0, 0.1, T);
    s.dims = {d};
    specs.push_back(s);
  }
  {
    ModelSpec<double> s;
    s.family = ModelFamily::classical_force;
    s.f = 0.3;
    s.T_hint = 2;
    specs.push_back(s);
  }
  {
    ModelSpec<double> s;
    s.family = ModelFamily::power_g;
    s.n = 2;
    s.g = 1;
    s.dims = {90};
    s.T_hint = 0.5;
    specs.push_back(s);
  }
  {
    ModelSpec<double> s;
    s.family = ModelFamily::rotated_qubit;
    s.g = 1.3;
    s.f = 0.4;
    s.T_hint = 1.5;
    specs.push_back(s);
  }
  for (const auto& spec : specs) {
    CAPTURE(spec.id());
    CAPTURE(spec.T_hint);
    const double T = spec.T_hint;
    const auto m = build_hamiltonian(spec);
    const auto s = generator_series(m.H, m.dH, T, buffered(m.H.layout()));
    const auto q = generator_integral(m.H, m.dH, T);
    const auto p = generator_from_propagator(hamiltonian_of_f(spec), spec.f, T);
    const auto& layout = m.H.layout();
    CHECK(opnorm_on(s.h_op.matrix() - q.h_op.matrix(), layout) < 1e-6);
    CHECK(opnorm_on(s.h_op.matrix() - p.h_op.matrix(), layout) < 1e-6);
    CHECK(opnorm_on(q.h_op.matrix() - p.h_op.matrix(), layout) < 1e-6);
    CHECK(q.h_op.is_hermitian(1e-10));
  }
}

// Coupled oscillators: the buffered block is not shielded from the edge at
// any affordable truncation, so the series is checked against its exact
// form and the two evolution-based constructions against each other.
TEST_CASE("chain generator is a sum over downstream quadratures") {
  for (auto [n, T, d] : {std::tuple{2, 1.0, Index(16)}, std::tuple{3, 0.5, Index(8)}}) {
    const double g = 1;
    const auto spec = chain(n, g, T, d);
    const auto m = build_hamiltonian(spec);
    const auto& layout = m.H.layout();
    const auto s = generator_series(m.H, m.dH, T, buffered(layout));
    auto expect = Op::zero(layout);
    double c = T;
    for (int k = 0; k < n; ++k) {
      expect -= c * embed(quadratures<double>(d).X, k, layout);
      c *= -2 * g * T / double(k + 2);
    }
    CHECK(opnorm_on(s.h_op.matrix() - expect.matrix(), layout) < 1e-10);

    const HermitianSpectrum<double> hs(m.H);
    const auto q = generator_integral(hs, m.dH, T);
    const auto p = generator_from_propagator(hamiltonian_of_f(spec), 0.0, T);
    CHECK(operator_norm(q.h_op.matrix() - p.h_op.matrix()) < 1e-6);
    const auto psi = hs.evolve(m.psi0, T);
    CHECK(((q.h_op.matrix() - p.h_op.matrix()) * psi.amplitudes()).norm() < 1e-6);
  }
}

TEST_CASE("two-qubit model: constructions agree on the evolved probe") {
  ModelSpec<double> s;
  s.family = ModelFamily::nqubit_ramsey;
  s.n = 2;
  s.g = 1;
  s.f = 0.2;
  s.dims = {15};
  s.T_hint = 0.5;
  const auto m = build_hamiltonian(s);
  const HermitianSpectrum<double> hs(m.H);
  const auto psi = hs.evolve(m.psi0, 0.5);
  const auto a = generator_series(m.H, m.dH, 0.5, buffered(m.H.layout()));
  const auto q = generator_integral(hs, m.dH, 0.5);
  const auto p = generator_from_propagator(hamiltonian_of_f(s), s.f, 0.5);
  CHECK(a.terms_used == 2);
  CHECK(((a.h_op.matrix() - q.h_op.matrix()) * psi.amplitudes()).norm() < 1e-6);
  CHECK(((p.h_op.matrix() - q.h_op.matrix()) * psi.amplitudes()).norm() < 1e-6);
  PropagatorOptions<double> bad;
  bad.delta = 0;
  CHECK_THROWS_AS(generator_from_propagator(hamiltonian_of_f(s), 0.0, 0.5, bad), InvalidArgument);
}

TEST_CASE("factorization identity") {
  CHECK(check_ramsey_factorization(1.0, 0.0, 0.7, 30) == 0);
  CHECK(check_ramsey_factorization(0.0, 0.5, 0.7, 30) == 0);
  CHECK(check_ramsey_factorization(1.0, 0.5, 0.5, 80, 30) < 1e-8);
  for (double T : {0.25, 0.5, 0.75, 1.0}) CHECK(check_ramsey_factorization(1.0, 0.5, T, 80) < 1e-8);
  // without a buffer the truncation edge spoils the identity
  CHECK(check_ramsey_factorization(1.0, 0.5, 1.0, 80, 0) > 1e-3);
  CHECK_THROWS_AS(check_ramsey_factorization(1.0, 0.5, 1.0, 10, 10), InvalidArgument);
}

TEST_CASE("sparse Taylor propagation matches the dense propagator") {
  ModelSpec<double> spec;
  spec.family = ModelFamily::ramsey;
  spec.g = 0.8;
  spec.f = 0.3;
  spec.T_hint = 1.5;
  spec.oscillator = OscillatorState<double>::coherent({0.4, 0.2});
  const auto m = build_hamiltonian(spec);
  const SparseCMatrix<double> Hs = m.H.matrix().sparseView();
  for (double T : {0.0, 0.1, 1.5, -0.7}) {
    const auto dense = evolve(m.H, m.psi0, T).amplitudes();
    const auto sparse = evolve_taylor<double>(Hs, m.psi0.amplitudes(), T);
    CHECK((dense - sparse).norm() < 1e-12);
  }
  CHECK_THROWS_AS(evolve_taylor<double>(Hs, CVector<double>::Zero(3), 1.0), InvalidDimension);
}

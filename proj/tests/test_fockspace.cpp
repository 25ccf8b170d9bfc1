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
#include <vector>

#include "qmetro/fockspace.hpp"

using namespace qmetro;
using C = std::complex<double>;
using Op = Operator<double>;
using State = StateVector<double>;

namespace {

double max_abs(const CMatrix<double>& m) { return m.cwiseAbs().maxCoeff(); }

// consecutive levels 0..dim-2 of a single oscillator
std::vector<Index> interior(Index dim) {
  std::vector<Index> idx;
  for (Index k = 0; k + 1 < dim; ++k) idx.push_back(k);
  return idx;
}

}  // namespace

TEST_CASE("layout validation") {
  CHECK(SpaceLayout::make(1, {5, 4}).total_dim() == 40);
  CHECK(SpaceLayout::make(2, {3}).stride(0) == 6);
  CHECK_THROWS_AS(SpaceLayout::oscillator(1), InvalidDimension);
  CHECK_THROWS_AS(SpaceLayout({{SubsystemKind::qubit, 3}}), InvalidDimension);
  // qubits must precede oscillators
  CHECK_THROWS_AS(SpaceLayout({{SubsystemKind::oscillator, 3}, {SubsystemKind::qubit, 2}}), InvalidArgument);
  const auto l = SpaceLayout::make(1, {3, 4});
  CHECK(l.level(1 * 12 + 2 * 4 + 3, 0) == 1);
  CHECK(l.level(1 * 12 + 2 * 4 + 3, 1) == 2);
  CHECK(l.level(1 * 12 + 2 * 4 + 3, 2) == 3);
}

TEST_CASE("annihilation operator") {
  CHECK_THROWS_AS(make_annihilation<double>(1), InvalidDimension);
  CHECK_THROWS_AS(make_annihilation<double>(0), InvalidDimension);

  const auto a2 = make_annihilation<double>(2).matrix();
  CMatrix<double> e2(2, 2);
  e2 << 0, 1, 0, 0;
  CHECK(max_abs(a2 - e2) == 0);

  const auto a3 = make_annihilation<double>(3).matrix();
  CHECK(a3(0, 1) == C(1));
  CHECK(std::abs(a3(1, 2) - std::sqrt(2.0)) < 1e-15);
  CHECK(a3.cwiseAbs().sum() == doctest::Approx(1 + std::sqrt(2.0)));

  for (Index d : {2, 5, 17}) {
    const auto a = make_annihilation<double>(d).matrix();
    const CMatrix<double> n = a.adjoint() * a;
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        CHECK(std::abs(n(i, j) - (i == j ? C(double(i)) : C(0))) < 1e-13);
      }
    }
    CHECK(max_abs(make_number<double>(d).matrix() - n) < 1e-13);
  }
}

TEST_CASE("quadratures") {
  const auto q2 = quadratures<double>(2);
  CHECK(max_abs(q2.X.matrix() - pauli_x<double>().matrix()) == 0);

  for (Index d : {2, 3, 8, 30}) {
    const auto q = quadratures<double>(d);
    CHECK(q.X.is_hermitian());
    CHECK(q.P.is_hermitian());
    const auto c = commutator(q.X, q.P).matrix();
    const auto idx = interior(d);
    const CMatrix<double> inner_block = restrict_to(c, idx);
    const CMatrix<double> target = C(0, 2) * CMatrix<double>::Identity(d - 1, d - 1);
    CHECK(max_abs(inner_block - target) < 1e-12);
    // the identity breaks at the top level
    CHECK(std::abs(c(d - 1, d - 1) - C(0, 2)) > 1);
    CHECK(variance(fock_state<double>(0, d), q.X) == doctest::Approx(1).epsilon(1e-14));
  }
}

TEST_CASE("pauli algebra follows the (g, e) ordering") {
  const auto sx = pauli_x<double>().matrix(), sy = pauli_y<double>().matrix(), sz = pauli_z<double>().matrix();
  CHECK(max_abs(sx * sy - C(0, 1) * sz) < 1e-15);
  CHECK(sz(0, 0) == C(-1));
  CHECK(sz(1, 1) == C(1));
  for (const auto& s : {sx, sy, sz}) CHECK(max_abs(s * s - CMatrix<double>::Identity(2, 2)) < 1e-15);
}

TEST_CASE("embedding") {
  const auto layout = SpaceLayout::make(1, {4});
  const auto sz = pauli_z<double>();
  const auto e = embed(sz, 0, layout);
  CHECK(max_abs(e.matrix() - kron(sz, Op::identity(SpaceLayout::oscillator(4))).matrix()) == 0);

  const auto l2 = SpaceLayout::make(0, {3, 3});
  CHECK(max_abs(embed(Op::identity(SpaceLayout::oscillator(3)), 1, l2).matrix() -
                CMatrix<double>::Identity(9, 9)) == 0);

  const auto X = quadratures<double>(3).X;
  const auto vac = State::basis(l2, 0);
  const CVector<double> out = embed(X, 1, l2).matrix() * vac.amplitudes();
  CHECK(std::abs(out(1) - C(1)) < 1e-15);
  CHECK(out.norm() == doctest::Approx(1));

  CHECK_THROWS_AS(embed(X, 2, l2), InvalidArgument);
  CHECK_THROWS_AS(embed(quadratures<double>(4).X, 1, l2), InvalidDimension);

  SUBCASE("homomorphism on one site") {
    const auto layout3 = SpaceLayout::make(1, {4, 3});
    const auto q = quadratures<double>(4);
    const Op prod = q.X * q.P;
    const auto lhs = embed(prod, 1, layout3).matrix();
    const CMatrix<double> rhs = embed(q.X, 1, layout3).matrix() * embed(q.P, 1, layout3).matrix();
    CHECK(max_abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("commutator properties") {
  const auto layout = SpaceLayout::make(1, {6});
  const auto q = quadratures<double>(6);
  const auto X = embed(q.X, 1, layout), P = embed(q.P, 1, layout);
  const auto sz = embed(pauli_z<double>(), 0, layout);
  const auto sx = embed(pauli_x<double>(), 0, layout);

  CHECK(max_abs(commutator(X, X).matrix()) == 0);
  CHECK(max_abs(commutator(sz, X).matrix()) == 0);
  CHECK(max_abs((commutator(X, P) + commutator(P, X)).matrix()) < 1e-12);
  const double a = 0.7, b = -1.3;
  const auto lin = commutator(a * X + b * sx, P).matrix();
  const auto sep = (a * commutator(X, P) + b * commutator(sx, P)).matrix();
  CHECK(max_abs(lin - sep) < 1e-12);

  CHECK_THROWS_AS(commutator(X, quadratures<double>(6).X), LayoutMismatch);
}

TEST_CASE("operator arithmetic keeps layouts honest") {
  const auto a = quadratures<double>(3).X;
  const auto b = quadratures<double>(4).X;
  CHECK_THROWS_AS(a + b, LayoutMismatch);
  CHECK_THROWS_AS(a * b, LayoutMismatch);
  CHECK_THROWS_AS(Op(SpaceLayout::oscillator(3), CMatrix<double>::Zero(4, 4)), InvalidDimension);
  const Op p = power(a, 3);
  CHECK(max_abs(p.matrix() - a.matrix() * a.matrix() * a.matrix()) < 1e-13);
  CHECK(max_abs(power(a, 0).matrix() - CMatrix<double>::Identity(3, 3)) == 0);
}

TEST_CASE("state normalization") {
  CVector<double> v(2);
  v << 1, 1;
  CHECK_THROWS_AS(State(SpaceLayout::qubit(), v), InvalidArgument);
  const auto s = State::normalized(SpaceLayout::qubit(), v);
  CHECK(s.amplitudes().norm() == doctest::Approx(1).epsilon(1e-15));
  CHECK_THROWS_AS(State::normalized(SpaceLayout::qubit(), CVector<double>::Zero(2)), InvalidArgument);
  CHECK_THROWS_AS(State::basis(SpaceLayout::qubit(), 2), InvalidArgument);
}

TEST_CASE("coherent states") {
  const auto vac = coherent_state<double>(C(0), 10);
  CHECK(std::abs(vac.amplitudes()(0) - C(1)) < 1e-15);
  CHECK(vac.amplitudes().tail(9).norm() == 0);

  for (const C alpha : {C(1, 0), C(0.5, -1.5), C(-2, 1), C(3, 3)}) {
    const double n = std::norm(alpha);
    const auto dim = Index(std::ceil(n + 10 * std::sqrt(n + 1)));
    const auto psi = coherent_state<double>(alpha, dim);
    CHECK(psi.amplitudes().norm() == doctest::Approx(1).epsilon(1e-14));
    const C mean_a = expectation(psi, make_annihilation<double>(dim));
    CHECK(std::abs(mean_a - alpha) < 1e-8);
    const auto q = quadratures<double>(dim);
    CHECK(variance(psi, q.X) == doctest::Approx(1).epsilon(1e-8));
    CHECK(variance(psi, q.P) == doctest::Approx(1).epsilon(1e-8));
    CHECK(expectation(psi, q.P).real() == doctest::Approx(2 * alpha.imag()).epsilon(1e-8));
    CHECK(tail_mass(psi, 0, leak_levels(dim)) < kLeakThreshold);
  }
  // far too small a space for |alpha|^2 = 25
  CHECK_THROWS_AS(coherent_state<double>(C(5, 0), 20), TruncationLeak);
  try {
    coherent_state<double>(C(5, 0), 20);
  } catch (const TruncationLeak& e) {
    CHECK(e.mass() > kLeakThreshold);
  }
}

TEST_CASE("default truncation rule") {
  CHECK(default_truncation(0) == 30);
  CHECK(default_truncation(2) == Index(std::ceil(4 + 10 * std::sqrt(5.0) + 20)));
  for (double a : {0.0, 1.0, 2.5, 4.0}) {
    const Index d = default_truncation(a);
    const auto psi = coherent_state<double>(C(a, 0), d);
    CHECK(truncation_leak(psi) < kLeakThreshold);
  }
}

TEST_CASE("squeezed vacuum") {
  for (double r : {0.0, 0.3, -0.5, 0.8}) {
    const Index d = 80;
    const auto psi = squeezed_vacuum<double>(r, d);
    const auto q = quadratures<double>(d);
    CHECK(variance(psi, q.X) == doctest::Approx(std::exp(-2 * r)).epsilon(1e-9));
    CHECK(variance(psi, q.P) == doctest::Approx(std::exp(2 * r)).epsilon(1e-9));
    CHECK(std::abs(expectation(psi, q.X)) < 1e-12);
  }
  CHECK_THROWS_AS(squeezed_vacuum<double>(2.5, 20), TruncationLeak);
}

TEST_CASE("variance") {
  const auto q = quadratures<double>(12);
  CHECK(variance(fock_state<double>(0, 12), q.X) == doctest::Approx(1));
  CHECK(variance(fock_state<double>(3, 12), make_number<double>(12)) < 1e-24);

  CVector<double> v(2);
  v << C(1, 0), C(0, -1);
  const auto plus_y = State::normalized(SpaceLayout::qubit(), v);
  CHECK(variance(plus_y, pauli_z<double>()) == doctest::Approx(1).epsilon(1e-15));
  CHECK(variance(plus_y, pauli_y<double>()) < 1e-24);

  CHECK_THROWS_AS(variance(fock_state<double>(0, 12), make_annihilation<double>(12)), DomainError);
  CHECK_THROWS_AS(variance(fock_state<double>(0, 11), q.X), LayoutMismatch);
  for (int k = 0; k < 8; ++k) CHECK(variance(fock_state<double>(k, 12), q.X) >= 0);
}

TEST_CASE("covariance of a product state vanishes across sites") {
  const auto layout = SpaceLayout::make(1, {20});
  const auto psi = kron(State::normalized(SpaceLayout::qubit(), CVector<double>::Ones(2)),
                        coherent_state<double>(C(0.4, 0.2), 20));
  const auto X = embed(quadratures<double>(20).X, 1, layout);
  const auto sz = embed(pauli_z<double>(), 0, layout);
  CHECK(std::abs(covariance(psi, X, sz)) < 1e-13);
  CHECK(covariance(psi, X, X) == doctest::Approx(variance(psi, X)).epsilon(1e-13));
}

TEST_CASE("truncation diagnostics") {
  CHECK(leak_levels(10) == 2);
  CHECK(leak_levels(45) == 5);
  CHECK(boundary_buffer(80) == 27);
  const auto layout = SpaceLayout::make(1, {9});
  const auto idx = buffered_indices(layout);
  CHECK(idx.size() == 2 * 6);
  for (Index i : idx) CHECK(layout.level(i, 1) < 6);

  const auto top = fock_state<double>(9, 10);
  CHECK(truncation_leak(top) == doctest::Approx(1));
  CHECK_THROWS_AS(require_no_leak(top, "test"), TruncationLeak);
  CHECK_NOTHROW(require_no_leak(fock_state<double>(1, 10), "test"));
}

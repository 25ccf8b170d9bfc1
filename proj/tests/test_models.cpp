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

#include "qmetro/metrology.hpp"
#include "qmetro/models.hpp"

using namespace qmetro;
using C = std::complex<double>;
using Op = Operator<double>;

namespace {

ModelSpec<double> make(ModelFamily fam, double g, double f, int n, double T, std::vector<Index> dims = {}) {
  ModelSpec<double> s;
  s.family = fam;
  s.g = g;
  s.f = f;
  s.n = n;
  s.T_hint = T;
  s.dims = std::move(dims);
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("family identifiers round-trip") {
  for (const auto& [fam, id] : kFamilyIds) {
    CHECK(parse_family(id) == fam);
    CHECK(family_id(fam) == id);
  }
  CHECK(!parse_family("ramsey2").has_value());
}

TEST_CASE("ModelSpec validation") {
  CHECK_THROWS_AS(make(ModelFamily::chain, 1, 0, 0, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(make(ModelFamily::power_g, 1, 0, 0, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(make(ModelFamily::ramsey, -1, 0, 1, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(make(ModelFamily::ramsey, 1, std::nan(""), 1, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(make(ModelFamily::chain, 1, 0, 3, 1, {5, 5}).validate(), InvalidArgument);
  CHECK_NOTHROW(make(ModelFamily::chain, 1, 0, 3, 1, {5, 6, 7}).validate());
  CHECK_THROWS_AS(build_hamiltonian(make(ModelFamily::ramsey, 1, 0, 1, 1, {1})), InvalidDimension);
}

TEST_CASE("Hamiltonian construction") {
  SUBCASE("single-site chain is the classical force model") {
    const auto m = build_hamiltonian(make(ModelFamily::chain, 1, 0.7, 1, 1, {12}));
    const auto X = quadratures<double>(12).X;
    CHECK((m.H.matrix() + 0.7 * X.matrix()).norm() < 1e-14);
    CHECK((m.dH.matrix() + X.matrix()).norm() == 0);
  }
  SUBCASE("Ramsey entrywise") {
    const auto m = build_hamiltonian(make(ModelFamily::ramsey, 1, 0.5, 1, 1, {9}));
    const auto q = quadratures<double>(9);
    const CMatrix<double> expect =
        kron(pauli_z<double>(), q.P).matrix() - 0.5 * kron(Op::identity(SpaceLayout::qubit()), q.X).matrix();
    CHECK((m.H.matrix() - expect).cwiseAbs().maxCoeff() == 0);
    CHECK(m.H.is_hermitian());
    // post-pulse qubit state (|g> - i|e>)/sqrt(2), oscillator in vacuum
    CHECK(std::abs(m.psi0.amplitudes()(0) - C(1 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(m.psi0.amplitudes()(9) - C(0, -1 / std::sqrt(2.0))) < 1e-15);
  }
  SUBCASE("chain coupling count") {
    const Index d = 4;
    const auto m = build_hamiltonian(make(ModelFamily::chain, 1, 0.3, 3, 1, {d}));
    const auto& layout = m.H.layout();
    const auto q = quadratures<double>(d);
    const auto expect = -0.3 * embed(q.X, 0, layout) +
                        site_product<double>(layout, {{0, q.P}, {1, q.X}}) +
                        site_product<double>(layout, {{1, q.P}, {2, q.X}});
    CHECK((m.H.matrix() - expect.matrix()).norm() < 1e-13);
    CHECK(m.H.is_hermitian());
  }
  SUBCASE("cat state for the multi-qubit model") {
    const auto m = build_hamiltonian(make(ModelFamily::nqubit_ramsey, 1, 0, 2, 0.5, {3}));
    CHECK(m.H.layout().describe() == SpaceLayout::make(2, {3, 3}).describe());
    const auto cat = cat_state<double>(2);
    CHECK(std::abs(cat.amplitudes()(0) - C(1 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(cat.amplitudes()(3) - C(0, -1 / std::sqrt(2.0))) < 1e-15);
  }
  SUBCASE("power family uses X^n and a ground-state qubit") {
    const auto m = build_hamiltonian(make(ModelFamily::power_g, 1, 0.2, 3, 1, {10}));
    const auto X3 = power(quadratures<double>(10).X, 3);
    CHECK((m.dH.matrix() - embed(X3, 1, m.H.layout()).matrix()).norm() < 1e-12);
    CHECK(std::abs(m.psi0.amplitudes()(0) - C(1)) < 1e-15);
  }
  SUBCASE("rotated qubit derivative") {
    const double B = 1.1, f = 0.3, h = 1e-6;
    const auto spec = make(ModelFamily::rotated_qubit, B, f, 1, 1);
    const auto Hf = hamiltonian_of_f(spec);
    const CMatrix<double> fd = (Hf(f + h).matrix() - Hf(f - h).matrix()) / (2 * h);
    CHECK((fd - build_hamiltonian(spec).dH.matrix()).norm() < 1e-9);
  }
}

TEST_CASE("Ramsey closed form") {
  CHECK(qfi_ramsey_closed(1.0, 1.0, 1.0) == 8);
  CHECK(qfi_ramsey_closed(0.0, 1.5, 2.0) == doctest::Approx(4 * 1.5 * 1.5 * 2));
  CHECK(qfi_ramsey_closed(1.3, 0.0, 1.0) == 0);
  CHECK_THROWS_AS(qfi_ramsey_closed(1.0, 1.0, -1.0), InvalidArgument);
  // the generator-variance oracle on the truncated model
  for (double g : {0.5, 2.0}) {
    for (const auto& osc : {OscillatorState<double>::vacuum(), OscillatorState<double>::squeezed(0.3)}) {
      auto spec = make(ModelFamily::ramsey, g, 0, 1, 1);
      spec.oscillator = osc;
      const auto m = build_hamiltonian(spec);
      const auto est = qfi_generator_variance(m.H, m.dH, m.psi0, 1.0);
      CHECK(rel(est.value, qfi_ramsey_closed(g, 1.0, osc.x_variance())) < 1e-8);
    }
  }
}

TEST_CASE("multi-qubit closed form") {
  for (double g : {0.5, 1.0}) {
    for (double T : {0.3, 2.0}) CHECK(qfi_nqubit_closed(g, T, 1, 1.3) == doctest::Approx(qfi_ramsey_closed(g, T, 1.3)));
  }
  CHECK(qfi_nqubit_closed(1.0, 1.0, 2, 1.0) == 24);
  // quadratic growth of the leading term with n
  const double a = qfi_nqubit_closed(1.0, 10.0, 10, 1.0), b = qfi_nqubit_closed(1.0, 10.0, 20, 1.0);
  CHECK(b / a == doctest::Approx(4).epsilon(1e-3));
  CHECK_THROWS_AS(qfi_nqubit_closed(1.0, 1.0, 0, 1.0), InvalidArgument);
}

TEST_CASE("multi-qubit Fock oracle") {
  const double T = 0.5;
  const auto spec = make(ModelFamily::nqubit_ramsey, 1, 0, 2, T, {15});
  const auto m = build_hamiltonian(spec);
  const auto est = qfi_generator_variance(m.H, m.dH, m.psi0, T);
  CHECK(rel(est.value, qfi_nqubit_closed(1.0, T, 2, 1.0)) < 1e-3);
}

TEST_CASE("power-law generator") {
  const Index d = 60;
  const auto vac = fock_state<double>(0, d);
  for (double T : {0.5, 1.0, 2.0}) {
    CHECK(qfi_power_series(1, T, vac, -1, 1.0) == doctest::Approx(4 * T * T).epsilon(1e-12));
  }
  CHECK(qfi_power_series(2, 1.0, vac, -1, 1.0) == doctest::Approx(24).epsilon(1e-10));
  CHECK(qfi_power_series(2, 1.0, vac, +1, 1.0) == doctest::Approx(24).epsilon(1e-10));
  // the diagonal form carries no overall factor 4 and no cross terms
  CHECK(qfi_power_diagonal_reference(2, 1.0, vac, 1.0) == doctest::Approx(6).epsilon(1e-10));
  CHECK(qfi_power_diagonal_reference(1, 2.0, vac, 0.0) == doctest::Approx(4).epsilon(1e-12));
  // for n = 3 the covariance of X^3 with X does not vanish
  const double full = qfi_power_series(3, 1.0, vac, -1, 1.0);
  const double diag = qfi_power_diagonal_reference(3, 1.0, vac, 1.0);
  CHECK(std::abs(full / 4 - diag) > 1e-3 * diag);

  CHECK_THROWS_AS(qfi_power_series(0, 1.0, vac, -1, 1.0), InvalidArgument);
  CHECK_THROWS_AS(qfi_power_series(2, 1.0, vac, 0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(qfi_power_series(2, 1.0, coherent_state<double>(C(3, 0), 20), -1, 1.0), TruncationLeak);

  for (int n : {2, 3}) {
    for (double g : {0.5, 1.0}) {
      const double T = 1.0;
      auto spec = make(ModelFamily::power_g, g, 0, n, T, {d});
      const auto m = build_hamiltonian(spec);
      const auto& layout = m.H.layout();
      SeriesOptions<double> opt;
      opt.check_subspace = buffered_indices(layout);
      const auto h = generator_series(m.H, m.dH, T, opt);
      const auto probe = evolve(m.H, m.psi0, T);
      const double gen = qfi_from_generator(probe, h).value;
      const double closed = qfi_power_series(n, T, vac, -1, g);
      CAPTURE(n);
      CAPTURE(g);
      CHECK(rel(gen, closed) < 1e-8);
      const auto fid = qfi_fidelity(hamiltonian_of_f(spec), m.psi0, 0.0, T);
      CHECK(rel(fid.value, closed) < 1e-4);
    }
  }
}

TEST_CASE("chain closed form") {
  std::vector<double> ones(5, 1.0);
  for (double T : {0.3, 1.0, 4.0}) CHECK(qfi_chain_closed(1, 1.0, T, 1.0) == doctest::Approx(4 * T * T).epsilon(1e-14));
  CHECK(qfi_chain_closed(2, 1.0, 1.0, 1.0) == doctest::Approx(8).epsilon(1e-14));
  CHECK(qfi_chain_closed(3, 1.0, 1.0, 1.0) == doctest::Approx(8 + 16.0 / 9).epsilon(1e-14));
  CHECK(qfi_chain_closed(3, 1.0, 0.0, 1.0) == 0);
  CHECK(qfi_chain_closed(4, 0.0, 1.5, 2.0) == doctest::Approx(4 * 1.5 * 1.5 * 2));

  SUBCASE("single terms by zeroing the other sites") {
    const int n = 6;
    const double g = 0.8, T = 1.7;
    for (int j = 1; j <= n; ++j) {
      std::vector<double> v(n, 0.0);
      v[std::size_t(j - 1)] = 1.3;
      const double term = std::pow(2.0, 2 * j) / std::pow(std::tgamma(j + 1.0), 2) * std::pow(g, 2 * j - 2) *
                          std::pow(T, 2 * j) * 1.3;
      CHECK(qfi_chain_closed<double>(n, g, T, v) == doctest::Approx(term).epsilon(1e-12));
      CHECK(chain_term(j, g, T, 1.3) == doctest::Approx(term).epsilon(1e-12));
    }
  }
  SUBCASE("no overflow at large gT") {
    const double l = log_qfi_chain_closed<double>(2000, 1.0, 400.0, std::span<const double>(ones.data(), 1));
    CHECK(std::isfinite(l));
    CHECK(l > 2 * 2 * 400.0 - 10);
  }
  CHECK_THROWS_AS(qfi_chain_closed(0, 1.0, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(qfi_chain_closed<double>(3, 1.0, 1.0, std::span<const double>(ones.data(), 2)), InvalidArgument);
}

TEST_CASE("chain Fock oracle at two sites") {
  const double T = 1.0;
  const auto spec = make(ModelFamily::chain, 1, 0, 2, T, {30});
  const auto m = build_hamiltonian(spec);
  const auto gen = qfi_generator_variance(m.H, m.dH, m.psi0, T);
  CHECK(rel(gen.value, 8.0) < 1e-4);
  const auto fid = qfi_fidelity(hamiltonian_of_f(spec), m.psi0, 0.0, T);
  CHECK(rel(fid.value, 8.0) < 1e-4);
}

TEST_CASE("exponential bounds") {
  const auto b = chain_bound_check(1.0, 5.0, 1.0, 3.5);
  CHECK(b.n == 18);
  CHECK(b.holds());
  // the infinite sum caps the partial sum
  CHECK(std::exp(b.log_lhs) <= std::cyl_bessel_i(0.0, 20.0) - 1);
  CHECK(std::exp(b.log_lhs) > 0.99 * (std::cyl_bessel_i(0.0, 20.0) - 1));

  const auto small = chain_bound_check(1.0, 0.5, 1.0, 3.5);
  CHECK(!small.holds());

  for (double a : {3.2, 3.5, 4.0}) {
    for (double T = 2; T <= 12 + 1e-9; T += 0.25) {
      const auto r = chain_bound_check(1.0, T, 1.0, a);
      CAPTURE(a);
      CAPTURE(T);
      CHECK(r.lhs_ge_mid);
      CHECK(r.mid_ge_rhs);
    }
  }
  for (double g : {0.5, 1.0, 2.0}) {
    for (double x = 2; x <= 10; x += 1) {
      const double T = x / g;
      const int n = int(std::ceil(3.5 * g * T));
      const double lf = log_qfi_chain_closed<double>(n, g, T, std::vector<double>{1.0});
      CHECK(lf >= 2 * g * T - 2 * std::log(g));
    }
  }
  CHECK_THROWS_AS(chain_bound_check(1.0, 1.0, 1.0, 3.0), InvalidArgument);
  CHECK_THROWS_AS(chain_bound_check(0.0, 1.0, 1.0, 3.5), InvalidArgument);
}

TEST_CASE("average QFI per particle") {
  for (double T : {0.5, 1.0, 5.0}) CHECK(chain_average_qfi(1, T, 1.0) == doctest::Approx(4 * T * T).epsilon(1e-13));
  CHECK(chain_average_qfi(2, 1.0, 1.0) == doctest::Approx(4).epsilon(1e-13));
  CHECK(chain_average_qfi(5, 1.3, 1.0) ==
        doctest::Approx(qfi_chain_closed(5, 1.0, 1.3, 1.0) / 5).epsilon(1e-12));

  for (double T : {1.0, 3.0, 6.0}) {
    const int top = int(8 * T) + 20;
    int sign_changes = 0;
    double prev = chain_average_qfi(1, T, 1.0);
    int dir = 1;
    for (int n = 2; n <= top; ++n) {
      const double v = log_chain_average_qfi(n, T, 1.0);
      const int d = v >= std::log(prev) ? 1 : -1;
      if (d != dir) ++sign_changes;
      dir = d;
      prev = std::exp(v);
    }
    CAPTURE(T);
    CHECK(sign_changes == 1);
  }
}

TEST_CASE("optimal particle number") {
  CHECK(optimal_n(0.05, 1.0, 50).n_star == 1);
  const auto r5 = optimal_n(5.0, 1.0, 60);
  CHECK(!r5.at_boundary);
  CHECK(r5.log10_value > 2 + 3);
  CHECK(r5.n_star > 5);
  CHECK(r5.n_star < 25);
  int last = 1;
  for (double T = 0.25; T <= 10 + 1e-9; T += 0.25) {
    const auto r = optimal_n(T, 1.0, 100);
    CHECK(r.n_star >= last);
    CHECK(!r.at_boundary);
    last = r.n_star;
  }
  // exhaustive scan oracle
  for (double T : {0.7, 2.5, 7.0}) {
    int best = 1;
    double bv = -1e300;
    for (int n = 1; n <= 100; ++n) {
      const double v = log_chain_average_qfi(n, T, 1.0);
      if (v > bv) {
        bv = v;
        best = n;
      }
    }
    CHECK(optimal_n(T, 1.0, 100).n_star == best);
  }
  CHECK(optimal_n(10.0, 1.0, 5).at_boundary);
  CHECK_THROWS_AS(optimal_n(1.0, 1.0, 0), InvalidArgument);
}

TEST_CASE("rotated qubit") {
  CHECK(qfi_rotated_qubit(1.0, std::numbers::pi / 2) == doctest::Approx(4));
  CHECK(qfi_rotated_qubit(1.0, std::numbers::pi) == doctest::Approx(0).epsilon(1e-15));
  CHECK(qfi_rotated_qubit(1.0, 0.7) == doctest::Approx(1.660065).epsilon(1e-6));
  for (double BT : {0.3, 0.7, std::numbers::pi / 2, 2.5, std::numbers::pi}) {
    const auto probe = rotated_qubit_optimal_probe(1.0, 0.4, BT);
    const auto est = qfi_from_generator(probe.probe, probe.generator);
    CHECK(std::abs(est.value - qfi_rotated_qubit(1.0, BT)) < 1e-8);
    // the pulled-back initial state evolves into the probe
    ModelSpec<double> s = make(ModelFamily::rotated_qubit, 1.0, 0.4, 1, BT);
    const auto m = build_hamiltonian(s);
    const auto back = evolve(m.H, probe.initial, BT);
    CHECK(std::abs(std::abs(inner(back, probe.probe)) - 1) < 1e-12);
  }
}

TEST_CASE("sparse chain equals the dense chain") {
  ModelSpec<double> spec;
  spec.family = ModelFamily::chain;
  spec.n = 3;
  spec.g = 0.9;
  spec.f = 0.4;
  spec.dims = {7, 6, 5};
  const auto dense = build_hamiltonian(spec);
  const auto sparse = build_sparse_chain(spec);
  CHECK(sparse.layout == dense.H.layout());
  CHECK((CMatrix<double>(sparse.H(0.4)) - dense.H.matrix()).norm() < 1e-13);
  CHECK((CMatrix<double>(sparse.x1) + dense.dH.matrix()).norm() < 1e-13);
  CHECK((sparse.psi0 - dense.psi0.amplitudes()).norm() < 1e-15);
  spec.family = ModelFamily::ramsey;
  CHECK_THROWS_AS(build_sparse_chain(spec), InvalidArgument);
}

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

// validate: the cross-oracle matrix and operator identities.

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "common.hpp"
#include "qmetro/cli/experiments.hpp"
#include "qmetro/cli/parallel.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/phasespace.hpp"

namespace qmetro::cli {

using detail::Osc;

namespace {

struct Check {
  std::string check, model, method_a, method_b;
  double g = NAN, f = NAN, T = NAN;
  long long n = 0;
  std::string dims;
  std::function<std::pair<double, double>()> run;  // (value_a, value_b)
  double tolerance = 0;
  bool relative = true;
};

ModelSpec<double> spec_of(ModelFamily fam, double g, double f, double T, int n = 1, std::vector<Index> dims = {}) {
  ModelSpec<double> s;
  s.family = fam;
  s.g = g;
  s.f = f;
  s.T_hint = T;
  s.n = n;
  s.dims = std::move(dims);
  return s;
}

std::vector<Check> build_matrix(double cross_tol) {
  std::vector<Check> m;
  // Ramsey closed form against both Fock oracles
  for (const Osc& osc : {Osc::vacuum(), Osc::coherent({1, 0})}) {
    const std::string state = osc.kind == Osc::Kind::vacuum ? "vacuum" : "coherent";
    for (double g : {0.5, 1.0, 2.0}) {
      for (double T : {0.25, 0.5, 1.0, 2.0}) {
        auto spec = spec_of(ModelFamily::ramsey, g, 0, T);
        spec.oscillator = osc;
        const double closed = qfi_ramsey_closed(g, T, osc.x_variance());
        m.push_back({"ramsey_qfi_" + state, "ramsey", "closed_form", "generator_variance", g, 0, T, 1,
                     std::to_string(default_dims(spec).front()),
                     [=] {
                       const auto md = build_hamiltonian(spec);
                       return std::pair{closed, qfi_generator_variance(md.H, md.dH, md.psi0, T).value};
                     },
                     cross_tol});
        m.push_back({"ramsey_qfi_" + state, "ramsey", "closed_form", "fidelity", g, 0, T, 1,
                     std::to_string(default_dims(spec).front()),
                     [=] {
                       const auto md = build_hamiltonian(spec);
                       return std::pair{closed, qfi_fidelity(hamiltonian_of_f(spec), md.psi0, 0.0, T).value};
                     },
                     cross_tol});
      }
    }
  }
  // factorization of the Ramsey propagator
  for (double T : {0.25, 0.5, 0.75, 1.0}) {
    m.push_back({"factorization", "ramsey", "propagator", "factorized", 1.0, 0.5, T, 1, "80",
                 [=] { return std::pair{check_ramsey_factorization(1.0, 0.5, T, 80), 0.0}; }, 1e-8, false});
  }
  // Heisenberg variance growth on product states
  for (double T : {0.5, 1.0}) {
    for (const Osc& osc : {Osc::vacuum(), Osc::squeezed(0.3)}) {
      auto spec = spec_of(ModelFamily::ramsey, 1.0, 0.5, T);
      spec.oscillator = osc;
      const auto dims = default_dims(spec);
      const double expect = osc.x_variance() + 4 * T * T;
      m.push_back({"variance_growth_x", "ramsey", "evolved", "var_x + 4 g^2 T^2 var_sz", 1.0, 0.5, T, 1,
                   std::to_string(dims.front()),
                   [=] {
                     const auto md = build_hamiltonian(spec);
                     const auto q = quadratures<double>(dims.front());
                     const auto psi = evolve(md.H, md.psi0, T);
                     return std::pair{variance(psi, embed(q.X, 1, md.H.layout())), expect};
                   },
                   1e-8, false});
      m.push_back({"variance_growth_p", "ramsey", "evolved", "initial", 1.0, 0.5, T, 1, std::to_string(dims.front()),
                   [=] {
                     const auto md = build_hamiltonian(spec);
                     const auto q = quadratures<double>(dims.front());
                     const auto P = embed(q.P, 1, md.H.layout());
                     return std::pair{variance(evolve(md.H, md.psi0, T), P), variance(md.psi0, P)};
                   },
                   1e-8, false});
    }
  }
  // rotated qubit
  for (double BT : {0.3, 0.7, 1.2, 2.0, std::numbers::pi}) {
    m.push_back({"rotated_qubit", "rotated_qubit", "generator_integral", "4 sin^2(BT)", 1.0, 0.4, BT, 0, "",
                 [=] {
                   const auto p = rotated_qubit_optimal_probe(1.0, 0.4, BT);
                   return std::pair{qfi_from_generator(p.probe, p.generator).value, qfi_rotated_qubit(1.0, BT)};
                 },
                 1e-8, false});
  }
  // GHZ qubits with one oscillator each
  for (double T : {0.25, 0.5}) {
    const auto spec = spec_of(ModelFamily::nqubit_ramsey, 1.0, 0, T, 2, {15});
    m.push_back({"nqubit_qfi", "nqubit_ramsey", "generator_variance", "closed_form", 1.0, 0, T, 2, "15x15",
                 [=] {
                   const auto md = build_hamiltonian(spec);
                   return std::pair{qfi_generator_variance(md.H, md.dH, md.psi0, T).value,
                                    qfi_nqubit_closed(1.0, T, 2, 1.0)};
                 },
                 1e-3});
  }
  // power-law coupling: pulled-back series against the evolved-frame generator
  for (int n : {2, 3}) {
    for (double g : {0.5, 1.0}) {
      auto spec = spec_of(ModelFamily::power_g, g, 0, 1.0, n, {60});
      m.push_back({"power_qfi", "power_g", "generator_variance", "series", g, 0, 1.0, n, "60",
                   [=] {
                     const auto md = build_hamiltonian(spec);
                     const auto vac = fock_state<double>(0, 60);
                     return std::pair{qfi_generator_variance(md.H, md.dH, md.psi0, 1.0).value,
                                      qfi_power_series(n, 1.0, vac, -1, g)};
                   },
                   1e-6});
    }
  }
  // classical force
  for (double T : {0.5, 2.0}) {
    const auto spec = spec_of(ModelFamily::classical_force, 0, 0, T);
    m.push_back({"classical_qfi", "classical_force", "generator_variance", "4 T^2 var_x", 0, 0, T, 1, "",
                 [=] {
                   const auto md = build_hamiltonian(spec);
                   return std::pair{qfi_generator_variance(md.H, md.dH, md.psi0, T).value, 4 * T * T};
                 },
                 1e-8});
  }
  // chain: Gaussian engine and Fock oracle against the closed form
  for (int n : {1, 3, 10, 50, 100}) {
    for (double T : {1.0, 10.0, 20.0}) {
      m.push_back({"chain_qfi", "chain", "gaussian", "closed_form", 1.0, 0, T, n, "",
                   [=] {
                     return std::pair{gaussian_qfi(chain_linear_dynamics(n, 1.0), GaussianState<double>::vacuum(n), T)
                                          .value,
                                      qfi_chain_closed<double>(n, 1.0, T, 1.0)};
                   },
                   1e-9});
    }
  }
  for (auto [n, T] : {std::pair{2, 1.0}, std::pair{3, 0.5}, std::pair{3, 1.0}}) {
    const auto dims = chain_fock_dims<double>(n, 1.0, T, Osc::vacuum());
    m.push_back({"chain_qfi", "chain", "fock_fidelity", "closed_form", 1.0, 0, T, n, detail::join_dims(dims),
                 [=] {
                   auto spec = spec_of(ModelFamily::chain, 1.0, 0, T, n, dims);
                   const auto ch = build_sparse_chain(spec);
                   const double v =
                       qfi_fidelity_sparse<double>([&](double f) { return ch.H(f); }, ch.psi0, 0.0, T).value;
                   return std::pair{v, qfi_chain_closed<double>(n, 1.0, T, 1.0)};
                 },
                 cross_tol});
  }
  // measurement: Cramer-Rao dominance and the slope-term scale
  m.push_back({"measurement_dominance", "ramsey", "error_propagation", "qcrb", 1.0, NAN, 2.0, 1, "",
               [] {
                 const auto r = find_operating_point(1.0, 2.0, Osc::vacuum());
                 const double b = qcrb(qfi_ramsey_closed(1.0, 2.0, 1.0));
                 return std::pair{std::max(0.0, b - r.delta_f) / b, 0.0};
               },
               1e-9, false});
  m.push_back({"measurement_scale", "ramsey", "delta_f visibility 2gT^2", "1", 0.1, NAN, 1.5, 1, "",
               [] {
                 const auto r = find_operating_point(0.1, 1.5, Osc::vacuum());
                 const auto fit = fit_fringe(0.1, 1.5, Osc::vacuum());
                 return std::pair{r.delta_f * fit.visibility * 2 * 0.1 * 1.5 * 1.5, 1.0};
               },
               1e-4});
  m.push_back({"qcrb_arithmetic", "ramsey", "qcrb", "1/sqrt(80)", 1.0, NAN, 2.0, 1, "",
               [] { return std::pair{qcrb(qfi_ramsey_closed(1.0, 2.0, 1.0)), 1 / std::sqrt(80.0)}; }, 1e-14});
  // operator identities
  m.push_back({"commutator_xp", "oscillator", "[X,P]", "2i (interior)", NAN, NAN, NAN, 0, "30",
               [] {
                 const auto q = quadratures<double>(30);
                 const CMatrix<double> c = commutator(q.X, q.P).matrix();
                 const double d = (c.topLeftCorner(29, 29) -
                                   Complex<double>(0, 2) * CMatrix<double>::Identity(29, 29))
                                      .cwiseAbs()
                                      .maxCoeff();
                 return std::pair{d, 0.0};
               },
               1e-12, false});
  m.push_back({"pauli_algebra", "qubit", "sx sy", "i sz", NAN, NAN, NAN, 0, "2",
               [] {
                 const CMatrix<double> d = pauli_x<double>().matrix() * pauli_y<double>().matrix() -
                                           Complex<double>(0, 1) * pauli_z<double>().matrix();
                 return std::pair{d.cwiseAbs().maxCoeff(), 0.0};
               },
               1e-15, false});
  m.push_back({"chain_nilpotent", "chain", "M^(2n)", "0", 1.0, NAN, NAN, 5, "",
               [] { return std::pair{is_nilpotent(chain_linear_dynamics(5, 1.0).drift, 10) ? 0.0 : 1.0, 0.0}; }, 0.5,
               false});
  m.push_back({"gaussian_purity", "chain", "symplectic eigenvalues", "1", 1.0, 0.3, 2.0, 5, "",
               [] {
                 const auto s =
                     evolve_moments(GaussianState<double>::vacuum(5), chain_linear_dynamics(5, 1.0), 0.3, 2.0);
                 return std::pair{(symplectic_eigenvalues(s.cov()).array() - 1).abs().maxCoeff(), 0.0};
               },
               1e-8, false});
  return m;
}

}  // namespace

ExperimentOutput run_validate(const RunContext& ctx) {
  const Config& c = ctx.config;
  const double cross_tol = c.get_positive("tolerance.rel", 1e-4);
  const auto matrix = build_matrix(cross_tol);

  struct Result {
    double a = NAN, b = NAN;
    std::string error;
  };
  Progress progress(ctx.log, "validate", matrix.size());
  const auto results = parallel_map(
      matrix.size(), ctx.threads,
      [&](std::size_t i) {
        Result r;
        try {
          std::tie(r.a, r.b) = matrix[i].run();
        } catch (const std::exception& e) {
          r.error = e.what();
        }
        return r;
      },
      &progress);

  ExperimentOutput out;
  out.table.columns = {"check",   "model",   "method_a",  "method_b", "g",    "f",    "T",     "n",
                       "dims",    "value_a", "value_b",   "deviation", "kind", "tolerance", "pass", "error"};
  Series dev{"deviation / tolerance", {}, {}, false, true, false};
  Series one{"limit", {}, {}, true, false, true};
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const auto& k = matrix[i];
    const auto& r = results[i];
    const double d = k.relative ? detail::rel_dev(r.a, r.b) : std::abs(r.a - r.b);
    const bool pass = r.error.empty() && d <= k.tolerance;
    auto opt = [](double v) { return std::isnan(v) ? Cell{} : Cell{v}; };
    out.table.add_row({k.check, k.model, k.method_a, k.method_b, opt(k.g), opt(k.f), opt(k.T), k.n, k.dims, r.a, r.b,
                       d, std::string(k.relative ? "relative" : "absolute"), k.tolerance, pass, r.error});
    if (!pass) {
      std::ostringstream msg;
      msg << "validate " << k.check << " (" << k.method_a << " vs " << k.method_b << ", T=" << k.T
          << "): " << (r.error.empty() ? "deviation " + format_double(d) + " > " + format_double(k.tolerance) : r.error);
      out.failures.push_back(msg.str());
    }
    dev.x.push_back(double(i + 1));
    dev.y.push_back(std::max(d / k.tolerance, 1e-18));
  }
  one.x = {0.0, double(matrix.size() + 1)};
  one.y = {1.0, 1.0};
  out.plot.title = "Cross-oracle matrix";
  out.plot.x_label = "check";
  out.plot.y_label = "deviation / tolerance";
  out.plot.log_y = true;
  out.plot.series = {dev, one};
  return out;
}

const std::vector<std::string_view>& experiment_names() {
  static const std::vector<std::string_view> names{"ramsey-qfi", "ramsey-measure", "chain-qfi", "chain-bound",
                                                   "fig2",       "scaling-fit",    "validate"};
  return names;
}

bool is_experiment(std::string_view name) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

ExperimentOutput run_experiment(std::string_view name, const RunContext& ctx) {
  if (name == "ramsey-qfi") return run_ramsey_qfi(ctx);
  if (name == "ramsey-measure") return run_ramsey_measure(ctx);
  if (name == "chain-qfi") return run_chain_qfi(ctx);
  if (name == "chain-bound") return run_chain_bound(ctx);
  if (name == "fig2") return run_fig2(ctx);
  if (name == "scaling-fit") return run_scaling_fit(ctx);
  if (name == "validate") return run_validate(ctx);
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

}  // namespace qmetro::cli

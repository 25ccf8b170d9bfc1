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

// chain-qfi, chain-bound, fig2 and scaling-fit.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "common.hpp"
#include "qmetro/cli/experiments.hpp"
#include "qmetro/cli/fit.hpp"
#include "qmetro/cli/parallel.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/phasespace.hpp"

namespace qmetro::cli {

using detail::Osc;

namespace {

GaussianState<double> gaussian_product(int n, const Osc& site) {
  const std::vector<Osc> sites(std::size_t(n), site);
  return GaussianState<double>::product(sites);
}

/// Fock-space fidelity oracle for the chain, sparse propagation.
double chain_fock_qfi(int n, double g, double T, const Osc& site, const std::vector<Index>& dims) {
  ModelSpec<double> spec;
  spec.family = ModelFamily::chain;
  spec.n = n;
  spec.g = g;
  spec.T_hint = T;
  spec.oscillator = site;
  spec.dims = dims;
  const auto chain = build_sparse_chain(spec);
  return qfi_fidelity_sparse<double>([&](double f) { return chain.H(f); }, chain.psi0, 0.0, T).value;
}

std::vector<Index> fock_dims_from(const Config& c, int n, double g, double T, const Osc& site) {
  const auto given = c.get_list("model.fock_dims", "");
  if (given.empty()) return chain_fock_dims(n, g, T, site);
  std::vector<Index> dims;
  for (const auto& s : given) {
    const long d = parse_int(s, "model.fock_dims");
    if (d < 2) throw ConfigError("model.fock_dims: entries must be >= 2");
    dims.push_back(d);
  }
  if (dims.size() == 1) dims.assign(std::size_t(n), dims.front());
  if (dims.size() != std::size_t(n)) throw ConfigError("model.fock_dims: need one entry per site or one shared value");
  return dims;
}

}  // namespace

ExperimentOutput run_chain_qfi(const RunContext& ctx) {
  const Config& c = ctx.config;
  const auto ns = detail::int_grid(c, "grid.n", "1, 2, 3, 5, 10, 20, 50, 100");
  const auto gs = detail::grid(c, "grid.g", "1", true);
  const auto Ts = detail::grid(c, "grid.T", "0.25, 0.5, 1, 2, 5, 10, 20", false);
  const auto states = detail::state_choices(c, "vacuum");
  const double tol = c.get_positive("tolerance.rel", 1e-9);
  const double fock_tol = c.get_positive("tolerance.fock_rel", 1e-4);
  const long fock_max_n = detail::non_negative(c, "model.fock_max_n", 3);
  const double fock_max_gT = c.get_double("model.fock_max_gT", 1.0);

  struct Item {
    int n;
    double g, T;
    detail::StateChoice state;
    bool fock;
    std::vector<Index> dims;
  };
  std::vector<Item> items;
  for (int n : ns)
    for (double g : gs)
      for (const auto& s : states)
        for (double T : Ts) {
          items.push_back({n, g, T, s, false, {}});
          if (n <= fock_max_n && g * T <= fock_max_gT + 1e-12) {
            items.push_back({n, g, T, s, true, fock_dims_from(c, n, g, T, s.osc)});
          }
        }

  Progress progress(ctx.log, "chain-qfi", items.size());
  const auto values = parallel_map(
      items.size(), ctx.threads,
      [&](std::size_t i) {
        const Item& it = items[i];
        if (it.fock) return chain_fock_qfi(it.n, it.g, it.T, it.state.osc, it.dims);
        return gaussian_qfi(chain_linear_dynamics(it.n, it.g), gaussian_product(it.n, it.state.osc), it.T).value;
      },
      &progress);

  ExperimentOutput out;
  out.table.columns = {"n",          "g",   "T",       "state",     "var_x", "method", "dims",
                       "qfi_closed", "qfi", "rel_dev", "tolerance", "pass"};
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    const double vx = it.state.osc.x_variance();
    const double closed = qfi_chain_closed<double>(it.n, it.g, it.T, vx);
    const double dev = detail::rel_dev(values[i], closed);
    const double t = it.fock ? fock_tol : tol;
    const bool pass = dev <= t;
    out.table.add_row({(long long)it.n, it.g, it.T, it.state.kind, vx, std::string(it.fock ? "fock_fidelity" : "gaussian"),
                       it.fock ? detail::join_dims(it.dims) : std::string(), closed, values[i], dev, t, pass});
    if (!pass) {
      std::ostringstream msg;
      msg << "chain-qfi n=" << it.n << " g=" << it.g << " T=" << it.T << " " << (it.fock ? "fock" : "gaussian")
          << ": deviation " << dev << " exceeds " << t;
      out.failures.push_back(msg.str());
    }
  }

  out.plot.title = "Chain QFI";
  out.plot.x_label = "T";
  out.plot.y_label = "F_Q";
  out.plot.log_y = true;
  const Osc& site0 = states.front().osc;
  for (int n : ns) {
    for (double g : gs) {
      Series closed{"n=" + std::to_string(n) + (gs.size() > 1 ? " g=" + format_double(g) : ""), {}, {}, true, false, false};
      Series engine{"", {}, {}, false, true, false};
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        if (it.n != n || it.g != g || it.fock || it.state.kind != states.front().kind) continue;
        closed.x.push_back(it.T);
        closed.y.push_back(qfi_chain_closed<double>(n, g, it.T, site0.x_variance()));
        engine.x.push_back(it.T);
        engine.y.push_back(values[i]);
      }
      out.plot.series.push_back(std::move(closed));
      out.plot.series.push_back(std::move(engine));
    }
  }
  return out;
}

ExperimentOutput run_chain_bound(const RunContext& ctx) {
  const Config& c = ctx.config;
  const auto as = detail::grid(c, "grid.a", "3.2, 3.5, 4", true);
  const auto gs = detail::grid(c, "grid.g", "1", true);
  const auto Ts = detail::grid(c, "grid.T", "2:12:0.5", true);
  const auto states = detail::state_choices(c, "vacuum");
  const double step = c.get_positive("model.onset_step", 0.01);
  for (double a : as) {
    if (!(a > 3)) throw ConfigError("grid.a: values must exceed 3");
  }
  const double vx = states.front().osc.x_variance();

  ExperimentOutput out;
  out.table.columns = {"a",       "g",       "T",       "n",          "var_x",      "log_lhs",
                       "log_mid", "log_rhs", "lhs_ge_mid", "mid_ge_rhs", "holds"};
  ResultTable onset;
  onset.name = "onset";
  onset.columns = {"a", "g", "var_x", "T_min", "T_max", "all_hold", "onset_T", "last_failure_T", "scan_step"};

  const double tmax = *std::max_element(Ts.begin(), Ts.end());
  const double tmin = *std::min_element(Ts.begin(), Ts.end());
  for (double a : as) {
    for (double g : gs) {
      Series lhs{"log10 F, a=" + format_double(a), {}, {}, true, false, false};
      Series mid{"", {}, {}, true, false, true};
      bool all = true;
      for (double T : Ts) {
        const auto b = chain_bound_check(g, T, vx, a);
        out.table.add_row({a, g, T, (long long)b.n, vx, b.log_lhs, b.log_mid, b.log_rhs, b.lhs_ge_mid, b.mid_ge_rhs,
                           b.holds()});
        all = all && b.holds();
        if (!b.holds()) {
          out.failures.push_back("chain-bound a=" + format_double(a) + " g=" + format_double(g) +
                                 " T=" + format_double(T) + ": inequality fails");
        }
        lhs.x.push_back(T);
        lhs.y.push_back(b.log_lhs / std::log(10.0));
        mid.x.push_back(T);
        mid.y.push_back(b.log_mid / std::log(10.0));
      }
      // onset: the scan point just above the last failure
      const long count = long(std::ceil(tmax / step - 1e-9));
      double last_fail = std::nan("");
      for (long k = 1; k <= count; ++k) {
        const double T = double(k) * step;
        if (!chain_bound_check(g, T, vx, a).holds()) last_fail = T;
      }
      const double on = std::isnan(last_fail) ? step : last_fail + step;
      onset.add_row({a, g, vx, tmin, tmax, all, on, std::isnan(last_fail) ? Cell{} : Cell{last_fail}, step});
      out.plot.series.push_back(std::move(lhs));
      out.plot.series.push_back(std::move(mid));
    }
  }
  {
    Series rhs{"log10 (VarX/g^2) e^(2gT)", {}, {}, true, false, true};
    for (double T : Ts) {
      rhs.x.push_back(T);
      rhs.y.push_back((std::log(vx) - 2 * std::log(gs.front()) + 2 * gs.front() * T) / std::log(10.0));
    }
    out.plot.series.push_back(std::move(rhs));
  }
  out.extra.push_back(std::move(onset));
  out.plot.title = "Chain QFI against the exponential bounds (dashed: middle bound)";
  out.plot.x_label = "T";
  out.plot.y_label = "log10";
  return out;
}

ExperimentOutput run_fig2(const RunContext& ctx) {
  const Config& c = ctx.config;
  const auto Ts = detail::grid(c, "grid.T", "0.25:10:0.25", true);
  const auto gs = detail::grid(c, "grid.g", "1", true);
  if (gs.size() != 1) throw ConfigError("grid.g: fig2 takes a single coupling");
  if (!detail::increasing(Ts)) throw ConfigError("grid.T: fig2 needs an increasing grid");
  const auto states = detail::state_choices(c, "vacuum");
  if (states.size() != 1) throw ConfigError("state.kind: fig2 takes a single state");
  const double g = gs.front();
  const double vx = states.front().osc.x_variance();
  const double tmax = Ts.back();
  const long n_max = c.get_int("model.n_max", long(std::ceil(8 * g * tmax + 20)));
  if (n_max < 1) throw ConfigError("model.n_max: must be >= 1");
  const double fit_min = c.get_double("model.fit_T_min", 2.0);
  const double r2_min = c.get_positive("tolerance.r2", 0.99);

  ExperimentOutput out;
  out.table.columns = {"T",     "g",               "var_x", "n_max", "n_star", "log10_avg_qfi",
                       "log10_classical", "gap", "at_boundary"};
  Series best{"optimal n", {}, {}, true, true, false};
  Series classical{"classical 4T^2 VarX", {}, {}, true, false, true};
  std::vector<double> fx, fy;
  bool monotone = true;
  int prev = 0;
  long boundary = 0;
  std::optional<double> at5;
  const double l10g = 2 * std::log10(g);
  for (double T : Ts) {
    const auto o = optimal_n(g * T, vx, int(n_max));
    const double lv = o.log10_value - l10g;
    const double lc = std::log10(4 * T * T * vx);
    const double gap = lv - lc;
    out.table.add_row({T, g, vx, (long long)n_max, (long long)o.n_star, lv, lc, gap, o.at_boundary});
    if (o.n_star < prev) monotone = false;
    if (o.n_star != prev) out.plot.notes.push_back({T, lv, "n=" + std::to_string(o.n_star)});
    prev = o.n_star;
    if (o.at_boundary) ++boundary;
    if (T >= fit_min) {
      fx.push_back(T);
      fy.push_back(gap);
    }
    if (T == 5.0) at5 = lc;
    best.x.push_back(T);
    best.y.push_back(lv);
    classical.x.push_back(T);
    classical.y.push_back(lc);
  }
  if (boundary > 0) {
    out.warnings.push_back("fig2: n_star reached n_max = " + std::to_string(n_max) + " at " + std::to_string(boundary) +
                           " grid point(s); raise model.n_max");
  }
  if (!monotone) out.failures.push_back("fig2: n_star decreases along T");

  ResultTable fit;
  fit.name = "fit";
  fit.columns = {"T_min", "T_max", "points", "gap_slope", "gap_intercept", "r2", "r2_min",
                 "staircase_monotone", "boundary_hits", "log10_classical_T5", "pass"};
  if (fx.size() >= 3) {
    const auto f = fit_line(fx, fy);
    const bool pass = f.r2 >= r2_min && f.slope > 0 && monotone;
    fit.add_row({fx.front(), fx.back(), (long long)f.points, f.slope, f.intercept, f.r2, r2_min, monotone,
                 (long long)boundary, at5 ? Cell{*at5} : Cell{}, pass});
    if (!(f.r2 >= r2_min)) {
      out.failures.push_back("fig2: gap fit R^2 " + format_double(f.r2) + " below " + format_double(r2_min));
    }
    if (!(f.slope > 0)) out.failures.push_back("fig2: gap does not grow with T");
  } else {
    out.warnings.push_back("fig2: fewer than 3 grid points with T >= " + format_double(fit_min) + "; no gap fit");
  }
  out.extra.push_back(std::move(fit));

  out.plot.title = "Optimal average QFI per particle";
  out.plot.x_label = "T";
  out.plot.y_label = "log10 F_Qa";
  out.plot.series.push_back(std::move(best));
  out.plot.series.push_back(std::move(classical));
  return out;
}

ExperimentOutput run_scaling_fit(const RunContext& ctx) {
  const Config& c = ctx.config;
  const std::string family = c.get_string("model.family", "ramsey");
  std::string default_T;
  if (family == "ramsey") {
    default_T = "5:50:5";
  } else if (family == "classical_force") {
    default_T = "1:10:1";
  } else if (family == "chain") {
    default_T = "2:12:1";
  } else {
    throw ConfigError("model.family: scaling-fit supports ramsey, classical_force, chain; got '" + family + "'");
  }
  const auto gs = detail::grid(c, "grid.g", "1", true);
  const auto Ts = detail::grid(c, "grid.T", default_T, true);
  if (Ts.size() < 5) throw ConfigError("grid.T: scaling-fit needs at least 5 points");
  const auto states = detail::state_choices(c, "vacuum");
  const Osc site = states.front().osc;
  const double vx = site.x_variance();
  const double slope_tol = c.get_positive("tolerance.slope", 0.05);
  const double tol = c.get_positive("tolerance.rel", 1e-4);
  const double a = c.get_positive("model.a", 3.5);

  ExperimentOutput out;
  out.table.columns = {"family", "g", "T", "n", "var_x", "qfi", "log_qfi", "method"};
  ResultTable fits;
  fits.name = "fit";
  fits.columns = {"family", "g",         "fit",       "points", "T_min", "T_max", "slope", "slope_stderr",
                  "ci95_low", "ci95_high", "r2",      "expected", "criterion", "tolerance", "pass"};
  ResultTable spots;
  spots.name = "spotcheck";
  spots.columns = {"family", "g", "T", "n", "method", "value", "closed", "rel_dev", "tolerance", "pass"};

  out.plot.title = "QFI scaling (" + family + ")";
  out.plot.x_label = "T";
  out.plot.y_label = "F_Q";
  out.plot.log_x = family != "chain";
  out.plot.log_y = true;

  for (double g : gs) {
    std::vector<double> lt, t, lf;
    Series data{"g=" + format_double(g), {}, {}, false, true, false};
    for (double T : Ts) {
      int n = 1;
      double F = 0;
      std::string method = "closed_form";
      if (family == "ramsey") {
        F = qfi_ramsey_closed(g, T, vx);
      } else if (family == "classical_force") {
        F = 4 * T * T * vx;
      } else {
        n = std::max(1, int(std::ceil(a * g * T)));
        F = gaussian_qfi(chain_linear_dynamics(n, g), gaussian_product(n, site), T).value;
        method = "gaussian";
        const double closed = qfi_chain_closed<double>(n, g, T, vx);
        const double dev = detail::rel_dev(F, closed);
        spots.add_row({family, g, T, (long long)n, std::string("gaussian"), F, closed, dev, tol, dev <= tol});
        if (dev > tol) out.failures.push_back("scaling-fit chain T=" + format_double(T) + ": Gaussian vs closed form");
      }
      out.table.add_row({family, g, T, (long long)n, vx, F, std::log(F), method});
      lt.push_back(std::log(T));
      t.push_back(T);
      lf.push_back(std::log(F));
      data.x.push_back(T);
      data.y.push_back(F);
    }
    const char* ll = "log-log";
    if (family != "chain") {
      const double expected = family == "ramsey" ? 4.0 : 2.0;
      const auto f = fit_line(lt, lf);
      const bool pass = std::abs(f.slope - expected) <= slope_tol;
      fits.add_row({family, g, std::string(ll), (long long)f.points, Ts.front(), Ts.back(), f.slope, f.slope_stderr,
                    f.ci95_low, f.ci95_high, f.r2, expected, std::string("abs(slope - expected) <= tolerance"),
                    slope_tol, pass});
      if (!pass) {
        out.failures.push_back("scaling-fit " + family + " g=" + format_double(g) + ": slope " +
                               format_double(f.slope) + ", expected " + format_double(expected));
      }
      // Fock-space spot check at the first grid time
      ModelSpec<double> spec;
      spec.family = family == "ramsey" ? ModelFamily::ramsey : ModelFamily::classical_force;
      spec.g = g;
      spec.T_hint = Ts.front();
      spec.oscillator = site;
      const auto m = build_hamiltonian(spec);
      const double gen = qfi_generator_variance(m.H, m.dH, m.psi0, Ts.front()).value;
      const double closed = out.table.number(out.table.rows.size() - Ts.size(), "qfi");
      const double dev = detail::rel_dev(gen, closed);
      spots.add_row({family, g, Ts.front(), 1LL, std::string("generator_variance"), gen, closed, dev, tol, dev <= tol});
      if (dev > tol) out.failures.push_back("scaling-fit " + family + ": Fock spot check deviates by " + format_double(dev));
      Series line{"fit slope " + format_double(f.slope), {}, {}, true, false, true};
      for (double T : Ts) {
        line.x.push_back(T);
        line.y.push_back(std::exp(f.intercept + f.slope * std::log(T)));
      }
      out.plot.series.push_back(std::move(data));
      out.plot.series.push_back(std::move(line));
    } else {
      const auto f = fit_line(lt, lf);
      fits.add_row({family, g, std::string(ll), (long long)f.points, Ts.front(), Ts.back(), f.slope, f.slope_stderr,
                    f.ci95_low, f.ci95_high, f.r2, Cell{}, std::string("reported"), Cell{}, true});
      const auto e = fit_line(t, lf);
      const bool pass = e.slope >= 2 * g;
      fits.add_row({family, g, std::string("log-linear"), (long long)e.points, Ts.front(), Ts.back(), e.slope,
                    e.slope_stderr, e.ci95_low, e.ci95_high, e.r2, 2 * g, std::string("slope >= expected"), Cell{},
                    pass});
      if (!pass) {
        out.failures.push_back("scaling-fit chain g=" + format_double(g) + ": ln F slope " + format_double(e.slope) +
                               " below 2g");
      }
      Series line{"ln F slope " + format_double(e.slope), {}, {}, true, false, true};
      for (double T : Ts) {
        line.x.push_back(T);
        line.y.push_back(std::exp(e.intercept + e.slope * T));
      }
      out.plot.series.push_back(std::move(data));
      out.plot.series.push_back(std::move(line));
    }
  }
  out.extra.push_back(std::move(fits));
  out.extra.push_back(std::move(spots));
  return out;
}

}  // namespace qmetro::cli

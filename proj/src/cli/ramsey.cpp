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

// ramsey-qfi and ramsey-measure.

#include <cmath>
#include <sstream>

#include "common.hpp"
#include "qmetro/cli/experiments.hpp"
#include "qmetro/cli/fit.hpp"
#include "qmetro/cli/parallel.hpp"
#include "qmetro/metrology.hpp"

namespace qmetro::cli {

using detail::Osc;

ExperimentOutput run_ramsey_qfi(const RunContext& ctx) {
  const Config& c = ctx.config;
  const auto gs = detail::grid(c, "grid.g", "0.5, 1, 2", false);
  const auto Ts = detail::grid(c, "grid.T", "0.25, 0.5, 1, 2", false);
  const auto states = detail::state_choices(c, "vacuum, coherent");
  const double tol = c.get_positive("tolerance.rel", 1e-4);
  const long dim = detail::non_negative(c, "model.dim", 0);

  struct Item {
    double g, T;
    detail::StateChoice state;
  };
  std::vector<Item> items;
  for (double g : gs)
    for (const auto& s : states)
      for (double T : Ts) items.push_back({g, T, s});

  struct Result {
    Index dim = 0;
    double closed = 0, gen = 0, fid = 0;
    std::string note;
  };
  Progress progress(ctx.log, "ramsey-qfi", items.size());
  const auto results = parallel_map(
      items.size(), ctx.threads,
      [&](std::size_t i) {
        const Item& it = items[i];
        ModelSpec<double> spec;
        spec.family = ModelFamily::ramsey;
        spec.g = it.g;
        spec.T_hint = it.T;
        spec.oscillator = it.state.osc;
        if (dim > 0) spec.dims = {Index(dim)};
        Result r;
        r.dim = default_dims(spec).front();
        r.closed = qfi_ramsey_closed(it.g, it.T, it.state.osc.x_variance());
        const auto m = build_hamiltonian(spec);
        r.gen = qfi_generator_variance(m.H, m.dH, m.psi0, it.T).value;
        try {
          r.fid = qfi_fidelity(hamiltonian_of_f(spec), m.psi0, 0.0, it.T).value;
        } catch (const StepSizeError& e) {
          r.fid = std::nan("");
          r.note = e.what();
        }
        return r;
      },
      &progress);

  ExperimentOutput out;
  out.table.columns = {"g",     "T",          "state",         "alpha_re",     "alpha_im",          "squeeze",
                       "var_x", "dim",        "qfi_closed",    "qfi_generator", "qfi_fidelity",     "rel_dev_generator",
                       "rel_dev_fidelity", "tolerance", "pass"};
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    const auto& r = results[i];
    const double dg = detail::rel_dev(r.gen, r.closed), df = detail::rel_dev(r.fid, r.closed);
    const bool pass = dg <= tol && df <= tol;
    out.table.add_row({it.g, it.T, it.state.kind, it.state.osc.alpha.real(), it.state.osc.alpha.imag(),
                       it.state.osc.squeeze, it.state.osc.x_variance(), (long long)r.dim, r.closed, r.gen, r.fid, dg,
                       df, tol, pass});
    if (!pass) {
      std::ostringstream msg;
      msg << "ramsey-qfi g=" << it.g << " T=" << it.T << " " << it.state.kind << ": deviations " << dg << ", " << df
          << " exceed " << tol << (r.note.empty() ? "" : " (" + r.note + ")");
      out.failures.push_back(msg.str());
    }
  }

  out.plot.title = "Ramsey QFI";
  out.plot.x_label = "T";
  out.plot.y_label = "F_Q";
  out.plot.log_x = out.plot.log_y = true;
  for (double g : gs) {
    for (const auto& s : states) {
      Series closed{"g=" + format_double(g) + " " + s.kind, {}, {}, true, false, false};
      Series fid{"", {}, {}, false, true, false};
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].g != g || items[i].state.kind != s.kind) continue;
        closed.x.push_back(items[i].T);
        closed.y.push_back(results[i].closed);
        fid.x.push_back(items[i].T);
        fid.y.push_back(results[i].fid);
      }
      out.plot.series.push_back(std::move(closed));
      out.plot.series.push_back(std::move(fid));
    }
  }
  return out;
}

ExperimentOutput run_ramsey_measure(const RunContext& ctx) {
  const Config& c = ctx.config;
  const auto gs = detail::grid(c, "grid.g", "0.04", true);
  const auto Ts = detail::grid(c, "grid.T", "2.5:4.5:0.5", true);
  const auto states = detail::state_choices(c, "vacuum");
  const double slope_tol = c.get_positive("tolerance.slope", 0.1);
  const double min_vis = c.get_double("model.min_visibility", 0.9);
  const long dim = detail::non_negative(c, "model.dim", 0);

  struct Item {
    double g, T;
    detail::StateChoice state;
  };
  std::vector<Item> items;
  for (double g : gs)
    for (const auto& s : states)
      for (double T : Ts) items.push_back({g, T, s});

  struct Result {
    FringeFit<double> fit;
    MeasurementRecord<double> rec;
    double qcrb = 0;
    std::string warning;
  };
  Progress progress(ctx.log, "ramsey-measure", items.size());
  const auto results = parallel_map(
      items.size(), ctx.threads,
      [&](std::size_t i) {
        const Item& it = items[i];
        Result r;
        r.fit = fit_fringe(it.g, it.T, it.state.osc, 24, 0.0, Index(dim));
        try {
          r.rec = find_operating_point(it.g, it.T, it.state.osc, Index(dim));
        } catch (const InsensitiveOperatingPoint& e) {
          r.warning = e.what();
        }
        r.qcrb = qcrb(qfi_ramsey_closed(it.g, it.T, it.state.osc.x_variance()));
        return r;
      },
      &progress);

  ExperimentOutput out;
  out.table.columns = {"g",          "T",           "state",     "alpha_re", "alpha_im", "squeeze",
                       "visibility", "f_operating", "expectation_A", "slope", "delta_f",  "qcrb",
                       "target",     "target_over_delta_f_visibility", "dominance_ok"};
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    const auto& r = results[i];
    const double target = 1 / (2 * it.g * it.T * it.T);
    const bool dominance = r.rec.delta_f >= r.qcrb * (1 - 1e-9);
    out.table.add_row({it.g, it.T, it.state.kind, it.state.osc.alpha.real(), it.state.osc.alpha.imag(),
                       it.state.osc.squeeze, r.fit.visibility, r.rec.f, r.rec.expectation_A, r.rec.slope,
                       r.rec.delta_f, r.qcrb, target, target / (r.rec.delta_f * r.fit.visibility), dominance});
    if (!r.warning.empty()) out.warnings.push_back(r.warning);
    if (!dominance && r.warning.empty()) {
      out.failures.push_back("ramsey-measure g=" + format_double(it.g) + " T=" + format_double(it.T) +
                             ": delta_f below the Cramer-Rao bound");
    }
  }

  // slope of log delta_f vs log T, per (g, state), over the high-visibility rows
  ResultTable fits;
  fits.name = "fit";
  fits.columns = {"g",        "state",        "points", "T_min", "T_max", "min_visibility", "slope", "slope_stderr",
                  "ci95_low", "ci95_high",    "r2",     "slope_visibility_corrected", "expected", "tolerance", "pass"};
  for (double g : gs) {
    for (const auto& s : states) {
      std::vector<double> lx, ly, lyc;
      double tmin = INFINITY, tmax = -INFINITY;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& r = results[i];
        if (items[i].g != g || items[i].state.kind != s.kind) continue;
        if (!(r.fit.visibility >= min_vis) || !std::isfinite(r.rec.delta_f)) continue;
        lx.push_back(std::log(items[i].T));
        ly.push_back(std::log(r.rec.delta_f));
        lyc.push_back(std::log(r.rec.delta_f * r.fit.visibility));
        tmin = std::min(tmin, items[i].T);
        tmax = std::max(tmax, items[i].T);
      }
      if (lx.size() < 3) {
        out.warnings.push_back("ramsey-measure g=" + format_double(g) + ": fewer than 3 rows with visibility >= " +
                               format_double(min_vis) + "; no slope fit");
        continue;
      }
      const auto f = fit_line(lx, ly);
      const auto fc = fit_line(lx, lyc);
      const bool pass = std::abs(f.slope + 2) <= slope_tol;
      fits.add_row({g, s.kind, (long long)f.points, tmin, tmax, min_vis, f.slope, f.slope_stderr, f.ci95_low,
                    f.ci95_high, f.r2, fc.slope, -2.0, slope_tol, pass});
      if (!pass) {
        out.failures.push_back("ramsey-measure g=" + format_double(g) + ": slope " + format_double(f.slope) +
                               " outside -2 +- " + format_double(slope_tol));
      }
    }
  }
  out.extra.push_back(std::move(fits));

  out.plot.title = "Ramsey measurement: achieved error vs bound";
  out.plot.x_label = "T";
  out.plot.y_label = "delta f";
  out.plot.log_x = out.plot.log_y = true;
  for (double g : gs) {
    for (const auto& s : states) {
      const std::string tag = " g=" + format_double(g) + (states.size() > 1 ? " " + s.kind : "");
      Series got{"achieved" + tag, {}, {}, true, true, false};
      Series bound{"QCRB" + tag, {}, {}, true, false, false};
      Series target{"1/(2gT^2)" + tag, {}, {}, true, false, true};
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].g != g || items[i].state.kind != s.kind) continue;
        const double T = items[i].T;
        got.x.push_back(T);
        got.y.push_back(results[i].rec.delta_f);
        bound.x.push_back(T);
        bound.y.push_back(results[i].qcrb);
        target.x.push_back(T);
        target.y.push_back(1 / (2 * g * T * T));
      }
      out.plot.series.push_back(std::move(got));
      out.plot.series.push_back(std::move(bound));
      out.plot.series.push_back(std::move(target));
    }
  }
  return out;
}

}  // namespace qmetro::cli

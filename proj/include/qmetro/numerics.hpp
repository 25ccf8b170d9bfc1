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

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmetro/error.hpp"
#include "qmetro/types.hpp"

namespace qmetro {

/// Neumaier's improved Kahan summation.
template <typename Real>
class CompensatedSum {
 public:
  CompensatedSum& operator+=(Real x) {
    const Real t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  Real value() const { return sum_ + carry_; }

 private:
  Real sum_ = 0;
  Real carry_ = 0;
};

/// log(sum_i exp(terms_i)); -inf for an empty range.
template <typename Real>
Real log_sum_exp(std::span<const Real> log_terms) {
  if (log_terms.empty()) return -std::numeric_limits<Real>::infinity();
  const Real peak = *std::max_element(log_terms.begin(), log_terms.end());
  if (!std::isfinite(peak)) return peak;
  CompensatedSum<Real> acc;
  for (Real t : log_terms) acc += std::exp(t - peak);
  return peak + std::log(acc.value());
}

template <typename Real>
struct LineFit {
  Real slope = 0;
  Real intercept = 0;
  Real slope_stderr = 0;
  Real r_squared = 0;
  Index points = 0;
};

/// Ordinary least-squares fit y = slope * x + intercept.
template <typename Real>
LineFit<Real> fit_line(std::span<const Real> x, std::span<const Real> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit_line: x and y differ in length");
  const auto n = static_cast<Index>(x.size());
  if (n < 3) throw InvalidArgument("fit_line: need at least three points");
  RMatrix<Real> design(n, 2);
  RVector<Real> rhs(n);
  for (Index i = 0; i < n; ++i) {
    design(i, 0) = x[static_cast<std::size_t>(i)];
    design(i, 1) = Real(1);
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const RVector<Real> coef = design.colPivHouseholderQr().solve(rhs);
  const RVector<Real> resid = rhs - design * coef;
  const Real mean_y = rhs.mean();
  const Real ss_res = resid.squaredNorm();
  const Real ss_tot = (rhs.array() - mean_y).matrix().squaredNorm();
  const Real mean_x = design.col(0).mean();
  const Real sxx = (design.col(0).array() - mean_x).matrix().squaredNorm();

  LineFit<Real> fit;
  fit.slope = coef(0);
  fit.intercept = coef(1);
  fit.points = n;
  fit.r_squared = ss_tot > 0 ? Real(1) - ss_res / ss_tot : Real(1);
  fit.slope_stderr = sxx > 0 ? std::sqrt(ss_res / Real(n - 2) / sxx) : Real(0);
  return fit;
}

template <typename Real>
struct Extremum {
  Real x = 0;
  Real value = 0;
  int evaluations = 0;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
template <typename Real>
Extremum<Real> golden_section_maximize(const std::function<Real(Real)>& fn, Real lo, Real hi,
                                       Real x_tol, int max_iter = 200) {
  const Real inv_phi = (std::sqrt(Real(5)) - Real(1)) / Real(2);
  Real a = lo, b = hi;
  Real c = b - inv_phi * (b - a);
  Real d = a + inv_phi * (b - a);
  Real fc = fn(c), fd = fn(d);
  int evals = 2;
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
    ++evals;
  }
  Extremum<Real> best;
  best.x = fc > fd ? c : d;
  best.value = std::max(fc, fd);
  best.evaluations = evals;
  return best;
}

/// Spectral norm (largest singular value).
template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real operator_norm(
    const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  using Plain = typename Derived::PlainObject;
  Eigen::BDCSVD<Plain> svd(m.eval());
  return svd.singularValues()(0);
}

}  // namespace qmetro

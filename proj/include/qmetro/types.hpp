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

#include <complex>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace qmetro {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real>
using SparseCMatrix = Eigen::SparseMatrix<std::complex<Real>>;

template <typename Real>
inline constexpr Complex<Real> kI{Real(0), Real(1)};

}  // namespace qmetro

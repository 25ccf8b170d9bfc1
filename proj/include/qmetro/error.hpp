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

#include <stdexcept>
#include <string>

namespace qmetro {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operands live on different composite spaces.
class LayoutMismatch : public Error {
 public:
  using Error::Error;
};

/// An operation that requires a Hermitian operator received one that is not.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Probability mass reached the top of a truncated Fock space.
class TruncationLeak : public Error {
 public:
  TruncationLeak(const std::string& what, double mass) : Error(what), mass_(mass) {}
  double mass() const noexcept { return mass_; }

 private:
  double mass_;
};

/// A finite-difference step is outside its usable window.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

class InsensitiveOperatingPoint : public Error {
 public:
  using Error::Error;
};

class UnsupportedState : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmetro

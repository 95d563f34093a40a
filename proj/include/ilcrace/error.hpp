// Copyright 2026 The ilcrace Authors
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

#ifndef ILCRACE_ERROR_HPP_
#define ILCRACE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ilcrace {

// Base for every error raised by the library. The C API maps each subclass
// onto one ilc_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (CSV row, JSON document).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Experiment configuration that cannot be resolved.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Closed-loop simulation left the admissible envelope (|e| > 20 m).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int lap = -1)
      : Error(what), lap_(lap) {}
  int lap() const { return lap_; }

 private:
  int lap_;
};

// Lifted matrix with a (numerically) zero diagonal entry.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Cholesky factorization of a Q-ILC normal matrix failed.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ilcrace

#endif  // ILCRACE_ERROR_HPP_

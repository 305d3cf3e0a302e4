/*
 * Copyright 2026 The divrec Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divrec {

// Base class for every error raised by the library. Precondition violations
// on plain arguments use std::invalid_argument / std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  // 1-based; 0 when the error is not tied to a line (e.g. empty input).
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A ridge system in an ALS half-step could not be factored. Happens with a
// zero regularization weight when a row's observations span fewer than d
// dimensions.
class SolveError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would visit more subsets than allowed.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace divrec

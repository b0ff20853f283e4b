/*
 * Copyright 2026 The LFA Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LFA_ERROR_HPP_
#define LFA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace lfa {

// Base class of every error raised by the library. `code()` is a stable,
// machine-parsable identifier used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& message)
      : Error("dimension_mismatch", message) {}
};

class DegenerateVector : public Error {
 public:
  explicit DegenerateVector(const std::string& message)
      : Error("degenerate_vector", message) {}
};

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& message)
      : Error("rank_deficient", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& message)
      : Error("numerical_failure", message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error("parse_error", message) {}
};

// A run configuration that fails validation.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error("config_invalid", message) {}
};

}  // namespace lfa

#endif  // LFA_ERROR_HPP_

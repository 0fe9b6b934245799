// Copyright 2026 The PeRFICS Harness Authors.
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

#ifndef PERFICS_ERRORS_HPP_
#define PERFICS_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace perfics {

// Root of every error raised by the harness. `kind()` is a stable tag used in
// event logs and CLI messages.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PERFICS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// core-model
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("ParseError", "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};
PERFICS_DEFINE_ERROR(DuplicateIdError);
PERFICS_DEFINE_ERROR(ConfigError);

class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string field, const std::string& message)
      : Error("InvariantViolation", field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// backend-gateway
PERFICS_DEFINE_ERROR(TransportError);
PERFICS_DEFINE_ERROR(TimeoutError);
PERFICS_DEFINE_ERROR(MissingFixtureError);
PERFICS_DEFINE_ERROR(FixtureCorruptError);

class BackendError : public Error {
 public:
  BackendError(int status, const std::string& message)
      : Error("BackendError",
              "upstream status " + std::to_string(status) + ": " + message),
        status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

// oracle-judge
class JudgmentParseError : public Error {
 public:
  JudgmentParseError(std::string raw, const std::string& message)
      : Error("JudgmentParseError", message), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};
PERFICS_DEFINE_ERROR(ScoreOutOfRange);
PERFICS_DEFINE_ERROR(ZeroControlScore);
PERFICS_DEFINE_ERROR(JudgmentUnavailable);

// scoring-aggregator
PERFICS_DEFINE_ERROR(EmptyCategory);
PERFICS_DEFINE_ERROR(MissingWeight);
PERFICS_DEFINE_ERROR(CategoryMismatch);
PERFICS_DEFINE_ERROR(ZeroBaselineTokens);

// perfics-ranker
PERFICS_DEFINE_ERROR(NonFiniteInput);
PERFICS_DEFINE_ERROR(DuplicateModel);
PERFICS_DEFINE_ERROR(NoFeasibleModel);

// run-store
PERFICS_DEFINE_ERROR(StorageError);
PERFICS_DEFINE_ERROR(SequenceRegression);
PERFICS_DEFINE_ERROR(CorruptLog);

// cli-reporter
PERFICS_DEFINE_ERROR(UsageError);

#undef PERFICS_DEFINE_ERROR

}  // namespace perfics

#endif  // PERFICS_ERRORS_HPP_

// Copyright 2026 The HQL Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hql {

/// Byte offsets [begin, end) into the original query text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class ErrorCode {
  Syntax,
  Plan,
  Storage,
  Sql,
  FtsSyntax,
  Io,
  NotADatabase,
  Ingest,
  Transport,
  Timeout,
  RateLimit,
  NoMatch,
  ConstraintViolation,
  EmptyContext,
  TypeMismatch,
  MissingSubstitution,
  DuplicateName,
  Execution,
  PromptTooLarge,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Base for every error the engine raises. Callers that only need the
/// category switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, Span span);
  const Span& span() const noexcept { return span_; }

 private:
  Span span_;
};

/// Raised by the executor; carries the index and kind of the failing step
/// plus the category of the underlying error.
class ExecutionError : public Error {
 public:
  ExecutionError(std::size_t step, std::string step_kind, ErrorCode cause,
                 const std::string& message);
  std::size_t step() const noexcept { return step_; }
  const std::string& step_kind() const noexcept { return step_kind_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::size_t step_;
  std::string step_kind_;
  ErrorCode cause_;
};

}  // namespace hql

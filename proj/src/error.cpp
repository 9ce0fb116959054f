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

#include "hql/error.hpp"

#include <utility>

namespace hql {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::Plan: return "PlanError";
    case ErrorCode::Storage: return "StorageError";
    case ErrorCode::Sql: return "SqlError";
    case ErrorCode::FtsSyntax: return "FtsSyntaxError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::NotADatabase: return "NotADatabase";
    case ErrorCode::Ingest: return "IngestError";
    case ErrorCode::Transport: return "TransportError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::RateLimit: return "RateLimit";
    case ErrorCode::NoMatch: return "NoMatch";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::MissingSubstitution: return "MissingSubstitution";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::Execution: return "ExecutionError";
    case ErrorCode::PromptTooLarge: return "PromptTooLarge";
    case ErrorCode::Config: return "ConfigError";
  }
  return "Error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

SyntaxError::SyntaxError(const std::string& message, Span span)
    : Error(ErrorCode::Syntax,
            message + " at bytes " + std::to_string(span.begin) + ".." +
                std::to_string(span.end)),
      span_(span) {}

ExecutionError::ExecutionError(std::size_t step, std::string step_kind,
                               ErrorCode cause, const std::string& message)
    : Error(ErrorCode::Execution, "step " + std::to_string(step) + " (" +
                                      step_kind + "): " + message),
      step_(step),
      step_kind_(std::move(step_kind)),
      cause_(cause) {}

}  // namespace hql

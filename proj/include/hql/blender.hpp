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

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hql/error.hpp"
#include "hql/value.hpp"

namespace hql {

struct Constraint {
  enum class Kind { None, ValueSet, Regex };
  Kind kind = Kind::None;
  std::vector<std::string> values;  // ValueSet
  std::string pattern;              // Regex, matched against the whole output

  static Constraint none() { return {}; }
  static Constraint value_set(std::vector<std::string> values);
  static Constraint regex(std::string pattern);
};

/// Structured copy of what the prompt asks for. Offline blenders answer from
/// it; remote blenders ignore it.
struct TaskPayload {
  std::string kind;  // "map", "qa", "join", "validate" or a custom name
  std::string question;
  std::vector<std::string> items;    // Map values, Join candidates
  std::vector<std::string> options;  // QA options, Join options
  Table context;                     // QA / Validate context rows
  std::string example;               // ExampleLiteral hint
  std::string none_token;            // Join "no match" sentinel
};

struct BlenderRequest {
  std::string system_prompt;
  std::string user_prompt;
  Constraint constraint;
  double temperature = 0.0;
  std::size_t max_output = 256;
  std::optional<TaskPayload> task;

  /// Bytes of prompt text sent to the model.
  std::size_t prompt_chars() const { return system_prompt.size() + user_prompt.size(); }
};

struct Usage {
  std::size_t prompt_chars = 0;
  std::size_t output_chars = 0;
  std::size_t calls = 0;

  Usage& operator+=(const Usage& o) {
    prompt_chars += o.prompt_chars;
    output_chars += o.output_chars;
    calls += o.calls;
    return *this;
  }
};

struct BlenderResponse {
  std::string text;
  Usage usage;
  bool constrained = false;  // true when enforced at decode time
};

/// The model that answers ingredient prompts. Implementations must be safe
/// to call from several threads at once.
class Blender {
 public:
  virtual ~Blender() = default;
  virtual BlenderResponse complete(const BlenderRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Case-insensitive, whitespace-collapsed comparison key for option matching.
std::string normalize_option(std::string_view text);

/// Canonical member of `options` equal to `text` under normalize_option.
std::optional<std::string> match_option(std::string_view text,
                                        const std::vector<std::string>& options);

/// Whole-string regex match. Throws Error{Config} on an invalid pattern.
bool regex_full_match(const std::string& pattern, const std::string& text);

struct ConstrainedOptions {
  /// Applied to raw output before checking (e.g. trimming separators).
  std::function<std::string(std::string_view)> canonicalize;
  /// Extra check after the constraint passes; returns a violation message.
  std::function<std::optional<std::string>(const std::string&)> validate;
  int retries = 1;
};

/// Calls the blender and enforces req.constraint. On a violation the request
/// is retried with the violation appended to the user prompt; after the
/// retry budget Error{ConstraintViolation} is thrown. ValueSet outputs are
/// returned as the canonical option string. Usage covers every attempt.
BlenderResponse complete_constrained(Blender& blender, const BlenderRequest& req,
                                     const ConstrainedOptions& options = {});

/// Lower-case hex SHA-256 of system + "\n" + user; key of lookup fixtures.
std::string prompt_hash(std::string_view system_prompt, std::string_view user_prompt);

/// Deterministic fixture-backed blender.
///
/// Fixture JSON:
///   prompts:  {sha256 -> response}
///   map:      {question -> {value -> answer}}
///   qa:       {question -> answer}
///   join:     {question or "*" -> {left -> right}}
///   validate: {question -> bool}
///   custom:   {name -> {question -> answer | {value -> answer}}}
///   parse:    {question -> query}   (parser role)
///   default:  answer used for anything unmatched (lenient mode)
/// Without an entry, a 1x1 QA context returns its cell and a Validate claim
/// equal to a context cell returns true.
class LookupBlender : public Blender {
 public:
  explicit LookupBlender(nlohmann::json fixture, bool strict = false);
  static std::shared_ptr<LookupBlender> from_file(const std::string& path, bool strict = false);

  BlenderResponse complete(const BlenderRequest& req) override;
  std::string name() const override { return "lookup"; }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::optional<std::string> answer(const BlenderRequest& req) const;
  std::optional<std::string> answer_item(const TaskPayload& task, const std::string& item) const;

  nlohmann::json fixture_;
  bool strict_;
  std::atomic<std::size_t> calls_{0};
};

/// Wraps a callable; handy for tests and custom routing.
class FunctionBlender : public Blender {
 public:
  using Fn = std::function<std::string(const BlenderRequest&)>;
  explicit FunctionBlender(Fn fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  BlenderResponse complete(const BlenderRequest& req) override;
  std::string name() const override { return name_; }
  std::size_t calls() const { return calls_.load(); }

 private:
  Fn fn_;
  std::string name_;
  std::atomic<std::size_t> calls_{0};
};

/// Answers a ValueSet request with its first member and anything else with a
/// fixed text.
class ConstraintEchoBlender : public Blender {
 public:
  explicit ConstraintEchoBlender(std::string fallback = "") : fallback_(std::move(fallback)) {}
  BlenderResponse complete(const BlenderRequest& req) override;
  std::string name() const override { return "echo"; }

 private:
  std::string fallback_;
};

struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-4-0613";
  std::chrono::milliseconds timeout{60000};
  int max_in_flight = 4;

  /// HQL_API_KEY (or OPENAI_API_KEY), HQL_BASE_URL, HQL_MODEL.
  static RemoteConfig from_env();
};

/// Chat-completions client over HTTP(S). Throws Error{Transport},
/// Error{Timeout} or Error{RateLimit}.
class RemoteBlender : public Blender {
 public:
  explicit RemoteBlender(RemoteConfig config);
  BlenderResponse complete(const BlenderRequest& req) override;
  std::string name() const override { return "remote:" + config_.model; }

  /// The JSON body sent for `req`.
  nlohmann::json request_body(const BlenderRequest& req) const;

 private:
  RemoteConfig config_;
  std::unique_ptr<std::counting_semaphore<64>> in_flight_;
};

/// Parses "lookup:FILE", "lookup-strict:FILE", "echo" or "remote".
std::shared_ptr<Blender> make_blender(const std::string& spec);

}  // namespace hql

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

#include "hql/ingredients.hpp"

#include <omp.h>

#include <cctype>
#include <exception>
#include <mutex>
#include <set>

namespace hql {

namespace {

std::vector<std::string> split_items(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == ';') {
      out.push_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::string join_items(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += i + ";";
  return out;
}

// Tidies separators so "true; false" and "true;false" both pass the pattern.
std::string canonicalize_batch(std::string_view raw, bool lower) {
  std::string text = trim(raw);
  if (!text.empty() && text.back() != ';') text.push_back(';');
  auto items = split_items(text);
  if (lower) {
    for (auto& i : items) i = to_lower(i);
  }
  return join_items(items);
}

std::optional<std::string> check_batch(const std::string& text, std::size_t expected,
                                       const std::vector<std::string>& options,
                                       const std::string& none_token) {
  auto items = split_items(text);
  if (items.size() != expected) {
    return "expected " + std::to_string(expected) + " answers separated by ';', got " +
           std::to_string(items.size());
  }
  if (!options.empty()) {
    for (const auto& i : items) {
      if (!none_token.empty() && normalize_option(i) == normalize_option(none_token)) continue;
      if (!match_option(i, options)) return "'" + i + "' is not one of the allowed options";
    }
  }
  return std::nullopt;
}

// Runs fn(i) for i in [0, n), in parallel when configured. fn must not throw.
template <class Fn>
void for_each_index(std::size_t n, const IngredientConfig& config, Fn&& fn) {
  if (config.parallel && n > 1) {
    int threads = config.max_threads > 0 ? config.max_threads : omp_get_max_threads();
    long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

std::string options_block(const std::vector<std::string>& options) {
  std::string out = "Options:\n";
  for (const auto& o : options) out += "- " + o + "\n";
  return out;
}

std::string context_block(const Table& t, std::size_t cell_cap) {
  return "Context:\n" + render_pipe_table(t, cell_cap);
}

const char* kMapSystem =
    "You answer a question about each value in a list. Answer every value in order, "
    "and end each answer with a semicolon.";
const char* kQaSystem =
    "Answer the question using the context. Reply with the answer only.";
const char* kJoinSystem =
    "Align each candidate with the option that refers to the same entity. Answer every "
    "candidate in order, and end each answer with a semicolon.";
const char* kValidateSystem =
    "Decide whether the statement is true given the context. Reply with true; or false;";

}  // namespace

BlenderRequest map_request(const MapTask& task, const std::vector<std::string>& batch) {
  BlenderRequest req;
  req.system_prompt = kMapSystem;
  std::string user = "Question: " + task.question + "\n";
  switch (task.hint.kind) {
    case HintKind::Boolean: user += "Answer with true or false.\n"; break;
    case HintKind::Numeric: user += "Answer with a number.\n"; break;
    case HintKind::ExampleLiteral: user += "Here is an example output: " + task.hint.example + "\n"; break;
    case HintKind::None: break;
  }
  if (!task.options.empty()) user += options_block(task.options);
  user += "Values:\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    user += std::to_string(i + 1) + ". " + batch[i] + "\n";
  }
  user += "Answers:";
  req.user_prompt = std::move(user);
  switch (task.hint.kind) {
    case HintKind::Boolean: req.constraint = Constraint::regex(kBooleanBatchPattern); break;
    case HintKind::Numeric: req.constraint = Constraint::regex(kNumericBatchPattern); break;
    default: req.constraint = Constraint::regex(kTextBatchPattern); break;
  }
  TaskPayload payload;
  payload.kind = "map";
  payload.question = task.question;
  payload.items = batch;
  payload.options = task.options;
  payload.example = task.hint.example;
  req.task = std::move(payload);
  return req;
}

BlenderRequest qa_request(const QaTask& task, const IngredientConfig& config) {
  BlenderRequest req;
  req.system_prompt = kQaSystem;
  std::string user = "Question: " + task.question + "\n";
  if (task.context) user += context_block(*task.context, config.cell_cap);
  if (!task.options.empty()) user += options_block(task.options);
  user += "Answer:";
  req.user_prompt = std::move(user);
  if (!task.options.empty()) req.constraint = Constraint::value_set(task.options);
  TaskPayload payload;
  payload.kind = "qa";
  payload.question = task.question;
  payload.options = task.options;
  if (task.context) payload.context = *task.context;
  req.task = std::move(payload);
  return req;
}

BlenderRequest join_request(const std::string& question, const std::vector<std::string>& candidates,
                            const std::vector<std::string>& options, const std::string& none_token) {
  BlenderRequest req;
  req.system_prompt = kJoinSystem;
  std::string user;
  if (!question.empty()) user += "Instruction: " + question + "\n";
  user += options_block(options);
  user += "If no option matches, answer " + none_token + ".\nCandidates:\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    user += std::to_string(i + 1) + ". " + candidates[i] + "\n";
  }
  user += "Answers:";
  req.user_prompt = std::move(user);
  req.constraint = Constraint::regex(kTextBatchPattern);
  TaskPayload payload;
  payload.kind = "join";
  payload.question = question;
  payload.items = candidates;
  payload.options = options;
  payload.none_token = none_token;
  req.task = std::move(payload);
  return req;
}

BlenderRequest validate_request(const ValidateTask& task, const IngredientConfig& config) {
  BlenderRequest req;
  req.system_prompt = kValidateSystem;
  std::string user = "Statement: " + task.claim + "\n";
  if (task.context) user += context_block(*task.context, config.cell_cap);
  user += "Answer:";
  req.user_prompt = std::move(user);
  req.constraint = Constraint::regex(kValidatePattern);
  TaskPayload payload;
  payload.kind = "validate";
  payload.question = task.claim;
  if (task.context) payload.context = *task.context;
  req.task = std::move(payload);
  return req;
}

Value coerce_map_output(const std::string& item, const OutputHint& hint) {
  if (hint.kind == HintKind::Boolean) {
    std::string l = to_lower(item);
    if (l == "true") return std::int64_t{1};
    if (l == "false") return std::int64_t{0};
    return item;
  }
  bool numeric = hint.kind == HintKind::Numeric ||
                 (hint.kind == HintKind::ExampleLiteral &&
                  !std::holds_alternative<std::string>(coerce_scalar(hint.example)));
  if (numeric) return coerce_scalar(item);
  return item;
}

std::string join_none_token(const std::vector<std::string>& options) {
  std::set<std::string> taken;
  for (const auto& o : options) taken.insert(normalize_option(o));
  std::string token = "NONE";
  while (taken.count(normalize_option(token))) token = "-" + token + "-";
  return token;
}

MapResult exec_map(const MapTask& task, Blender& blender, const IngredientConfig& config) {
  MapResult result;
  result.outputs.assign(task.values.size(), Value{});
  if (task.values.empty()) return result;

  std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);
  std::size_t nbatches = (task.values.size() + batch_size - 1) / batch_size;
  std::vector<Usage> usage(nbatches);
  std::vector<std::exception_ptr> errors(nbatches);
  bool lower = task.hint.kind == HintKind::Boolean;

  for_each_index(nbatches, config, [&](std::size_t b) {
    try {
      std::size_t begin = b * batch_size;
      std::size_t end = std::min(task.values.size(), begin + batch_size);
      std::vector<std::string> batch(task.values.begin() + static_cast<long>(begin),
                                     task.values.begin() + static_cast<long>(end));
      BlenderRequest req = map_request(task, batch);
      ConstrainedOptions opts;
      opts.canonicalize = [lower](std::string_view raw) { return canonicalize_batch(raw, lower); };
      opts.validate = [&, n = batch.size()](const std::string& text) {
        return check_batch(text, n, task.options, "");
      };
      BlenderResponse resp = complete_constrained(blender, req, opts);
      usage[b] = resp.usage;
      auto items = split_items(resp.text);
      for (std::size_t i = 0; i < items.size(); ++i) {
        std::string item = items[i];
        if (!task.options.empty()) {
          if (auto canon = match_option(item, task.options)) item = *canon;
        }
        result.outputs[begin + i] = coerce_map_output(item, task.hint);
      }
    } catch (...) {
      errors[b] = std::current_exception();
    }
  });

  for (std::size_t b = 0; b < nbatches; ++b) {
    result.usage += usage[b];
    if (!errors[b]) continue;
    if (config.strict) std::rethrow_exception(errors[b]);
    try {
      std::rethrow_exception(errors[b]);
    } catch (const std::exception& e) {
      result.warnings.push_back("batch " + std::to_string(b) + " failed, values set to NULL: " +
                                e.what());
    }
  }
  return result;
}

QaResult exec_qa(const QaTask& task, Blender& blender, const IngredientConfig& config) {
  QaResult result;
  if (task.context && task.context->rows.empty()) {
    throw Error(ErrorCode::EmptyContext, "QA context has no rows");
  }
  if (task.options.size() == 1) {
    result.answer = task.options.front();
    return result;
  }
  BlenderRequest req = qa_request(task, config);
  if (task.options.empty()) {
    BlenderResponse resp = blender.complete(req);
    result.answer = trim(resp.text);
    result.usage = resp.usage;
    return result;
  }
  BlenderResponse resp = complete_constrained(blender, req);
  result.answer = resp.text;
  result.usage = resp.usage;
  return result;
}

JoinResult exec_join(const JoinTask& task, Blender& blender, const IngredientConfig& config) {
  JoinResult result;
  std::set<std::string> right_set(task.right.begin(), task.right.end());
  std::set<std::string> matched_right;
  std::vector<std::string> left_rest;
  std::map<std::string, std::string> chosen;  // left -> right
  std::set<std::string> seen_left;
  for (const auto& l : task.left) {
    if (!seen_left.insert(l).second) continue;
    if (right_set.count(l)) {
      chosen[l] = l;
      matched_right.insert(l);
      ++result.exact_matches;
    } else {
      left_rest.push_back(l);
    }
  }
  std::vector<std::string> right_rest;
  std::set<std::string> seen_right;
  for (const auto& r : task.right) {
    if (!matched_right.count(r) && seen_right.insert(r).second) right_rest.push_back(r);
  }

  if (!left_rest.empty() && !right_rest.empty()) {
    bool swapped = right_rest.size() < left_rest.size();
    const auto& candidates = swapped ? right_rest : left_rest;
    const auto& options = swapped ? left_rest : right_rest;
    std::string none = join_none_token(options);

    std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);
    std::size_t nbatches = (candidates.size() + batch_size - 1) / batch_size;
    std::vector<std::vector<std::string>> answers(nbatches);
    std::vector<Usage> usage(nbatches);
    std::vector<std::exception_ptr> errors(nbatches);

    for_each_index(nbatches, config, [&](std::size_t b) {
      try {
        std::size_t begin = b * batch_size;
        std::size_t end = std::min(candidates.size(), begin + batch_size);
        std::vector<std::string> batch(candidates.begin() + static_cast<long>(begin),
                                       candidates.begin() + static_cast<long>(end));
        BlenderRequest req = join_request(task.question, batch, options, none);
        ConstrainedOptions opts;
        opts.canonicalize = [](std::string_view raw) { return canonicalize_batch(raw, false); };
        opts.validate = [&, n = batch.size()](const std::string& text) {
          return check_batch(text, n, options, none);
        };
        BlenderResponse resp = complete_constrained(blender, req, opts);
        usage[b] = resp.usage;
        answers[b] = split_items(resp.text);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });

    for (std::size_t b = 0; b < nbatches; ++b) {
      if (errors[b]) std::rethrow_exception(errors[b]);
      result.usage += usage[b];
      for (std::size_t i = 0; i < answers[b].size(); ++i) {
        const std::string& cand = candidates[b * batch_size + i];
        auto pick = match_option(answers[b][i], options);
        if (!pick) continue;  // the none token
        const std::string& l = swapped ? *pick : cand;
        const std::string& r = swapped ? cand : *pick;
        chosen.emplace(l, r);  // first mapping wins
      }
    }
  }

  for (const auto& l : task.left) {
    auto it = chosen.find(l);
    if (it == chosen.end()) continue;
    result.pairs.emplace_back(l, it->second);
    chosen.erase(it);
  }
  return result;
}

ValidateResult exec_validate(const ValidateTask& task, Blender& blender,
                             const IngredientConfig& config) {
  if (task.context && task.context->rows.empty()) {
    throw Error(ErrorCode::EmptyContext, "Validate context has no rows");
  }
  BlenderRequest req = validate_request(task, config);
  ConstrainedOptions opts;
  opts.canonicalize = [](std::string_view raw) { return canonicalize_batch(raw, true); };
  BlenderResponse resp = complete_constrained(blender, req, opts);
  ValidateResult result;
  result.verdict = resp.text == "true;";
  result.usage = resp.usage;
  return result;
}

// ---- registry ----------------------------------------------------------------

bool is_builtin_ingredient(std::string_view name) {
  for (std::string_view b : {"LLMMap", "LLMQA", "LLMJoin", "LLMValidate"}) {
    if (iequals(name, b)) return true;
  }
  return false;
}

namespace {

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto first = static_cast<unsigned char>(name.front());
  if (!(std::isalpha(first) || first == '_')) return false;
  for (char ch : name) {
    auto c = static_cast<unsigned char>(ch);
    if (!(std::isalnum(c) || c == '_')) return false;
  }
  return true;
}

}  // namespace

void IngredientRegistry::register_custom(const std::string& name, CustomClass cls,
                                         CustomHandler handler) {
  if (!valid_identifier(name)) {
    throw Error(ErrorCode::Config, "invalid ingredient name '" + name + "'");
  }
  if (is_builtin_ingredient(name)) {
    throw Error(ErrorCode::DuplicateName, "'" + name + "' is a built-in ingredient");
  }
  bool scalar = std::holds_alternative<ScalarHandler>(handler);
  if (scalar != (cls == CustomClass::Scalar)) {
    throw Error(ErrorCode::Config, "handler class does not match ingredient class for '" + name + "'");
  }
  std::unique_lock lock(mu_);
  auto key = to_lower(name);
  if (entries_.count(key)) {
    throw Error(ErrorCode::DuplicateName, "ingredient '" + name + "' is already registered");
  }
  entries_.emplace(key, Entry{name, cls, std::move(handler)});
}

std::optional<CustomClass> IngredientRegistry::lookup(std::string_view name) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(to_lower(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second.cls;
}

std::optional<CustomHandler> IngredientRegistry::handler(std::string_view name) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(to_lower(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second.handler;
}

}  // namespace hql

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

#include "hql/blender.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <fstream>
#include <mutex>
#include <regex>
#include <unordered_map>

namespace hql {

Constraint Constraint::value_set(std::vector<std::string> values) {
  if (values.empty()) throw Error(ErrorCode::Config, "ValueSet constraint needs at least one value");
  Constraint c;
  c.kind = Kind::ValueSet;
  c.values = std::move(values);
  return c;
}

Constraint Constraint::regex(std::string pattern) {
  Constraint c;
  c.kind = Kind::Regex;
  c.pattern = std::move(pattern);
  regex_full_match(c.pattern, "");  // validates the pattern
  return c;
}

std::string normalize_option(std::string_view text) {
  std::string out;
  bool space = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::optional<std::string> match_option(std::string_view text,
                                        const std::vector<std::string>& options) {
  for (const auto& o : options) {
    if (o == text) return o;
  }
  std::string key = normalize_option(text);
  for (const auto& o : options) {
    if (normalize_option(o) == key) return o;
  }
  return std::nullopt;
}

bool regex_full_match(const std::string& pattern, const std::string& text) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::regex> cache;
  std::regex re;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(pattern);
    if (it == cache.end()) {
      try {
        it = cache.emplace(pattern, std::regex(pattern, std::regex::ECMAScript)).first;
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::Config, "invalid regex '" + pattern + "': " + e.what());
      }
    }
    re = it->second;
  }
  return std::regex_match(text, re);
}

namespace {

// libstdc++ regex recurses per character; keep checked outputs short.
constexpr std::size_t kMaxRegexInput = 8192;

std::optional<std::string> check(const Constraint& c, std::string& text) {
  switch (c.kind) {
    case Constraint::Kind::None:
      return std::nullopt;
    case Constraint::Kind::ValueSet: {
      auto member = match_option(trim(text), c.values);
      if (!member) return "answer must be exactly one of the allowed options";
      text = *member;
      return std::nullopt;
    }
    case Constraint::Kind::Regex:
      if (text.size() > kMaxRegexInput) return "answer is too long";
      if (!regex_full_match(c.pattern, text)) {
        return "answer must match the pattern " + c.pattern;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

BlenderResponse complete_constrained(Blender& blender, const BlenderRequest& req,
                                     const ConstrainedOptions& options) {
  if (req.constraint.kind == Constraint::Kind::ValueSet && req.constraint.values.empty()) {
    throw Error(ErrorCode::Config, "ValueSet constraint needs at least one value");
  }
  BlenderRequest attempt = req;
  Usage total;
  std::string last_violation;
  std::string last_text;
  for (int round = 0; round <= options.retries; ++round) {
    BlenderResponse resp = blender.complete(attempt);
    total += resp.usage;
    std::string text = options.canonicalize ? options.canonicalize(resp.text) : resp.text;
    auto violation = check(req.constraint, text);
    if (!violation && options.validate) violation = options.validate(text);
    if (!violation) {
      resp.text = std::move(text);
      resp.usage = total;
      return resp;
    }
    last_violation = *violation;
    last_text = resp.text;
    attempt.user_prompt = req.user_prompt + "\n\nYour previous answer \"" + resp.text +
                          "\" was rejected: " + *violation + ". Answer again.";
  }
  throw Error(ErrorCode::ConstraintViolation,
              "output \"" + last_text.substr(0, 200) + "\" rejected after retry: " + last_violation);
}

std::string prompt_hash(std::string_view system_prompt, std::string_view user_prompt) {
  std::string payload(system_prompt);
  payload += '\n';
  payload += user_prompt;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(payload.data(), payload.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Config, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---- LookupBlender -----------------------------------------------------------

namespace {

std::optional<std::string> scalar_text(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  if (j.is_number()) return j.dump();
  return std::nullopt;
}

const nlohmann::json* section(const nlohmann::json& fixture, std::string_view name,
                              std::string_view question) {
  auto s = fixture.find(std::string(name));
  if (s == fixture.end() || !s->is_object()) return nullptr;
  auto q = s->find(std::string(question));
  if (q == s->end()) q = s->find("*");
  return q == s->end() ? nullptr : &*q;
}

std::string semi_join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += p + ";";
  return out;
}

}  // namespace

LookupBlender::LookupBlender(nlohmann::json fixture, bool strict)
    : fixture_(std::move(fixture)), strict_(strict) {
  if (!fixture_.is_object()) throw Error(ErrorCode::Config, "lookup fixture must be a JSON object");
}

std::shared_ptr<LookupBlender> LookupBlender::from_file(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read lookup fixture '" + path + "'");
  try {
    return std::make_shared<LookupBlender>(nlohmann::json::parse(in), strict);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "invalid lookup fixture '" + path + "': " + e.what());
  }
}

std::optional<std::string> LookupBlender::answer_item(const TaskPayload& task,
                                                      const std::string& item) const {
  const nlohmann::json* table = nullptr;
  if (task.kind == "map") {
    table = section(fixture_, "map", task.question);
  } else if (auto c = fixture_.find("custom"); c != fixture_.end() && c->is_object()) {
    table = section(*c, task.kind, task.question);
  }
  if (table && table->is_object()) {
    if (auto it = table->find(item); it != table->end()) return scalar_text(*it);
  }
  return std::nullopt;
}

std::optional<std::string> LookupBlender::answer(const BlenderRequest& req) const {
  if (auto p = fixture_.find("prompts"); p != fixture_.end() && p->is_object()) {
    auto hit = p->find(prompt_hash(req.system_prompt, req.user_prompt));
    if (hit != p->end()) return scalar_text(*hit);
  }
  std::optional<std::string> fallback;
  if (!strict_) {
    if (auto d = fixture_.find("default"); d != fixture_.end()) fallback = scalar_text(*d);
  }
  if (!req.task) return fallback;
  const TaskPayload& task = *req.task;

  if (task.kind == "map") {
    std::vector<std::string> parts;
    for (const auto& item : task.items) {
      auto a = answer_item(task, item);
      if (!a) a = fallback;
      if (!a) return std::nullopt;
      parts.push_back(*a);
    }
    return semi_join(parts);
  }
  if (task.kind == "join") {
    const nlohmann::json* pairs = section(fixture_, "join", task.question);
    std::vector<std::string> parts;
    for (const auto& cand : task.items) {
      std::string choice = task.none_token;
      if (pairs && pairs->is_object()) {
        for (auto it = pairs->begin(); it != pairs->end(); ++it) {
          auto right = scalar_text(it.value());
          if (!right) continue;
          if (it.key() == cand && match_option(*right, task.options)) {
            choice = *right;
            break;
          }
          if (*right == cand && match_option(it.key(), task.options)) {
            choice = it.key();
            break;
          }
        }
      }
      parts.push_back(choice);
    }
    return semi_join(parts);
  }
  if (task.kind == "qa") {
    if (const nlohmann::json* a = section(fixture_, "qa", task.question)) return scalar_text(*a);
    if (!strict_ && task.context.rows.size() == 1 && task.context.columns.size() == 1) {
      return to_text(task.context.rows[0][0]);
    }
    return fallback;
  }
  if (task.kind == "validate") {
    if (const nlohmann::json* a = section(fixture_, "validate", task.question)) {
      if (a->is_boolean()) return std::string(a->get<bool>() ? "true;" : "false;");
      return scalar_text(*a);
    }
    if (!strict_) {
      for (const auto& row : task.context.rows) {
        for (const auto& cell : row) {
          std::string t = to_text(cell);
          if (t.empty()) continue;
          if (iequals(t, task.question) || iequals(task.question, "Does the table state " + t + "?")) {
            return std::string("true;");
          }
        }
      }
    }
    return fallback;
  }
  if (task.kind == "parse") {
    if (const nlohmann::json* a = section(fixture_, "parse", task.question)) return scalar_text(*a);
    return fallback;
  }
  // Custom ingredients: per-item tables behave like map, otherwise a scalar.
  if (!task.items.empty()) {
    std::vector<std::string> parts;
    for (const auto& item : task.items) {
      auto a = answer_item(task, item);
      if (!a) a = fallback;
      if (!a) return std::nullopt;
      parts.push_back(*a);
    }
    return semi_join(parts);
  }
  if (auto c = fixture_.find("custom"); c != fixture_.end() && c->is_object()) {
    if (const nlohmann::json* a = section(*c, task.kind, task.question)) {
      if (auto s = scalar_text(*a)) return s;
    }
  }
  return fallback;
}

BlenderResponse LookupBlender::complete(const BlenderRequest& req) {
  calls_.fetch_add(1);
  auto text = answer(req);
  if (!text) {
    throw Error(ErrorCode::NoMatch, "lookup blender has no answer for prompt " +
                                        prompt_hash(req.system_prompt, req.user_prompt).substr(0, 12));
  }
  BlenderResponse resp;
  resp.text = std::move(*text);
  resp.usage = {req.prompt_chars(), resp.text.size(), 1};
  return resp;
}

BlenderResponse FunctionBlender::complete(const BlenderRequest& req) {
  calls_.fetch_add(1);
  BlenderResponse resp;
  resp.text = fn_(req);
  resp.usage = {req.prompt_chars(), resp.text.size(), 1};
  return resp;
}

BlenderResponse ConstraintEchoBlender::complete(const BlenderRequest& req) {
  BlenderResponse resp;
  if (req.constraint.kind == Constraint::Kind::ValueSet && !req.constraint.values.empty()) {
    resp.text = req.constraint.values.front();
    resp.constrained = true;
  } else {
    resp.text = fallback_;
  }
  resp.usage = {req.prompt_chars(), resp.text.size(), 1};
  return resp;
}

std::shared_ptr<Blender> make_blender(const std::string& spec) {
  if (spec.rfind("lookup:", 0) == 0) return LookupBlender::from_file(spec.substr(7), false);
  if (spec.rfind("lookup-strict:", 0) == 0) return LookupBlender::from_file(spec.substr(14), true);
  if (spec == "echo") return std::make_shared<ConstraintEchoBlender>();
  if (spec == "remote") return std::make_shared<RemoteBlender>(RemoteConfig::from_env());
  throw Error(ErrorCode::Config, "unknown blender '" + spec +
                                     "' (expected lookup:FILE, lookup-strict:FILE, echo or remote)");
}

}  // namespace hql

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

#include <filesystem>

#include "hql/cli.hpp"

namespace hql::cli {

nlohmann::json cmd_ingest(const IngestRequest& request) {
  namespace fs = std::filesystem;
  if (request.db.empty()) throw Error(ErrorCode::Config, "no output database given");
  if (fs::exists(request.db)) {
    if (!request.overwrite) throw Error(ErrorCode::Io, request.db + " already exists (use --force)");
    fs::remove(request.db);
  }
  // Read everything first so a bad input leaves no half-built file.
  std::vector<std::pair<std::string, CsvData>> tables;
  for (const auto& [name, path] : request.tables) {
    try {
      tables.emplace_back(name, read_csv(path));
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.what());
    }
  }
  std::vector<Document> docs;
  if (!request.docs.empty()) docs = read_documents_jsonl(request.docs);

  nlohmann::json counts = nlohmann::json::object();
  try {
    Database db = Database::create(request.db);
    CsvIngestOptions opts;
    opts.index_column = request.index_column;
    for (const auto& [name, data] : tables) counts[name] = ingest_table(db, name, data, opts);
    if (!request.docs.empty()) {
      counts[std::string(kDocumentsTable)] = ingest_documents(db, docs, request.tokenizer);
    }
    return {{"db", request.db}, {"tables", counts}, {"documents_present", db.documents_present()}};
  } catch (...) {
    std::error_code ec;
    fs::remove(request.db, ec);
    throw;
  }
}

}  // namespace hql::cli

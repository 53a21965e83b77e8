// Copyright 2026 The DLD Authors. All Rights Reserved.
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

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "dld/embedding.hpp"
#include "dld/llm.hpp"
#include "dld/lse.hpp"
#include "dld/transport.hpp"

namespace dld {

/// Endpoint and tuning settings, read from a JSON file:
///   {
///     "llm":       {"endpoint": "...", "top_n_tokens": 20, "yes_tokens": [...], "no_tokens": [...],
///                   "timeout_ms": 60000, "max_in_flight": 4, "max_context_items": 30, "max_desc_chars": 1000},
///     "embedding": {"endpoint": "...", "timeout_ms": 60000, "max_in_flight": 4},
///     "wikidata":  {"search_endpoint": "...", "sparql_endpoint": "...", "user_agent": "...",
///                   "min_interval_ms": 500, "max_results": 10}
///   }
/// Every key is optional.
struct RunConfig {
  LlmBackendConfig llm;
  EmbeddingBackendConfig embedding;
  WikidataConfig wikidata;
  int lse_max_results = 10;
};

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Applies DLD_LLM_ENDPOINT, DLD_LLM_API_KEY and DLD_EMBED_ENDPOINT.
void apply_env_overrides(RunConfig& config, const EnvLookup& env);
std::optional<std::string> process_env(const char* name);

/// Transport for offline runs: every send throws TransportError.
std::shared_ptr<HttpTransport> make_offline_transport();

}  // namespace dld

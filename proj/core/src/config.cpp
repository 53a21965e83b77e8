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

#include "dld/config.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace dld {

namespace {

using json = nlohmann::json;

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_ms(const json& obj, const char* key, std::chrono::milliseconds& out) {
  if (obj.contains(key)) out = std::chrono::milliseconds(obj.at(key).get<long long>());
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig config;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  try {
    if (doc.contains("llm")) {
      const json& llm = doc["llm"];
      read_opt(llm, "endpoint", config.llm.endpoint);
      read_opt(llm, "api_key", config.llm.api_key);
      read_opt(llm, "top_n_tokens", config.llm.top_n_tokens);
      if (llm.contains("yes_tokens")) {
        config.llm.yes_tokens.clear();
        for (const auto& t : llm["yes_tokens"]) config.llm.yes_tokens.insert(t.get<std::string>());
      }
      if (llm.contains("no_tokens")) {
        config.llm.no_tokens.clear();
        for (const auto& t : llm["no_tokens"]) config.llm.no_tokens.insert(t.get<std::string>());
      }
      read_ms(llm, "timeout_ms", config.llm.request_timeout);
      read_opt(llm, "max_in_flight", config.llm.max_in_flight);
      read_opt(llm, "max_context_items", config.llm.prompt.max_context_items);
      read_opt(llm, "max_desc_chars", config.llm.prompt.max_desc_chars);
    }
    if (doc.contains("embedding")) {
      const json& emb = doc["embedding"];
      read_opt(emb, "endpoint", config.embedding.endpoint);
      read_opt(emb, "api_key", config.embedding.api_key);
      read_ms(emb, "timeout_ms", config.embedding.request_timeout);
      read_opt(emb, "max_in_flight", config.embedding.max_in_flight);
    }
    if (doc.contains("wikidata")) {
      const json& wd = doc["wikidata"];
      read_opt(wd, "search_endpoint", config.wikidata.search_endpoint);
      read_opt(wd, "sparql_endpoint", config.wikidata.sparql_endpoint);
      read_opt(wd, "user_agent", config.wikidata.user_agent);
      read_ms(wd, "min_interval_ms", config.wikidata.min_interval);
      read_opt(wd, "max_results", config.lse_max_results);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  config.llm.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void apply_env_overrides(RunConfig& config, const EnvLookup& env) {
  if (auto v = env("DLD_LLM_ENDPOINT")) config.llm.endpoint = *v;
  if (auto v = env("DLD_LLM_API_KEY")) config.llm.api_key = *v;
  if (auto v = env("DLD_EMBED_ENDPOINT")) config.embedding.endpoint = *v;
}

std::optional<std::string> process_env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

namespace {

class OfflineTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override {
    throw TransportError("network disabled (offline run; pass --live to allow it): " + request.url);
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_offline_transport() { return std::make_shared<OfflineTransport>(); }

}  // namespace dld

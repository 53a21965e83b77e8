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

#include "dld/testkit.hpp"

#include <algorithm>
#include <fstream>
#include <httplib.h>
#include <json.hpp>
#include <sstream>

#include "dld/hash.hpp"
#include "dld/scc.hpp"
#include "dld/tfidf.hpp"

namespace dld::testkit {

namespace {

using json = nlohmann::ordered_json;

TokenDistribution distribution_from(const json& obj, const std::string& where) {
  if (!obj.is_object() || !obj.contains("tokens") || !obj["tokens"].is_array()) {
    throw ParseError(where + ": expected {\"tokens\": [...]}");
  }
  std::vector<TokenProbability> entries;
  for (const auto& t : obj["tokens"]) {
    if (!t.is_object() || !t.contains("token") || !t.contains("probability")) {
      throw ParseError(where + ": token entries need 'token' and 'probability'");
    }
    entries.push_back({t["token"].get<std::string>(), t["probability"].get<double>()});
  }
  try {
    return TokenDistribution(std::move(entries));
  } catch (const ArgumentError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

json distribution_to(const TokenDistribution& dist) {
  json tokens = json::array();
  for (const auto& e : dist.entries()) tokens.push_back({{"token", e.token}, {"probability", e.probability}});
  return {{"tokens", tokens}};
}

}  // namespace

const TokenDistribution& scripted_llm_respond(const ScriptedLlm& script, std::string_view prompt) {
  for (const auto& rule : script.rules) {
    if (prompt.find(rule.pattern) != std::string_view::npos) return rule.response;
  }
  return script.fallback;
}

ScriptedLlm parse_llm_script(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("LLM script is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("LLM script must be an object");
  ScriptedLlm script;
  try {
    if (doc.contains("rules")) {
      std::size_t i = 0;
      for (const auto& r : doc["rules"]) {
        const std::string where = "rule " + std::to_string(i++);
        if (!r.contains("pattern") || !r["pattern"].is_string()) throw ParseError(where + ": missing 'pattern'");
        script.rules.push_back({r["pattern"].get<std::string>(), distribution_from(r, where)});
      }
    }
    if (doc.contains("default")) script.fallback = distribution_from(doc["default"], "default");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed LLM script: ") + e.what());
  }
  return script;
}

ScriptedLlm load_llm_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read LLM script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_llm_script(buf.str());
}

std::string llm_script_to_json(const ScriptedLlm& script) {
  json rules = json::array();
  for (const auto& rule : script.rules) {
    json r = distribution_to(rule.response);
    r["pattern"] = rule.pattern;
    rules.push_back(std::move(r));
  }
  return json{{"rules", rules}, {"default", distribution_to(script.fallback)}}.dump(2) + "\n";
}

TokenDistribution yes_no(double p_yes) {
  std::vector<TokenProbability> entries;
  if (p_yes > 0.0) entries.push_back({"Yes", p_yes});
  if (p_yes < 1.0) entries.push_back({"No", 1.0 - p_yes});
  return TokenDistribution(std::move(entries));
}

ScriptedLlmBackend::ScriptedLlmBackend(ScriptedLlm script) : script_(std::move(script)) {}

TokenDistribution ScriptedLlmBackend::first_token_distribution(const std::string& prompt, int top_n) {
  ++calls_;
  {
    std::lock_guard lock(mutex_);
    prompts_.push_back(prompt);
  }
  const auto& full = scripted_llm_respond(script_, prompt).entries();
  const auto keep = std::min(full.size(), static_cast<std::size_t>(std::max(top_n, 1)));
  return TokenDistribution(std::vector<TokenProbability>(full.begin(), full.begin() + keep));
}

std::vector<std::string> ScriptedLlmBackend::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

std::string sts_pair_pattern(std::string_view query, std::string_view description, const PromptLimits& limits) {
  // Everything after the column list; the column list is the only part that
  // depends on the label set.
  const DescriptiveLabel marker{"\x02", "marker"};
  const std::string with_marker = render_sts_prompt(query, std::span(&marker, 1), description, limits);
  const std::string bullet = "  - \x02\n";
  const auto at = with_marker.find(bullet);
  if (at == std::string::npos) throw ArgumentError("STS template has no column list");
  return with_marker.substr(at + bullet.size());
}

std::string scc_pair_pattern(std::span<const DescriptiveLabel> labels, std::span<const GlossaryEntry> glossary,
                             const PromptLimits& limits) {
  return build_scc_prompt(labels, glossary, limits);
}

ScriptedLlm perfect_oracle_script(const Dataset& dataset, const PromptLimits& limits) {
  ScriptedLlm script;
  script.fallback = yes_no(0.0);
  for (const auto& g : dataset.groups) {
    for (std::size_t p = 0; p < g.labels.size() && p < g.glossary.size(); ++p) {
      // The whole prompt, column list included, so a label text shared by two
      // groups still has exactly one true description.
      script.rules.push_back(
          {render_sts_prompt(g.labels[p].text, g.labels, g.glossary[p].text, limits), yes_no(1.0)});
    }
    script.rules.push_back({scc_pair_pattern(g.labels, g.glossary, limits), yes_no(1.0)});
  }
  return script;
}

MockKnowledgeSource::MockKnowledgeSource(const KnowledgeCache& cache) {
  for (const auto& record : cache.records()) {
    const json key = json::parse(record.key);
    const json payload = json::parse(record.payload);
    if (record.kind == "search") {
      std::vector<std::string> ids;
      for (const auto& id : payload) ids.push_back(id.get<std::string>());
      search_[key.at(0).get<std::string>()] = std::move(ids);
    } else if (record.kind == "entities") {
      for (const auto& e : payload) {
        EntityText text{e.at("id").get<std::string>(), e.value("label", ""), e.value("description", "")};
        entities_[text.entity_id] = text;
      }
    }
  }
}

void MockKnowledgeSource::add(std::string query, std::vector<EntityText> entities) {
  auto& ids = search_[std::move(query)];
  for (auto& e : entities) {
    ids.push_back(e.entity_id);
    entities_[e.entity_id] = std::move(e);
  }
}

Lookup<std::vector<EntityRef>> MockKnowledgeSource::search_entities(std::string_view query, int max_results) {
  ++searches_;
  Lookup<std::vector<EntityRef>> out{{}, true};
  const auto it = search_.find(query);
  if (it == search_.end()) return out;
  for (const auto& id : it->second) {
    if (static_cast<int>(out.value.size()) >= max_results) break;
    out.value.push_back({id, EntitySource::kMock});
  }
  return out;
}

Lookup<std::vector<EntityText>> MockKnowledgeSource::fetch_entity_texts(std::span<const EntityRef> refs) {
  Lookup<std::vector<EntityText>> out{{}, true};
  for (const auto& ref : refs) {
    const auto it = entities_.find(ref.entity_id);
    if (it != entities_.end()) out.value.push_back(it->second);
  }
  return out;
}

HashedEmbeddingBackend::HashedEmbeddingBackend(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ArgumentError("embedding dimension must be positive");
}

std::vector<SentenceVector> HashedEmbeddingBackend::embed(std::span<const std::string> texts) {
  ++calls_;
  texts_ += texts.size();
  std::vector<SentenceVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    SentenceVector v{std::vector<double>(dimension_, 0.0)};
    for (const auto& token : tokenize(text).tokens) v.values[fnv1a64(token) % dimension_] += 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

ScriptedEmbeddingBackend::ScriptedEmbeddingBackend(std::map<std::string, SentenceVector, std::less<>> table)
    : table_(std::move(table)) {}

std::vector<SentenceVector> ScriptedEmbeddingBackend::embed(std::span<const std::string> texts) {
  ++calls_;
  std::vector<SentenceVector> out;
  for (const auto& text : texts) {
    const auto it = table_.find(text);
    if (it == table_.end()) throw BackendError("no scripted vector for '" + text + "'");
    out.push_back(it->second);
  }
  return out;
}

HttpResponse FailingTransport::send(const HttpRequest& request) {
  ++calls_;
  throw TransportError("connection refused: " + request.url);
}

ScriptedTransport::ScriptedTransport(Handler handler) : handler_(std::move(handler)) {}

HttpResponse ScriptedTransport::send(const HttpRequest& request) {
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
  }
  return handler_(request);
}

std::size_t ScriptedTransport::calls() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

std::vector<HttpRequest> ScriptedTransport::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

struct StubServer::Impl {
  ScriptedLlm script;
  HashedEmbeddingBackend embedder;
  httplib::Server server;

  Impl(ScriptedLlm s, std::size_t dimension) : script(std::move(s)), embedder(dimension) {}
};

StubServer::StubServer(ScriptedLlm script, std::size_t embedding_dimension)
    : impl_(std::make_unique<Impl>(std::move(script), embedding_dimension)) {
  auto bad_request = [](httplib::Response& res, const std::string& message) {
    res.status = 400;
    res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
  };
  impl_->server.Post("/llm", [this, bad_request](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    try {
      const auto body = nlohmann::json::parse(req.body);
      const std::string prompt = body.at("prompt").get<std::string>();
      const int top_n = body.value("top_n_tokens", 20);
      const auto& full = scripted_llm_respond(impl_->script, prompt).entries();
      const auto keep = std::min(full.size(), static_cast<std::size_t>(std::max(top_n, 1)));
      const TokenDistribution dist(std::vector<TokenProbability>(full.begin(), full.begin() + keep));
      res.set_content(token_distribution_to_json(dist), "application/json");
    } catch (const std::exception& e) {
      bad_request(res, e.what());
    }
  });
  impl_->server.Post("/embed", [this, bad_request](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    try {
      const auto body = nlohmann::json::parse(req.body);
      const auto texts = body.at("texts").get<std::vector<std::string>>();
      if (texts.size() > 64) return bad_request(res, "at most 64 texts per request");
      const auto vectors = impl_->embedder.embed(texts);
      res.set_content(embedding_response_to_json(vectors), "application/json");
    } catch (const std::exception& e) {
      bad_request(res, e.what());
    }
  });
}

StubServer::~StubServer() { stop(); }

void StubServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void StubServer::run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!impl_->server.listen(host, port)) throw IoError("cannot serve on " + host + ":" + std::to_string(port));
}

void StubServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string StubServer::base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace dld::testkit

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

#include "dld/lse.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "dld/hash.hpp"

namespace dld {

namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kSearchKind = "search";
constexpr std::string_view kEntitiesKind = "entities";

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool valid_entity_id(std::string_view id) {
  if (id.size() < 2 || (id[0] != 'Q' && id[0] != 'P' && id[0] != 'L')) return false;
  return std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string> sorted_unique_ids(std::span<const EntityRef> refs) {
  std::set<std::string> ids;
  for (const auto& ref : refs) ids.insert(ref.entity_id);
  return {ids.begin(), ids.end()};
}

template <typename E>
[[noreturn]] void rethrow_with_label(const E& e, std::string_view label) {
  throw E("enriching label '" + std::string(label) + "': " + e.what());
}

}  // namespace

std::string serialize_cache_record(const CacheRecord& record) {
  json line;
  line["kind"] = record.kind;
  line["key"] = json::parse(record.key);
  line["payload"] = json::parse(record.payload);
  line["fetched_at"] = record.fetched_at;
  return line.dump();
}

CacheRecord parse_cache_record(std::string_view line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("cache record is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string() || !doc.contains("key") ||
      !doc.contains("payload") || !doc.contains("fetched_at") || !doc["fetched_at"].is_string()) {
    throw ParseError("cache record needs kind, key, payload and fetched_at");
  }
  return {doc["kind"].get<std::string>(), doc["key"].dump(), doc["payload"].dump(),
          doc["fetched_at"].get<std::string>()};
}

std::string search_cache_key(std::string_view query, int max_results) {
  return json::array({std::string(query), max_results}).dump();
}

std::string entities_cache_key(std::span<const EntityRef> refs) {
  return json(sorted_unique_ids(refs)).dump();
}

std::shared_ptr<KnowledgeCache> KnowledgeCache::load(const std::filesystem::path& path) {
  auto cache = std::make_shared<KnowledgeCache>();
  std::ifstream in(path);
  if (!in) {
    if (std::filesystem::exists(path)) throw IoError("cannot read cache file " + path.string());
    return cache;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      cache->insert_locked(parse_cache_record(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cache;
}

std::shared_ptr<KnowledgeCache> KnowledgeCache::open(const std::filesystem::path& path) {
  auto cache = load(path);
  cache->backing_file_ = path;
  return cache;
}

std::optional<std::string> KnowledgeCache::find(std::string_view kind, std::string_view key) const {
  std::shared_lock lock(mutex_);
  const auto it = index_.find(std::pair<std::string, std::string>(kind, key));
  if (it == index_.end()) return std::nullopt;
  return records_[it->second].payload;
}

void KnowledgeCache::insert_locked(CacheRecord record) {
  index_[{record.kind, record.key}] = records_.size();
  records_.push_back(std::move(record));
}

void KnowledgeCache::insert(CacheRecord record) {
  std::unique_lock lock(mutex_);
  if (backing_file_) {
    if (backing_file_->has_parent_path()) std::filesystem::create_directories(backing_file_->parent_path());
    std::ofstream out(*backing_file_, std::ios::app);
    if (!out) throw IoError("cannot append to cache file " + backing_file_->string());
    out << serialize_cache_record(record) << '\n';
  }
  insert_locked(std::move(record));
}

std::vector<CacheRecord> KnowledgeCache::records() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::size_t KnowledgeCache::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

void KnowledgeCache::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write cache file " + path.string());
  for (const auto& record : records()) out << serialize_cache_record(record) << '\n';
}

std::string KnowledgeCache::content_hash() const {
  std::string all;
  for (const auto& record : records()) {
    all += serialize_cache_record(record);
    all += '\n';
  }
  return sha256_hex(all);
}

Clock system_clock() {
  Clock clock;
  clock.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  clock.timestamp = utc_timestamp;
  return clock;
}

WikidataClient::WikidataClient(WikidataConfig config, std::shared_ptr<KnowledgeCache> cache,
                               std::shared_ptr<HttpTransport> transport, Clock clock)
    : config_(std::move(config)),
      cache_(std::move(cache)),
      transport_(std::move(transport)),
      clock_(std::move(clock)) {
  if (!cache_) cache_ = std::make_shared<KnowledgeCache>();
  if (!clock_.now) clock_.now = [] { return std::chrono::steady_clock::now(); };
  if (!clock_.sleep) clock_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!clock_.timestamp) clock_.timestamp = utc_timestamp;
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

std::size_t WikidataClient::network_requests() const {
  std::lock_guard lock(queue_mutex_);
  return requests_;
}

HttpResponse WikidataClient::send_rate_limited(const HttpRequest& request, std::string_view what) {
  if (!transport_) {
    throw RetrievalError("cache miss for " + std::string(what) + " and live fetching is disabled");
  }
  std::lock_guard lock(queue_mutex_);
  for (int attempt = 1;; ++attempt) {
    if (last_request_) {
      const auto ready = *last_request_ + config_.min_interval;
      const auto now = clock_.now();
      if (now < ready) {
        clock_.sleep(std::chrono::ceil<std::chrono::milliseconds>(ready - now));
      }
    }
    last_request_ = clock_.now();
    ++requests_;
    HttpResponse response;
    try {
      response = transport_->send(request);
    } catch (const TransportError& e) {
      throw RetrievalError("cache miss for " + std::string(what) + ", fetch failed: " + e.what());
    }
    if (response.status == 429 || response.status == 503) {
      if (attempt >= config_.max_attempts) {
        throw RetrievalError(std::string(what) + ": rate limited (HTTP " + std::to_string(response.status) +
                             ") after " + std::to_string(attempt) + " attempts");
      }
      clock_.sleep(config_.backoff * (1 << (attempt - 1)));
      continue;
    }
    if (response.status < 200 || response.status >= 300) {
      throw RetrievalError(std::string(what) + ": HTTP status " + std::to_string(response.status));
    }
    return response;
  }
}

Lookup<std::vector<EntityRef>> WikidataClient::search_entities(std::string_view query, int max_results) {
  if (trim(query).empty()) throw ArgumentError("search_entities: empty query");
  if (max_results < 1) throw ArgumentError("search_entities: max_results must be >= 1");
  const std::string key = search_cache_key(query, max_results);

  auto to_refs = [](const std::vector<std::string>& ids) {
    std::vector<EntityRef> refs;
    for (const auto& id : ids) refs.push_back({id, EntitySource::kWikidata});
    return refs;
  };

  if (auto payload = cache_->find(kSearchKind, key)) {
    return {to_refs(json::parse(*payload).get<std::vector<std::string>>()), true};
  }

  HttpRequest request;
  request.method = "GET";
  request.url = config_.search_endpoint + "?action=wbsearchentities&search=" + url_encode(query) +
                "&language=en&uselang=en&type=item&limit=" + std::to_string(max_results) + "&format=json";
  request.headers = {{"User-Agent", config_.user_agent}, {"Accept", "application/json"}};
  request.timeout = config_.request_timeout;
  const HttpResponse response = send_rate_limited(request, "search " + key);

  std::vector<std::string> ids = parse_search_response(response.body);
  if (ids.size() > static_cast<std::size_t>(max_results)) ids.resize(static_cast<std::size_t>(max_results));
  cache_->insert({std::string(kSearchKind), key, json(ids).dump(), clock_.timestamp()});
  return {to_refs(ids), false};
}

Lookup<std::vector<EntityText>> WikidataClient::fetch_entity_texts(std::span<const EntityRef> refs) {
  if (refs.empty()) throw ArgumentError("fetch_entity_texts: no entity refs");
  const std::vector<std::string> ids = sorted_unique_ids(refs);
  for (const auto& id : ids) {
    if (!valid_entity_id(id)) throw ArgumentError("not a Wikidata entity ID: '" + id + "'");
  }
  const std::string key = json(ids).dump();

  std::map<std::string, EntityText> by_id;
  bool from_cache = false;
  if (auto cached = cache_->find(kEntitiesKind, key)) {
    from_cache = true;
    for (const auto& item : json::parse(*cached)) {
      EntityText text{item.at("id").get<std::string>(), item.at("label").get<std::string>(),
                      item.at("description").get<std::string>()};
      by_id.emplace(text.entity_id, std::move(text));
    }
  } else {
    HttpRequest request;
    request.method = "POST";
    request.url = config_.sparql_endpoint;
    request.content_type = "application/x-www-form-urlencoded";
    request.body = "query=" + url_encode(build_entity_sparql(ids));
    request.headers = {{"User-Agent", config_.user_agent}, {"Accept", "application/sparql-results+json"}};
    request.timeout = config_.request_timeout;
    const HttpResponse response = send_rate_limited(request, "entities " + key);
    const auto parsed = parse_sparql_response(response.body);

    json payload = json::array();
    for (const auto& id : ids) {
      EntityText text{id, "", ""};
      if (auto it = parsed.find(id); it != parsed.end()) text = it->second;
      payload.push_back({{"id", text.entity_id}, {"label", text.label}, {"description", text.description}});
      by_id.emplace(id, std::move(text));
    }
    cache_->insert({std::string(kEntitiesKind), key, payload.dump(), clock_.timestamp()});
  }

  std::vector<EntityText> out;
  out.reserve(refs.size());
  for (const auto& ref : refs) {
    auto it = by_id.find(ref.entity_id);
    out.push_back(it == by_id.end() ? EntityText{ref.entity_id, "", ""} : it->second);
  }
  return {std::move(out), from_cache};
}

std::string build_entity_sparql(std::span<const std::string> entity_ids) {
  std::string values;
  for (const auto& id : entity_ids) {
    if (!valid_entity_id(id)) throw ArgumentError("not a Wikidata entity ID: '" + id + "'");
    if (!values.empty()) values += ' ';
    values += "wd:" + id;
  }
  return "PREFIX wd: <http://www.wikidata.org/entity/>\n"
         "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n"
         "PREFIX schema: <http://schema.org/>\n"
         "SELECT ?item ?label ?description WHERE {\n"
         "  VALUES ?item { " + values + " }\n"
         "  OPTIONAL { ?item rdfs:label ?label . FILTER(LANG(?label) = \"en\") }\n"
         "  OPTIONAL { ?item schema:description ?description . FILTER(LANG(?description) = \"en\") }\n"
         "}\n";
}

std::vector<std::string> parse_search_response(std::string_view body) {
  std::vector<std::string> ids;
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_discarded()) {
    if (!doc.is_object() || !doc.contains("search") || !doc["search"].is_array()) {
      throw ProtocolError("search response lacks a 'search' array");
    }
    for (const auto& hit : doc["search"]) {
      if (!hit.is_object() || !hit.contains("id") || !hit["id"].is_string()) {
        throw ProtocolError("search hit without an id: " + hit.dump());
      }
      ids.push_back(hit["id"].get<std::string>());
    }
    return ids;
  }
  // HTML result page: entity links in page order.
  static const std::regex link(R"re(href="/wiki/(Q[0-9]+)")re");
  std::set<std::string> seen;
  const std::string html(body);
  for (auto it = std::sregex_iterator(html.begin(), html.end(), link); it != std::sregex_iterator(); ++it) {
    std::string id = (*it)[1].str();
    if (seen.insert(id).second) ids.push_back(std::move(id));
  }
  if (ids.empty() && html.find("<html") == std::string::npos) {
    throw ProtocolError("search response is neither JSON nor an HTML result page");
  }
  return ids;
}

std::map<std::string, EntityText> parse_sparql_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("SPARQL response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].contains("bindings") ||
      !doc["results"]["bindings"].is_array()) {
    throw ProtocolError("SPARQL response lacks results.bindings");
  }
  std::map<std::string, EntityText> out;
  for (const auto& row : doc["results"]["bindings"]) {
    if (!row.contains("item") || !row["item"].contains("value")) {
      throw ProtocolError("SPARQL binding without ?item");
    }
    const std::string iri = row["item"]["value"].get<std::string>();
    const std::string id = iri.substr(iri.find_last_of('/') + 1);
    auto& text = out[id];
    text.entity_id = id;
    if (text.label.empty() && row.contains("label")) text.label = row["label"]["value"].get<std::string>();
    if (text.description.empty() && row.contains("description")) {
      text.description = row["description"]["value"].get<std::string>();
    }
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, std::string>> sentences_with_source(std::span<const EntityText> texts) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  for (const auto& t : texts) {
    if (trim(t.label).empty()) continue;
    std::string sentence = t.description.empty() ? t.label : t.label + ": " + t.description;
    if (seen.insert(sentence).second) out.emplace_back(std::move(sentence), t.entity_id);
  }
  return out;
}

}  // namespace

std::vector<std::string> generate_sentences(std::span<const EntityText> texts) {
  std::vector<std::string> out;
  for (auto& [sentence, id] : sentences_with_source(texts)) out.push_back(std::move(sentence));
  return out;
}

EnrichmentResult enrich(const DescriptiveLabel& label, const MatchConfig& config, KnowledgeSource& knowledge,
                        const EnrichOptions& options) {
  EnrichmentResult result;
  result.label_text = label.text;
  const EntityRef raw_ref{label.label_id.empty() ? label.text : label.label_id, EntitySource::kRawLabel};
  if (!config.lse_enabled) {
    result.sentences = {label.text};
    result.provenance = {raw_ref};
    return result;
  }

  std::vector<std::pair<std::string, std::string>> generated;
  EntitySource source = EntitySource::kWikidata;
  try {
    const auto hits = knowledge.search_entities(label.text, options.max_results);
    result.cache_hit = hits.from_cache;
    if (!hits.value.empty()) {
      source = hits.value.front().source;
      const auto texts = knowledge.fetch_entity_texts(hits.value);
      result.cache_hit = result.cache_hit && texts.from_cache;
      generated = sentences_with_source(texts.value);
    }
  } catch (const RetrievalError& e) {
    rethrow_with_label(e, label.text);
  } catch (const ProtocolError& e) {
    rethrow_with_label(e, label.text);
  }

  if (config.include_raw_label) {
    result.sentences.push_back(label.text);
    result.provenance.push_back(raw_ref);
  }
  for (auto& [sentence, id] : generated) {
    if (config.include_raw_label && sentence == label.text) continue;
    result.sentences.push_back(std::move(sentence));
    result.provenance.push_back({id, source});
  }
  return result;
}

}  // namespace dld

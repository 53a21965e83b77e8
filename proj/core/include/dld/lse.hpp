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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dld/domain.hpp"
#include "dld/transport.hpp"

namespace dld {

enum class EntitySource { kWikidata, kMock, kRawLabel };

struct EntityRef {
  std::string entity_id;
  EntitySource source = EntitySource::kWikidata;

  friend bool operator==(const EntityRef&, const EntityRef&) = default;
};

struct EntityText {
  std::string entity_id;
  std::string label;
  std::string description;

  friend bool operator==(const EntityText&, const EntityText&) = default;
};

/// Sentences gathered for one label. provenance[i] names the entity that
/// produced sentences[i]; the raw label carries a kRawLabel ref.
struct EnrichmentResult {
  std::string label_text;
  std::vector<std::string> sentences;
  std::vector<EntityRef> provenance;
  // Every lookup behind this result was answered without a network call.
  bool cache_hit = true;

  friend bool operator==(const EnrichmentResult&, const EnrichmentResult&) = default;
};

template <typename T>
struct Lookup {
  T value;
  bool from_cache = false;
};

// Where enrichment sentences come from. Implementations: WikidataClient
// (cached, optionally live) and testkit's MockKnowledgeSource.
class KnowledgeSource {
 public:
  virtual ~KnowledgeSource() = default;
  /// Entity IDs matching `query`, in the engine's rank order.
  virtual Lookup<std::vector<EntityRef>> search_entities(std::string_view query, int max_results) = 0;
  /// English label/description per ref, in ref order.
  virtual Lookup<std::vector<EntityText>> fetch_entity_texts(std::span<const EntityRef> refs) = 0;
};

/// One line of the cache file:
///   {"kind":"search","key":["lvdd",10],"payload":["Q1","Q2"],"fetched_at":"..."}
///   {"kind":"entities","key":["Q1","Q2"],"payload":[{"id":..,"label":..,"description":..}],"fetched_at":".."}
/// key and payload hold compact JSON text.
struct CacheRecord {
  std::string kind;
  std::string key;
  std::string payload;
  std::string fetched_at;

  friend bool operator==(const CacheRecord&, const CacheRecord&) = default;
};

std::string serialize_cache_record(const CacheRecord& record);
/// Throws ParseError when `line` is not a record.
CacheRecord parse_cache_record(std::string_view line);

std::string search_cache_key(std::string_view query, int max_results);
/// Key over the sorted, de-duplicated entity IDs.
std::string entities_cache_key(std::span<const EntityRef> refs);

// Append-only record store, optionally backed by a file. Concurrent readers,
// serialized writers. A later record for the same (kind, key) shadows earlier
// ones.
class KnowledgeCache {
 public:
  KnowledgeCache() = default;

  /// Loads `path` if it exists (ParseError names the line) and appends new
  /// records to it.
  static std::shared_ptr<KnowledgeCache> open(const std::filesystem::path& path);
  /// Loads without attaching: inserts stay in memory.
  static std::shared_ptr<KnowledgeCache> load(const std::filesystem::path& path);

  std::optional<std::string> find(std::string_view kind, std::string_view key) const;
  void insert(CacheRecord record);

  std::vector<CacheRecord> records() const;
  std::size_t size() const;
  /// Writes every record, one per line, in insertion order.
  void save(const std::filesystem::path& path) const;
  /// SHA-256 over the serialized records.
  std::string content_hash() const;

 private:
  void insert_locked(CacheRecord record);

  mutable std::shared_mutex mutex_;
  std::vector<CacheRecord> records_;
  std::map<std::pair<std::string, std::string>, std::size_t, std::less<>> index_;
  std::optional<std::filesystem::path> backing_file_;
};

struct WikidataConfig {
  std::string search_endpoint = "https://www.wikidata.org/w/api.php";
  std::string sparql_endpoint = "https://query.wikidata.org/sparql";
  std::string user_agent = "dld-matcher/0.1 (descriptive-label matching; offline-first research tool)";
  std::chrono::milliseconds min_interval{500};
  std::chrono::milliseconds backoff{1000};
  int max_attempts = 3;
  std::chrono::milliseconds request_timeout{30000};
};

/// Hooks for the rate limiter; tests replace them with a fake clock.
struct Clock {
  std::function<std::chrono::steady_clock::time_point()> now = [] { return std::chrono::steady_clock::now(); };
  std::function<void(std::chrono::milliseconds)> sleep;
  std::function<std::string()> timestamp;
};

Clock system_clock();

// Wikidata entity search + SPARQL label/description lookup behind the cache.
// All live requests share one rate-limited queue; 429/503 answers are retried
// with exponential backoff up to max_attempts. Without a transport every
// cache miss is a RetrievalError.
class WikidataClient final : public KnowledgeSource {
 public:
  WikidataClient(WikidataConfig config, std::shared_ptr<KnowledgeCache> cache,
                 std::shared_ptr<HttpTransport> transport, Clock clock = system_clock());

  Lookup<std::vector<EntityRef>> search_entities(std::string_view query, int max_results) override;
  Lookup<std::vector<EntityText>> fetch_entity_texts(std::span<const EntityRef> refs) override;

  std::size_t network_requests() const;

 private:
  HttpResponse send_rate_limited(const HttpRequest& request, std::string_view what);

  WikidataConfig config_;
  std::shared_ptr<KnowledgeCache> cache_;
  std::shared_ptr<HttpTransport> transport_;
  Clock clock_;
  mutable std::mutex queue_mutex_;
  std::optional<std::chrono::steady_clock::time_point> last_request_;
  std::size_t requests_ = 0;
};

/// SPARQL text selecting English rdfs:label and schema:description for the
/// given entity IDs.
std::string build_entity_sparql(std::span<const std::string> entity_ids);

/// Entity IDs from a wbsearchentities JSON answer; falls back to scraping
/// "/wiki/Q..." links when the body is an HTML search page.
std::vector<std::string> parse_search_response(std::string_view body);

/// (id -> label, description) from SPARQL JSON results.
std::map<std::string, EntityText> parse_sparql_response(std::string_view body);

/// "{label}: {description}", or "{label}" when the description is empty;
/// exact duplicates keep their first occurrence. Entities without a label
/// produce nothing.
std::vector<std::string> generate_sentences(std::span<const EntityText> texts);

struct EnrichOptions {
  int max_results = 10;
};

/// LSE(l | on/off). Off: exactly [label.text]. On: search, fetch, generate;
/// with config.include_raw_label the raw label is prepended (deduplicated).
/// Retrieval errors are rethrown with the label text attached.
EnrichmentResult enrich(const DescriptiveLabel& label, const MatchConfig& config,
                        KnowledgeSource& knowledge, const EnrichOptions& options = {});

}  // namespace dld

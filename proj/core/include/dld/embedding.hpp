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
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dld/memo.hpp"
#include "dld/sts.hpp"
#include "dld/transport.hpp"

namespace dld {

struct SentenceVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
  /// True when every component is zero.
  bool degenerate() const noexcept;

  friend bool operator==(const SentenceVector&, const SentenceVector&) = default;
};

/// dot(a,b) / (|a||b|), or 0 when either norm is below 1e-12. Throws
/// ArgumentError on dimension mismatch.
double cosine_similarity(const SentenceVector& a, const SentenceVector& b);

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  /// One vector per input text, in input order.
  virtual std::vector<SentenceVector> embed(std::span<const std::string> texts) = 0;
};

struct EmbeddingBackendConfig {
  std::string endpoint;
  std::string api_key;
  std::chrono::milliseconds request_timeout{60000};
  std::size_t max_in_flight = 4;
  std::size_t max_batch = 64;
};

/// HTTP client for the embedding protocol:
///   POST {endpoint}  {"texts": ["...", ...]}            (at most 64 texts)
///   200              {"vectors": [[...], ...], "dimension": d}
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(EmbeddingBackendConfig config, std::shared_ptr<HttpTransport> transport);

  std::vector<SentenceVector> embed(std::span<const std::string> texts) override;

 private:
  std::vector<SentenceVector> embed_batch(std::span<const std::string> texts);

  EmbeddingBackendConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::counting_semaphore<> in_flight_;
};

/// Parses an embedding response body; `expected` is the number of texts sent.
std::vector<SentenceVector> embedding_response_from_json(std::string_view body, std::size_t expected);
std::string embedding_response_to_json(std::span<const SentenceVector> vectors);

// Per-run vector cache keyed by exact string. Each distinct string reaches
// the backend at most once, even under concurrent lookups. All vectors must
// share one dimension; drift raises ProtocolError.
class CachingEmbedder {
 public:
  explicit CachingEmbedder(std::shared_ptr<EmbeddingBackend> backend);

  SentenceVector vector_for(const std::string& text);

  /// Fetches every uncached text in batched backend calls.
  void prefetch(std::span<const std::string> texts);

  std::size_t cached_count() const { return cache_.size(); }

 private:
  void check_dimension(const SentenceVector& v);

  std::shared_ptr<EmbeddingBackend> backend_;
  SingleFlightCache<std::string, SentenceVector> cache_;
  std::mutex dimension_mutex_;
  std::optional<std::size_t> dimension_;
};

/// Cosine of the two strings' vectors, clamped to [0,1].
double sts_embedding_score(const std::string& sentence, const std::string& description,
                           CachingEmbedder& embedder);

// STS(s, g | P).
class EmbeddingSts final : public StsBackend {
 public:
  explicit EmbeddingSts(std::shared_ptr<CachingEmbedder> embedder);

  StsScore score(std::string_view sentence, const GlossaryEntry& description,
                 const StsContext& context) override;

 private:
  std::shared_ptr<CachingEmbedder> embedder_;
};

}  // namespace dld

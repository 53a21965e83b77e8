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

#include "dld/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <set>

namespace dld {

namespace {

using json = nlohmann::json;

}  // namespace

bool SentenceVector::degenerate() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double cosine_similarity(const SentenceVector& a, const SentenceVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ArgumentError("cosine_similarity: dimension " + std::to_string(a.dimension()) + " vs " +
                        std::to_string(b.dimension()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  if (a.values == b.values) return 1.0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

HttpEmbeddingBackend::HttpEmbeddingBackend(EmbeddingBackendConfig config,
                                           std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_in_flight))) {
  if (config_.endpoint.empty()) throw ArgumentError("embedding endpoint is not configured");
  if (!transport_) throw ArgumentError("embedding backend needs a transport");
  config_.max_batch = std::clamp<std::size_t>(config_.max_batch, 1, 64);
}

std::vector<SentenceVector> HttpEmbeddingBackend::embed(std::span<const std::string> texts) {
  std::vector<SentenceVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += config_.max_batch) {
    auto batch = embed_batch(texts.subspan(start, std::min(config_.max_batch, texts.size() - start)));
    std::move(batch.begin(), batch.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<SentenceVector> HttpEmbeddingBackend::embed_batch(std::span<const std::string> texts) {
  HttpRequest request;
  request.method = "POST";
  request.url = config_.endpoint;
  request.content_type = "application/json";
  request.body = json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}.dump();
  request.timeout = config_.request_timeout;
  if (!config_.api_key.empty()) request.headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  HttpResponse response;
  in_flight_.acquire();
  try {
    response = transport_->send(request);
  } catch (const TransportError& e) {
    in_flight_.release();
    throw BackendError("embedding backend " + config_.endpoint + ": " + e.what());
  } catch (...) {
    in_flight_.release();
    throw;
  }
  in_flight_.release();
  if (response.status < 200 || response.status >= 300) {
    throw BackendError("embedding backend " + config_.endpoint + ": HTTP status " +
                       std::to_string(response.status));
  }
  return embedding_response_from_json(response.body, texts.size());
}

std::vector<SentenceVector> embedding_response_from_json(std::string_view body, std::size_t expected) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("embedding response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array() ||
      !doc.contains("dimension") || !doc["dimension"].is_number_integer()) {
    throw ProtocolError("embedding response lacks 'vectors'/'dimension'");
  }
  const auto dimension = doc["dimension"].get<long long>();
  if (dimension < 1) throw ProtocolError("embedding dimension must be >= 1");
  if (doc["vectors"].size() != expected) {
    throw ProtocolError("embedding response has " + std::to_string(doc["vectors"].size()) +
                        " vectors for " + std::to_string(expected) + " texts");
  }
  std::vector<SentenceVector> out;
  out.reserve(expected);
  for (const auto& row : doc["vectors"]) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(dimension)) {
      throw ProtocolError("embedding vector does not match declared dimension " + std::to_string(dimension));
    }
    SentenceVector v;
    v.values.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw ProtocolError("embedding vector holds a non-number");
      v.values.push_back(x.get<double>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string embedding_response_to_json(std::span<const SentenceVector> vectors) {
  json rows = json::array();
  for (const auto& v : vectors) rows.push_back(v.values);
  const std::size_t dimension = vectors.empty() ? 0 : vectors.front().dimension();
  return json{{"vectors", rows}, {"dimension", dimension}}.dump();
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<EmbeddingBackend> backend) : backend_(std::move(backend)) {
  if (!backend_) throw ArgumentError("CachingEmbedder needs a backend");
}

void CachingEmbedder::check_dimension(const SentenceVector& v) {
  std::lock_guard lock(dimension_mutex_);
  if (!dimension_) {
    if (v.dimension() == 0) throw ProtocolError("embedding backend returned an empty vector");
    dimension_ = v.dimension();
  } else if (*dimension_ != v.dimension()) {
    throw ProtocolError("embedding dimension drifted from " + std::to_string(*dimension_) + " to " +
                        std::to_string(v.dimension()));
  }
}

SentenceVector CachingEmbedder::vector_for(const std::string& text) {
  return cache_.get_or_compute(text, [&] {
    const std::string one[] = {text};
    auto vectors = backend_->embed(one);
    if (vectors.size() != 1) throw ProtocolError("embedding backend returned a wrong vector count");
    check_dimension(vectors.front());
    return std::move(vectors.front());
  });
}

void CachingEmbedder::prefetch(std::span<const std::string> texts) {
  std::vector<std::string> missing;
  {
    std::set<std::string> seen;
    for (const auto& t : texts) {
      if (!cache_.contains(t) && seen.insert(t).second) missing.push_back(t);
    }
  }
  if (missing.empty()) return;
  // Compute the whole batch inside the first key's slot; the remaining keys
  // are then filled from the batch result without further backend calls.
  std::map<std::string, SentenceVector> batch;
  bool fetched = false;
  auto fetch_all = [&] {
    if (fetched) return;
    fetched = true;
    auto vectors = backend_->embed(missing);
    if (vectors.size() != missing.size()) throw ProtocolError("embedding backend returned a wrong vector count");
    for (std::size_t i = 0; i < missing.size(); ++i) {
      check_dimension(vectors[i]);
      batch.emplace(missing[i], std::move(vectors[i]));
    }
  };
  for (const auto& text : missing) {
    cache_.get_or_compute(text, [&] {
      fetch_all();
      return batch.at(text);
    });
  }
}

double sts_embedding_score(const std::string& sentence, const std::string& description,
                           CachingEmbedder& embedder) {
  const SentenceVector a = embedder.vector_for(sentence);
  const SentenceVector b = embedder.vector_for(description);
  return std::max(0.0, cosine_similarity(a, b));
}

EmbeddingSts::EmbeddingSts(std::shared_ptr<CachingEmbedder> embedder) : embedder_(std::move(embedder)) {
  if (!embedder_) throw ArgumentError("embedding STS needs an embedder");
}

StsScore EmbeddingSts::score(std::string_view sentence, const GlossaryEntry& description, const StsContext&) {
  return {sts_embedding_score(std::string(sentence), description.text, *embedder_), false};
}

}  // namespace dld

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

// Deterministic stand-ins for every external dependency: a scripted LLM, an
// offline embedder, a fixture-backed knowledge source, canned transports and
// a loopback HTTP server speaking the LLM and embedding protocols.

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dld/domain.hpp"
#include "dld/embedding.hpp"
#include "dld/llm.hpp"
#include "dld/lse.hpp"
#include "dld/transport.hpp"

namespace dld::testkit {

// Prompts containing `pattern` (plain substring) get `response`.
struct ScriptRule {
  std::string pattern;
  TokenDistribution response;
};

/// First matching rule wins; unmatched prompts get `fallback`.
///
/// File form:
///   {"rules": [{"pattern": "...", "tokens": [{"token": "Yes", "probability": 0.9}]}],
///    "default": {"tokens": [{"token": "No", "probability": 1.0}]}}
struct ScriptedLlm {
  std::vector<ScriptRule> rules;
  TokenDistribution fallback{{{"No", 1.0}}};
};

const TokenDistribution& scripted_llm_respond(const ScriptedLlm& script, std::string_view prompt);

ScriptedLlm parse_llm_script(std::string_view text);
ScriptedLlm load_llm_script(const std::filesystem::path& path);
std::string llm_script_to_json(const ScriptedLlm& script);

/// {"Yes": p, "No": 1 - p}, omitting zero entries.
TokenDistribution yes_no(double p_yes);

class ScriptedLlmBackend final : public LlmBackend {
 public:
  explicit ScriptedLlmBackend(ScriptedLlm script);

  /// Returns the scripted distribution cut to its `top_n` most probable tokens.
  TokenDistribution first_token_distribution(const std::string& prompt, int top_n) override;

  std::size_t calls() const { return calls_.load(); }
  std::vector<std::string> prompts() const;

 private:
  ScriptedLlm script_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  std::vector<std::string> prompts_;
};

/// Substring that appears only in STS prompts asking about `query` against
/// `description`.
std::string sts_pair_pattern(std::string_view query, std::string_view description,
                             const PromptLimits& limits = {});

/// Substring that appears only in SCC prompts pairing `labels` with `glossary`.
std::string scc_pair_pattern(std::span<const DescriptiveLabel> labels, std::span<const GlossaryEntry> glossary,
                             const PromptLimits& limits = {});

/// Says yes (p = 1) to the raw-label STS prompt of every true pair and the
/// SCC prompt of every home (L, G) pair of `dataset`; no to everything else.
ScriptedLlm perfect_oracle_script(const Dataset& dataset, const PromptLimits& limits = {});

// Knowledge source answering from a fixed table; unknown queries return no
// entities rather than failing.
class MockKnowledgeSource final : public KnowledgeSource {
 public:
  MockKnowledgeSource() = default;
  /// Reads search and entities records from a cache; the max_results part
  /// of search keys is ignored.
  explicit MockKnowledgeSource(const KnowledgeCache& cache);

  void add(std::string query, std::vector<EntityText> entities);

  Lookup<std::vector<EntityRef>> search_entities(std::string_view query, int max_results) override;
  Lookup<std::vector<EntityText>> fetch_entity_texts(std::span<const EntityRef> refs) override;

  std::size_t searches() const { return searches_.load(); }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> search_;
  std::map<std::string, EntityText, std::less<>> entities_;
  std::atomic<std::size_t> searches_{0};
};

/// Hashed bag-of-words vectors: each lowercase token adds 1 to bucket
/// fnv1a64(token) % dimension. Texts sharing no token are orthogonal.
class HashedEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit HashedEmbeddingBackend(std::size_t dimension = 256);

  std::vector<SentenceVector> embed(std::span<const std::string> texts) override;

  std::size_t calls() const { return calls_.load(); }
  std::size_t texts_embedded() const { return texts_.load(); }

 private:
  std::size_t dimension_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> texts_{0};
};

/// Fixed table of vectors; unknown texts raise BackendError.
class ScriptedEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit ScriptedEmbeddingBackend(std::map<std::string, SentenceVector, std::less<>> table);

  std::vector<SentenceVector> embed(std::span<const std::string> texts) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, SentenceVector, std::less<>> table_;
  std::atomic<std::size_t> calls_{0};
};

/// Every send throws TransportError.
class FailingTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// Answers through a handler and records every request.
class ScriptedTransport final : public HttpTransport {
 public:
  using Handler = std::function<HttpResponse(const HttpRequest&)>;
  explicit ScriptedTransport(Handler handler);

  HttpResponse send(const HttpRequest& request) override;
  std::size_t calls() const;
  std::vector<HttpRequest> requests() const;

 private:
  Handler handler_;
  mutable std::mutex mutex_;
  std::vector<HttpRequest> requests_;
};

/// Loopback server for the wire protocols:
///   POST /llm    answered from a ScriptedLlm
///   POST /embed  answered by a HashedEmbeddingBackend
class StubServer {
 public:
  explicit StubServer(ScriptedLlm script, std::size_t embedding_dimension = 256);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  /// Binds `host:port` (0 picks a free port) and serves on a background
  /// thread. Throws IoError if the bind fails.
  void start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

  int port() const { return port_; }
  std::string base_url() const;
  std::size_t requests() const { return requests_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
  std::string host_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace dld::testkit

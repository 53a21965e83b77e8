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
#include <semaphore>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dld/domain.hpp"
#include "dld/sts.hpp"
#include "dld/transport.hpp"

namespace dld {

struct TokenProbability {
  std::string token;
  double probability = 0.0;

  friend bool operator==(const TokenProbability&, const TokenProbability&) = default;
};

/// Top-N candidates for the first generated answer token, most probable first.
class TokenDistribution {
 public:
  TokenDistribution() = default;

  /// Sorts by descending probability (stable) and validates: at least one
  /// entry, probabilities in [0,1] summing to at most 1 + 1e-6, no duplicate
  /// tokens. Throws ArgumentError otherwise.
  explicit TokenDistribution(std::vector<TokenProbability> entries);

  const std::vector<TokenProbability>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;

 private:
  std::vector<TokenProbability> entries_;
};

// Shape limits shared by the STS and SCC prompts.
struct PromptLimits {
  std::size_t max_context_items = 30;
  std::size_t max_desc_chars = 1000;
};

struct LlmBackendConfig {
  std::string endpoint;
  std::string api_key;
  int top_n_tokens = 20;
  std::set<std::string, std::less<>> yes_tokens{"yes", "y", "true"};
  std::set<std::string, std::less<>> no_tokens{"no", "n", "false"};
  std::chrono::milliseconds request_timeout{60000};
  std::size_t max_in_flight = 4;
  PromptLimits prompt;

  /// Throws ArgumentError when the token sets overlap or either is empty, or
  /// top_n_tokens / max_in_flight are below 1.
  void validate() const;
};

/// The label-matching question for `label` against one glossary description,
/// listing `label_set` as context. Throws ArgumentError if `label` is not in
/// `label_set`.
std::string build_sts_prompt(const DescriptiveLabel& label, std::span<const DescriptiveLabel> label_set,
                             const GlossaryEntry& description, const PromptLimits& limits = {});

/// Same template with an arbitrary query text in the question line; used when
/// the query is an enrichment sentence rather than the raw label.
std::string render_sts_prompt(std::string_view query, std::span<const DescriptiveLabel> label_set,
                              std::string_view description, const PromptLimits& limits = {});

/// Upper bound on render_sts_prompt's output size for a given query length
/// and per-label length cap.
std::size_t sts_prompt_size_bound(std::size_t query_bytes, std::size_t max_label_bytes,
                                  const PromptLimits& limits);

/// p_yes / (p_yes + p_no) with tokens matched after trim + lowercase. Returns
/// 0.5 flagged undetermined when the yes/no mass is below 1e-12.
StsScore score_from_token_distribution(const TokenDistribution& dist, const LlmBackendConfig& config);

// Anything that answers a prompt with its first-token distribution.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual TokenDistribution first_token_distribution(const std::string& prompt, int top_n) = 0;
};

/// HTTP client for the first-token protocol:
///   POST {endpoint}  {"prompt": "...", "top_n_tokens": N}
///   200              {"tokens": [{"token": "Yes", "probability": 0.91}, ...]}
/// At most config.max_in_flight requests are outstanding at once.
class HttpLlmBackend final : public LlmBackend {
 public:
  HttpLlmBackend(LlmBackendConfig config, std::shared_ptr<HttpTransport> transport);

  TokenDistribution first_token_distribution(const std::string& prompt, int top_n) override;

 private:
  LlmBackendConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::counting_semaphore<> in_flight_;
};

/// Serializes a distribution in the wire shape ({"tokens": [...]}).
std::string token_distribution_to_json(const TokenDistribution& dist);

/// Parses the wire shape; throws ProtocolError on anything else.
TokenDistribution token_distribution_from_json(std::string_view body);

/// Short stable fingerprint used in error messages instead of whole prompts.
std::string prompt_hash(std::string_view prompt);

/// Full STS(l, g, L | L) for a raw label.
StsScore sts_llm_score(const DescriptiveLabel& label, std::span<const DescriptiveLabel> label_set,
                       const GlossaryEntry& description, LlmBackend& backend,
                       const LlmBackendConfig& config);

// STS(s, g, L | L): the prompt names the query sentence and lists L.
class LlmSts final : public StsBackend {
 public:
  LlmSts(std::shared_ptr<LlmBackend> backend, LlmBackendConfig config);

  StsScore score(std::string_view sentence, const GlossaryEntry& description,
                 const StsContext& context) override;

 private:
  std::shared_ptr<LlmBackend> backend_;
  LlmBackendConfig config_;
};

namespace detail {

/// Replaces {name} placeholders in one pass; substituted text is never rescanned.
std::string render_template(std::string_view tmpl,
                            std::span<const std::pair<std::string_view, std::string_view>> values);

/// First `max_chars` UTF-8 code points of `text`.
std::string_view truncate_utf8(std::string_view text, std::size_t max_chars);

std::string bullet_lines(std::span<const std::string_view> items, std::size_t max_items,
                         std::size_t max_chars);

}  // namespace detail

}  // namespace dld

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

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dld/domain.hpp"
#include "dld/embedding.hpp"
#include "dld/llm.hpp"
#include "dld/lse.hpp"
#include "dld/memo.hpp"
#include "dld/scc.hpp"
#include "dld/sts.hpp"

namespace dld {

struct TextScore {
  double score = 0.0;
  std::string best_sentence;
  bool undetermined = false;
};

struct ScoreBreakdown {
  double text_score = 0.0;
  double context_score = 1.0;
  double total = 0.0;
  std::string best_sentence;
  bool sts_undetermined = false;
  bool scc_undetermined = false;
};

struct RankedCandidate {
  std::size_t candidate_index = 0;
  ScoreBreakdown score;
};

struct RankedCandidates {
  // Non-increasing total; ties by ascending candidate_index.
  std::vector<RankedCandidate> order;
  // 1 + number of distractors whose total is >= the truth's.
  std::size_t rank_of_truth = 0;
};

// The (l, L) side of a comparison.
struct LabelSide {
  const DescriptiveLabel* label = nullptr;
  std::span<const DescriptiveLabel> label_set;
  std::string group_id;
};

// One (g, G) candidate.
struct GlossarySide {
  const GlossaryEntry* entry = nullptr;
  std::span<const GlossaryEntry> glossary;
  std::string group_id;
};

/// Psi_T given already-enriched sentences: max STS over them, first maximum
/// wins. No sentences gives (0, "").
TextScore text_similarity_score(std::span<const std::string> sentences, const GlossaryEntry& description,
                                StsBackend& sts, const StsContext& context);

/// Psi_T including the enrichment step. `knowledge` may be null when LSE is off.
TextScore text_similarity_score(const DescriptiveLabel& label, std::span<const DescriptiveLabel> label_set,
                                const GlossaryEntry& description, const MatchConfig& config, StsBackend& sts,
                                KnowledgeSource* knowledge, const StsContext& context,
                                const EnrichOptions& options = {});

/// Psi = Psi_T * Psi_C.
ScoreBreakdown combine_scores(const TextScore& text, const StsScore& context);

/// Orders breakdowns by the ranking rule and computes the pessimistic rank of
/// `truth_index`.
RankedCandidates rank_scores(std::span<const ScoreBreakdown> scores, std::size_t truth_index);

/// idf statistics over the candidates' descriptions.
CorpusStats candidate_corpus(std::span<const GlossarySide> candidates);

struct Backends {
  std::shared_ptr<LlmBackend> llm;
  LlmBackendConfig llm_config;
  std::shared_ptr<CachingEmbedder> embedder;
  std::shared_ptr<KnowledgeSource> knowledge;
  EnrichOptions enrich_options;
};

// Memo tables that outlive a single configuration: enrichment per label and
// SCC per (L, G). Share one instance across all configs of a run.
class RunCaches {
 public:
  SingleFlightCache<std::string, EnrichmentResult>& enrichments() { return enrichments_; }
  /// Lazily created on first use with the given backend.
  ContextScorer& context_scorer(const std::shared_ptr<LlmBackend>& backend, const LlmBackendConfig& config);

 private:
  SingleFlightCache<std::string, EnrichmentResult> enrichments_;
  std::mutex scorer_mutex_;
  std::unique_ptr<ContextScorer> scorer_;
};

// Psi(l, g, L, G | theta) for one configuration, with its backends wired.
class Matcher {
 public:
  /// Throws ArgumentError when a backend required by `config` is missing.
  Matcher(MatchConfig config, Backends backends, std::shared_ptr<RunCaches> caches = nullptr);

  const MatchConfig& config() const noexcept { return config_; }

  /// Memoized LSE(l | theta_LSE).
  EnrichmentResult enrichment(const DescriptiveLabel& label);

  ScoreBreakdown dld_score(const LabelSide& label, const GlossarySide& candidate, const StsContext& context);

  /// Scores each candidate and ranks them. Requires at least two candidates
  /// and a valid truth index; any candidate error aborts with context.
  RankedCandidates rank_candidates(const LabelSide& label, std::span<const GlossarySide> candidates,
                                   std::size_t truth_index, std::size_t workers = 1);

  /// Scores and orders without a designated truth (rank_of_truth = 0).
  std::vector<RankedCandidate> order_candidates(const LabelSide& label, std::span<const GlossarySide> candidates,
                                                std::size_t workers = 1);

 private:
  std::vector<ScoreBreakdown> score_all(const LabelSide& label, std::span<const GlossarySide> candidates,
                                        std::size_t workers);

  MatchConfig config_;
  Backends backends_;
  std::shared_ptr<RunCaches> caches_;
  std::unique_ptr<StsBackend> sts_;
};

}  // namespace dld

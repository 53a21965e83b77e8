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

#include "dld/scoring.hpp"

#include <algorithm>
#include <numeric>

#include "dld/parallel.hpp"

namespace dld {

namespace {

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const BackendError& e) {
    throw BackendError(where + ": " + e.what());
  } catch (const ProtocolError& e) {
    throw ProtocolError(where + ": " + e.what());
  } catch (const RetrievalError& e) {
    throw RetrievalError(where + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw ArgumentError(where + ": " + e.what());
  }
}

// Stands in when LSE is off; enrich never consults it then.
class NoKnowledge final : public KnowledgeSource {
 public:
  Lookup<std::vector<EntityRef>> search_entities(std::string_view, int) override {
    throw ArgumentError("LSE is enabled but no knowledge source is configured");
  }
  Lookup<std::vector<EntityText>> fetch_entity_texts(std::span<const EntityRef>) override {
    throw ArgumentError("LSE is enabled but no knowledge source is configured");
  }
};

KnowledgeSource& knowledge_or_none(KnowledgeSource* knowledge) {
  static NoKnowledge none;
  return knowledge != nullptr ? *knowledge : none;
}

}  // namespace

TextScore text_similarity_score(std::span<const std::string> sentences, const GlossaryEntry& description,
                                StsBackend& sts, const StsContext& context) {
  TextScore best;
  bool first = true;
  for (const auto& sentence : sentences) {
    const StsScore s = sts.score(sentence, description, context);
    if (first || s.value > best.score) {
      best = {s.value, sentence, s.undetermined};
      first = false;
    }
  }
  return best;
}

TextScore text_similarity_score(const DescriptiveLabel& label, std::span<const DescriptiveLabel> label_set,
                                const GlossaryEntry& description, const MatchConfig& config, StsBackend& sts,
                                KnowledgeSource* knowledge, const StsContext& context,
                                const EnrichOptions& options) {
  StsContext ctx = context;
  if (ctx.label_set.empty()) ctx.label_set = label_set;
  const EnrichmentResult enriched = enrich(label, config, knowledge_or_none(knowledge), options);
  return text_similarity_score(enriched.sentences, description, sts, ctx);
}

ScoreBreakdown combine_scores(const TextScore& text, const StsScore& context) {
  ScoreBreakdown out;
  out.text_score = text.score;
  out.context_score = context.value;
  out.total = text.score * context.value;
  out.best_sentence = text.best_sentence;
  out.sts_undetermined = text.undetermined;
  out.scc_undetermined = context.undetermined;
  return out;
}

RankedCandidates rank_scores(std::span<const ScoreBreakdown> scores, std::size_t truth_index) {
  if (truth_index >= scores.size()) {
    throw ArgumentError("truth index " + std::to_string(truth_index) + " out of range for " +
                        std::to_string(scores.size()) + " candidates");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].total > scores[b].total; });
  RankedCandidates ranked;
  ranked.order.reserve(order.size());
  for (std::size_t idx : order) ranked.order.push_back({idx, scores[idx]});
  const double truth_total = scores[truth_index].total;
  ranked.rank_of_truth = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != truth_index && scores[i].total >= truth_total) ++ranked.rank_of_truth;
  }
  return ranked;
}

CorpusStats candidate_corpus(std::span<const GlossarySide> candidates) {
  std::vector<TokenizedText> docs;
  docs.reserve(candidates.size());
  for (const auto& c : candidates) docs.push_back(tokenize(c.entry->text));
  return build_corpus_stats(docs);
}

ContextScorer& RunCaches::context_scorer(const std::shared_ptr<LlmBackend>& backend,
                                         const LlmBackendConfig& config) {
  std::lock_guard lock(scorer_mutex_);
  if (!scorer_) scorer_ = std::make_unique<ContextScorer>(backend, config);
  return *scorer_;
}

Matcher::Matcher(MatchConfig config, Backends backends, std::shared_ptr<RunCaches> caches)
    : config_(config), backends_(std::move(backends)), caches_(std::move(caches)) {
  if (!caches_) caches_ = std::make_shared<RunCaches>();
  switch (config_.sts_backend) {
    case StsBackendKind::kTfidf:
      sts_ = std::make_unique<TfidfSts>();
      break;
    case StsBackendKind::kEmbedding:
      if (!backends_.embedder) throw ArgumentError(config_.name() + ": no embedding backend configured");
      sts_ = std::make_unique<EmbeddingSts>(backends_.embedder);
      break;
    case StsBackendKind::kLlm:
      if (!backends_.llm) throw ArgumentError(config_.name() + ": no LLM backend configured");
      sts_ = std::make_unique<LlmSts>(backends_.llm, backends_.llm_config);
      break;
  }
  if (config_.scc_enabled && !backends_.llm) {
    throw ArgumentError(config_.name() + ": SCC needs an LLM backend");
  }
  if (config_.lse_enabled && !backends_.knowledge) {
    throw ArgumentError(config_.name() + ": LSE needs a knowledge source");
  }
}

EnrichmentResult Matcher::enrichment(const DescriptiveLabel& label) {
  if (!config_.lse_enabled) return enrich(label, config_, knowledge_or_none(nullptr), backends_.enrich_options);
  const std::string key = std::string(config_.include_raw_label ? "1" : "0") + '\x1f' + label.label_id +
                          '\x1f' + label.text;
  return caches_->enrichments().get_or_compute(
      key, [&] { return enrich(label, config_, *backends_.knowledge, backends_.enrich_options); });
}

ScoreBreakdown Matcher::dld_score(const LabelSide& label, const GlossarySide& candidate, const StsContext& context) {
  const EnrichmentResult enriched = enrichment(*label.label);
  StsContext ctx = context;
  if (ctx.label_set.empty()) ctx.label_set = label.label_set;
  const TextScore text = text_similarity_score(enriched.sentences, *candidate.entry, *sts_, ctx);
  StsScore context_score{1.0, false};
  if (config_.scc_enabled) {
    context_score = caches_->context_scorer(backends_.llm, backends_.llm_config)
                        .score({label.group_id, candidate.group_id}, label.label_set, candidate.glossary);
  }
  return combine_scores(text, context_score);
}

std::vector<ScoreBreakdown> Matcher::score_all(const LabelSide& label, std::span<const GlossarySide> candidates,
                                               std::size_t workers) {
  if (label.label == nullptr) throw ArgumentError("label side has no label");
  const std::string where = config_.name() + " label '" + label.label->text + "'";
  // Enrich once up front so candidate workers share the result.
  with_context(where, [&] { return enrichment(*label.label); });

  CorpusStats corpus;
  StsContext context;
  context.label_set = label.label_set;
  if (config_.sts_backend == StsBackendKind::kTfidf) {
    corpus = candidate_corpus(candidates);
    context.corpus = &corpus;
  }
  std::vector<ScoreBreakdown> scores(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    scores[i] = with_context(where + " candidate " + std::to_string(i),
                             [&] { return dld_score(label, candidates[i], context); });
  });
  return scores;
}

RankedCandidates Matcher::rank_candidates(const LabelSide& label, std::span<const GlossarySide> candidates,
                                          std::size_t truth_index, std::size_t workers) {
  if (candidates.size() < 2) throw ArgumentError("rank_candidates needs at least two candidates");
  if (truth_index >= candidates.size()) {
    throw ArgumentError("truth index " + std::to_string(truth_index) + " out of range");
  }
  const auto scores = score_all(label, candidates, workers);
  return rank_scores(scores, truth_index);
}

std::vector<RankedCandidate> Matcher::order_candidates(const LabelSide& label,
                                                       std::span<const GlossarySide> candidates,
                                                       std::size_t workers) {
  if (candidates.empty()) throw ArgumentError("no candidates to order");
  const auto scores = score_all(label, candidates, workers);
  return rank_scores(scores, 0).order;
}

}  // namespace dld

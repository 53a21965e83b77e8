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

#include "dld/scc.hpp"

#include <string>
#include <vector>

#include "dld_prompt_templates.hpp"

namespace dld {

std::string build_scc_prompt(std::span<const DescriptiveLabel> labels, std::span<const GlossaryEntry> glossary,
                             const PromptLimits& limits) {
  if (labels.empty()) throw ArgumentError("build_scc_prompt: empty label set");
  if (glossary.empty()) throw ArgumentError("build_scc_prompt: empty glossary");
  std::vector<std::string_view> label_texts;
  for (const auto& l : labels) label_texts.push_back(l.text);
  std::vector<std::string_view> descriptions;
  for (const auto& g : glossary) descriptions.push_back(g.text);
  const std::string columns = detail::bullet_lines(label_texts, limits.max_context_items, std::string::npos);
  const std::string terms = detail::bullet_lines(descriptions, limits.max_context_items, limits.max_desc_chars);
  const std::pair<std::string_view, std::string_view> values[] = {
      {"columns", columns},
      {"glossary_terms", terms},
  };
  return detail::render_template(detail::kSccPromptTemplate, values);
}

StsScore context_score(std::span<const DescriptiveLabel> labels, std::span<const GlossaryEntry> glossary,
                       LlmBackend& backend, const LlmBackendConfig& config) {
  const std::string prompt = build_scc_prompt(labels, glossary, config.prompt);
  return score_from_token_distribution(backend.first_token_distribution(prompt, config.top_n_tokens), config);
}

ContextScorer::ContextScorer(std::shared_ptr<LlmBackend> backend, LlmBackendConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {
  if (!backend_) throw ArgumentError("context scoring needs an LLM backend");
  config_.validate();
}

StsScore ContextScorer::score(const ContextKey& key, std::span<const DescriptiveLabel> labels,
                              std::span<const GlossaryEntry> glossary) {
  if (key.label_group_id.empty() || key.glossary_group_id.empty()) {
    throw ArgumentError("context key needs both group IDs");
  }
  return memo_.get_or_compute(key, [&] {
    try {
      return context_score(labels, glossary, *backend_, config_);
    } catch (const BackendError& e) {
      throw BackendError("context (" + key.label_group_id + ", " + key.glossary_group_id + "): " + e.what());
    } catch (const ProtocolError& e) {
      throw ProtocolError("context (" + key.label_group_id + ", " + key.glossary_group_id + "): " + e.what());
    }
  });
}

}  // namespace dld

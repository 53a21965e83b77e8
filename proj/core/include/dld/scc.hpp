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

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "dld/domain.hpp"
#include "dld/llm.hpp"
#include "dld/memo.hpp"

namespace dld {

// Identity of a (label set, glossary) pairing; groups are immutable during a
// run, so IDs stand in for content.
struct ContextKey {
  std::string label_group_id;
  std::string glossary_group_id;

  friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

/// Asks whether the glossary's descriptions describe the label set. Both
/// lists are cut to limits.max_context_items in source order and each
/// description to limits.max_desc_chars. Throws ArgumentError on empty input.
std::string build_scc_prompt(std::span<const DescriptiveLabel> labels, std::span<const GlossaryEntry> glossary,
                             const PromptLimits& limits = {});

/// Psi_C(L, G | on) without memoization.
StsScore context_score(std::span<const DescriptiveLabel> labels, std::span<const GlossaryEntry> glossary,
                       LlmBackend& backend, const LlmBackendConfig& config);

// Psi_C(L, G | on), memoized by ContextKey for the scorer's lifetime with
// single-flight semantics.
class ContextScorer {
 public:
  ContextScorer(std::shared_ptr<LlmBackend> backend, LlmBackendConfig config);

  StsScore score(const ContextKey& key, std::span<const DescriptiveLabel> labels,
                 std::span<const GlossaryEntry> glossary);

  std::size_t memo_size() const { return memo_.size(); }

 private:
  std::shared_ptr<LlmBackend> backend_;
  LlmBackendConfig config_;
  SingleFlightCache<ContextKey, StsScore> memo_;
};

}  // namespace dld

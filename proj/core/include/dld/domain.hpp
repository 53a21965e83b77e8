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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dld/error.hpp"

namespace dld {

/// A natural-language description belonging to one glossary.
struct GlossaryEntry {
  std::string text;
  std::string entry_id;

  friend bool operator==(const GlossaryEntry&, const GlossaryEntry&) = default;
};

/// A (possibly cryptic) label such as a column name or business term.
struct DescriptiveLabel {
  std::string text;
  std::string label_id;

  friend bool operator==(const DescriptiveLabel&, const DescriptiveLabel&) = default;
};

/// A label set aligned index-wise with its glossary: labels[p] is described
/// by glossary[p].
struct SemanticGroup {
  std::string group_id;
  std::vector<DescriptiveLabel> labels;
  std::vector<GlossaryEntry> glossary;

  std::size_t size() const noexcept { return labels.size(); }

  friend bool operator==(const SemanticGroup&, const SemanticGroup&) = default;
};

struct Dataset {
  std::vector<SemanticGroup> groups;

  std::size_t entry_count() const noexcept;
  const SemanticGroup* find_group(std::string_view group_id) const noexcept;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Builds a group from parallel label/description lists, assigning IDs of the
/// form "{group_id}:{index}". Throws ArgumentError on length mismatch.
SemanticGroup make_group(std::string group_id, const std::vector<std::string>& labels,
                         const std::vector<std::string>& descriptions);

/// Every structural violation, one human-readable line each. Empty iff valid.
std::vector<std::string> validate_dataset(const Dataset& dataset);

/// The index-aligned (label, description) pair at position `index`.
std::pair<DescriptiveLabel, GlossaryEntry> true_pair(const SemanticGroup& group,
                                                     std::size_t index);

enum class StsBackendKind { kTfidf, kEmbedding, kLlm };

struct MatchConfig {
  StsBackendKind sts_backend = StsBackendKind::kTfidf;
  bool lse_enabled = false;
  bool scc_enabled = false;
  bool include_raw_label = true;

  /// Display name per the {T|P|L}[-LSE][-SCC] rule, e.g. "T-LSE-SCC".
  std::string name() const;

  /// Inverse of name(); nullopt for anything outside the 12 valid names.
  static std::optional<MatchConfig> parse(std::string_view name);

  friend bool operator==(const MatchConfig&, const MatchConfig&) = default;
};

/// All 12 switch combinations in the declaration order used by reports:
/// T, T-SCC, T-LSE, T-LSE-SCC, P, ..., L-LSE-SCC.
std::vector<MatchConfig> all_match_configs();

char backend_letter(StsBackendKind kind) noexcept;

std::string trim(std::string_view s);

}  // namespace dld

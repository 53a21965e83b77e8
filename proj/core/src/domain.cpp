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

#include "dld/domain.hpp"

#include <set>
#include <sstream>

namespace dld {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) {
    if (!out.empty()) out += "; ";
    out += line;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("validation failed: " + join_lines(violations)),
      violations_(std::move(violations)) {}

std::string trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && is_space(s[begin])) ++begin;
  while (end > begin && is_space(s[end - 1])) --end;
  return std::string(s.substr(begin, end - begin));
}

std::size_t Dataset::entry_count() const noexcept {
  std::size_t total = 0;
  for (const auto& group : groups) total += group.labels.size();
  return total;
}

const SemanticGroup* Dataset::find_group(std::string_view group_id) const noexcept {
  for (const auto& group : groups) {
    if (group.group_id == group_id) return &group;
  }
  return nullptr;
}

SemanticGroup make_group(std::string group_id, const std::vector<std::string>& labels,
                         const std::vector<std::string>& descriptions) {
  if (labels.size() != descriptions.size()) {
    std::ostringstream msg;
    msg << "group " << group_id << ": " << labels.size() << " labels but "
        << descriptions.size() << " descriptions";
    throw ArgumentError(msg.str());
  }
  SemanticGroup group;
  group.group_id = std::move(group_id);
  group.labels.reserve(labels.size());
  group.glossary.reserve(descriptions.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string id = group.group_id + ":" + std::to_string(i);
    group.labels.push_back({labels[i], id});
    group.glossary.push_back({descriptions[i], id});
  }
  return group;
}

std::vector<std::string> validate_dataset(const Dataset& dataset) {
  std::vector<std::string> violations;
  std::set<std::string> group_ids;
  for (std::size_t gi = 0; gi < dataset.groups.size(); ++gi) {
    const auto& group = dataset.groups[gi];
    const std::string where = "group " + group.group_id;
    if (trim(group.group_id).empty()) {
      violations.push_back("group #" + std::to_string(gi) + ": empty group_id");
    }
    if (!group_ids.insert(group.group_id).second) {
      violations.push_back(where + ": duplicate group_id (index " + std::to_string(gi) + ")");
    }
    if (group.labels.size() != group.glossary.size()) {
      violations.push_back(where + ": |labels|=" + std::to_string(group.labels.size()) +
                           " != |glossary|=" + std::to_string(group.glossary.size()));
    }
    std::set<std::string> label_ids;
    for (std::size_t p = 0; p < group.labels.size(); ++p) {
      const auto& label = group.labels[p];
      if (trim(label.text).empty()) {
        violations.push_back(where + ": label " + std::to_string(p) + " is empty");
      }
      if (!label_ids.insert(label.label_id).second) {
        violations.push_back(where + ": duplicate label_id '" + label.label_id + "' at index " +
                             std::to_string(p));
      }
    }
    std::set<std::string> entry_ids;
    for (std::size_t p = 0; p < group.glossary.size(); ++p) {
      const auto& entry = group.glossary[p];
      if (trim(entry.text).empty()) {
        violations.push_back(where + ": description " + std::to_string(p) + " is empty");
      }
      if (!entry_ids.insert(entry.entry_id).second) {
        violations.push_back(where + ": duplicate entry_id '" + entry.entry_id + "' at index " +
                             std::to_string(p));
      }
    }
  }
  return violations;
}

std::pair<DescriptiveLabel, GlossaryEntry> true_pair(const SemanticGroup& group,
                                                     std::size_t index) {
  if (index >= group.labels.size() || index >= group.glossary.size()) {
    throw RangeError("group " + group.group_id + ": index " + std::to_string(index) +
                     " out of range (size " + std::to_string(group.labels.size()) + ")");
  }
  return {group.labels[index], group.glossary[index]};
}

char backend_letter(StsBackendKind kind) noexcept {
  switch (kind) {
    case StsBackendKind::kTfidf:
      return 'T';
    case StsBackendKind::kEmbedding:
      return 'P';
    case StsBackendKind::kLlm:
      return 'L';
  }
  return '?';
}

std::string MatchConfig::name() const {
  std::string out(1, backend_letter(sts_backend));
  if (lse_enabled) out += "-LSE";
  if (scc_enabled) out += "-SCC";
  return out;
}

std::optional<MatchConfig> MatchConfig::parse(std::string_view name) {
  for (const auto& config : all_match_configs()) {
    if (config.name() == name) return config;
  }
  return std::nullopt;
}

std::vector<MatchConfig> all_match_configs() {
  std::vector<MatchConfig> configs;
  for (auto kind : {StsBackendKind::kTfidf, StsBackendKind::kEmbedding, StsBackendKind::kLlm}) {
    for (bool lse : {false, true}) {
      for (bool scc : {false, true}) {
        configs.push_back({kind, lse, scc, true});
      }
    }
  }
  return configs;
}

}  // namespace dld

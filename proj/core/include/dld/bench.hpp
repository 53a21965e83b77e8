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
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dld/domain.hpp"
#include "dld/scoring.hpp"

namespace dld {

struct ChoiceCandidate {
  GlossaryEntry entry;
  std::string group_id;

  friend bool operator==(const ChoiceCandidate&, const ChoiceCandidate&) = default;
};

/// One N-choice question: find (g, G) for (l, L) among N candidates.
struct ChoiceInstance {
  DescriptiveLabel target_label;
  std::string target_group_id;
  std::size_t target_index = 0;
  std::vector<ChoiceCandidate> candidates;
  std::size_t truth_index = 0;

  friend bool operator==(const ChoiceInstance&, const ChoiceInstance&) = default;
};

/// One instance per (group, index), in dataset order. Distractors are N-1
/// entries drawn uniformly without replacement from other groups; the truth
/// lands at a random slot. Randomness is a function of (seed, group_id, index)
/// only, so output is reproducible across runs and platforms.
std::vector<ChoiceInstance> generate_choice_problems(const Dataset& dataset, std::size_t n_choices,
                                                     std::uint64_t seed);

/// Throws ArgumentError on the first violated ChoiceInstance invariant.
void check_instance(const Dataset& dataset, const ChoiceInstance& instance, std::size_t n_choices);

double compute_mrr(std::span<const std::size_t> ranks);
double compute_hits(std::span<const std::size_t> ranks, std::size_t k);

/// Hits@k cut-offs reported for a given N: {1,5,10} for N=50, else {1,3,5}
/// (limited to k <= N).
std::vector<std::size_t> hits_cutoffs(std::size_t n_choices);

struct InstanceRecord {
  std::string group_id;
  std::string label;
  std::size_t rank = 0;
  double total = 0.0;
};

struct BenchmarkReport {
  std::string config_name;
  std::size_t n_choices = 0;
  double mrr = 0.0;
  std::map<std::size_t, double> hits;
  std::size_t instance_count = 0;
  std::vector<InstanceRecord> records;
};

struct ConfigFailure {
  std::string config_name;
  std::string error;
};

struct MatrixResult {
  std::vector<BenchmarkReport> reports;
  std::vector<ConfigFailure> failures;
};

struct RunOptions {
  std::size_t workers = 1;
};

/// Ranks every instance under one configuration.
BenchmarkReport evaluate_config(const Dataset& dataset, std::span<const ChoiceInstance> instances,
                                std::size_t n_choices, Matcher& matcher, const RunOptions& options = {});

/// Generates instances once and evaluates each config in order. A failing
/// config is recorded in `failures` and the rest still run.
MatrixResult run_matrix(const Dataset& dataset, std::size_t n_choices, std::uint64_t seed,
                        std::span<const MatchConfig> configs, const Backends& backends,
                        const RunOptions& options = {});

/// config,mrr,hits@k... with one row per report (declaration order).
std::string report_csv(std::span<const BenchmarkReport> reports);
/// Column-aligned plain-text table of the same numbers.
std::string report_table(std::span<const BenchmarkReport> reports);
/// config,group,label,rank,total for every instance of every report.
std::string instances_csv(std::span<const BenchmarkReport> reports);

struct ReportFiles {
  std::filesystem::path csv;
  std::filesystem::path table;
  std::filesystem::path instances;
};

/// Writes report.csv, report.txt and instances.csv under `out_dir`.
ReportFiles emit_report(std::span<const BenchmarkReport> reports, const std::filesystem::path& out_dir);

struct RunManifest {
  std::uint64_t seed = 0;
  std::size_t n_choices = 0;
  std::vector<std::string> configs;
  std::string dataset_hash;
  std::string cache_hash;
  std::vector<ConfigFailure> failures;
};

std::string manifest_json(const RunManifest& manifest);
RunManifest parse_manifest(std::string_view text);

}  // namespace dld

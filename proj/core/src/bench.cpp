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

#include "dld/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <unordered_map>

#include "dld/hash.hpp"
#include "dld/parallel.hpp"

namespace dld {

namespace {

using json = nlohmann::ordered_json;

// Uniform integer in [0, bound) from raw 64-bit draws (rejection sampling),
// independent of the standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t draw = rng();
    if (draw < limit) return draw % bound;
  }
}

std::uint64_t instance_seed(std::uint64_t seed, std::string_view group_id, std::size_t index) {
  std::string material = std::to_string(seed);
  material += '\x1f';
  material += group_id;
  material += '\x1f';
  material += std::to_string(index);
  return fnv1a64(material);
}

struct FlatEntry {
  std::size_t group;
  std::size_t index;
};

std::string fmt_metric(double value) { return fmt::format("{:.6f}", value); }

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<ChoiceInstance> generate_choice_problems(const Dataset& dataset, std::size_t n_choices,
                                                     std::uint64_t seed) {
  if (n_choices < 2) throw ArgumentError("N-choice problems need N >= 2, got " + std::to_string(n_choices));
  const std::size_t total = dataset.entry_count();
  if (total < n_choices) {
    throw ArgumentError("dataset too small for " + std::to_string(n_choices) + "-choice problems: requires " +
                        std::to_string(n_choices) + " entries, has " + std::to_string(total));
  }
  std::vector<FlatEntry> flat;
  flat.reserve(total);
  for (std::size_t g = 0; g < dataset.groups.size(); ++g) {
    for (std::size_t p = 0; p < dataset.groups[g].labels.size(); ++p) flat.push_back({g, p});
  }

  std::vector<ChoiceInstance> instances;
  instances.reserve(total);
  std::vector<std::size_t> pool;
  for (std::size_t g = 0; g < dataset.groups.size(); ++g) {
    const SemanticGroup& group = dataset.groups[g];
    const std::size_t available = total - group.labels.size();
    if (available < n_choices - 1) {
      throw ArgumentError("dataset too small for " + std::to_string(n_choices) + "-choice problems: group " +
                          group.group_id + " requires " + std::to_string(n_choices - 1) +
                          " distractors from other groups, has " + std::to_string(available));
    }
    for (std::size_t p = 0; p < group.labels.size(); ++p) {
      std::mt19937_64 rng(instance_seed(seed, group.group_id, p));
      pool.clear();
      for (std::size_t i = 0; i < flat.size(); ++i) {
        if (flat[i].group != g) pool.push_back(i);
      }
      // Partial Fisher-Yates: the first N-1 slots become the distractors.
      for (std::size_t i = 0; i + 1 < n_choices; ++i) {
        const std::size_t j = i + uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      ChoiceInstance instance;
      instance.target_label = group.labels[p];
      instance.target_group_id = group.group_id;
      instance.target_index = p;
      instance.truth_index = uniform_below(rng, n_choices);
      instance.candidates.reserve(n_choices);
      std::size_t next = 0;
      for (std::size_t slot = 0; slot < n_choices; ++slot) {
        if (slot == instance.truth_index) {
          instance.candidates.push_back({group.glossary[p], group.group_id});
        } else {
          const FlatEntry& e = flat[pool[next++]];
          const SemanticGroup& other = dataset.groups[e.group];
          instance.candidates.push_back({other.glossary[e.index], other.group_id});
        }
      }
      instances.push_back(std::move(instance));
    }
  }
  return instances;
}

void check_instance(const Dataset& dataset, const ChoiceInstance& instance, std::size_t n_choices) {
  const std::string where = "instance " + instance.target_group_id + "[" + std::to_string(instance.target_index) + "]";
  if (instance.candidates.size() != n_choices) throw ArgumentError(where + ": wrong candidate count");
  if (instance.truth_index >= instance.candidates.size()) throw ArgumentError(where + ": truth index out of range");
  const SemanticGroup* home = dataset.find_group(instance.target_group_id);
  if (home == nullptr) throw ArgumentError(where + ": unknown target group");
  const auto [label, entry] = true_pair(*home, instance.target_index);
  if (label != instance.target_label) throw ArgumentError(where + ": target label mismatch");
  std::size_t truths = 0;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < instance.candidates.size(); ++i) {
    const auto& c = instance.candidates[i];
    if (!seen.insert({c.group_id, c.entry.entry_id}).second) throw ArgumentError(where + ": duplicate candidate");
    const bool is_truth = c.group_id == instance.target_group_id && c.entry == entry;
    if (is_truth) {
      ++truths;
      if (i != instance.truth_index) throw ArgumentError(where + ": truth not at truth_index");
    } else if (c.group_id == instance.target_group_id) {
      throw ArgumentError(where + ": distractor drawn from the target's own group");
    }
  }
  if (truths != 1) throw ArgumentError(where + ": expected exactly one true candidate");
}

double compute_mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ArgumentError("compute_mrr: empty rank list");
  double sum = 0.0;
  for (std::size_t r : ranks) {
    if (r < 1) throw ArgumentError("compute_mrr: ranks start at 1");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

double compute_hits(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw ArgumentError("compute_hits: empty rank list");
  if (k < 1) throw ArgumentError("compute_hits: k must be >= 1");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::vector<std::size_t> hits_cutoffs(std::size_t n_choices) {
  const std::vector<std::size_t> base = n_choices == 50 ? std::vector<std::size_t>{1, 5, 10}
                                                        : std::vector<std::size_t>{1, 3, 5};
  std::vector<std::size_t> out;
  for (std::size_t k : base) {
    if (k <= n_choices) out.push_back(k);
  }
  return out;
}

BenchmarkReport evaluate_config(const Dataset& dataset, std::span<const ChoiceInstance> instances,
                                std::size_t n_choices, Matcher& matcher, const RunOptions& options) {
  if (instances.empty()) throw ArgumentError("no instances to evaluate");
  std::unordered_map<std::string_view, const SemanticGroup*> groups;
  for (const auto& g : dataset.groups) groups.emplace(g.group_id, &g);
  auto group_of = [&](const std::string& id) -> const SemanticGroup& {
    const auto it = groups.find(id);
    if (it == groups.end()) throw ArgumentError("instance references unknown group " + id);
    return *it->second;
  };

  BenchmarkReport report;
  report.config_name = matcher.config().name();
  report.n_choices = n_choices;
  report.instance_count = instances.size();
  report.records.resize(instances.size());
  parallel_for(instances.size(), options.workers, [&](std::size_t i) {
    const ChoiceInstance& instance = instances[i];
    const SemanticGroup& home = group_of(instance.target_group_id);
    LabelSide label{&instance.target_label, home.labels, instance.target_group_id};
    std::vector<GlossarySide> candidates;
    candidates.reserve(instance.candidates.size());
    for (const auto& c : instance.candidates) {
      candidates.push_back({&c.entry, group_of(c.group_id).glossary, c.group_id});
    }
    const RankedCandidates ranked = matcher.rank_candidates(label, candidates, instance.truth_index);
    double truth_total = 0.0;
    for (const auto& r : ranked.order) {
      if (r.candidate_index == instance.truth_index) truth_total = r.score.total;
    }
    report.records[i] = {instance.target_group_id, instance.target_label.text, ranked.rank_of_truth, truth_total};
  });

  std::vector<std::size_t> ranks;
  ranks.reserve(report.records.size());
  for (const auto& r : report.records) ranks.push_back(r.rank);
  report.mrr = compute_mrr(ranks);
  for (std::size_t k : hits_cutoffs(n_choices)) report.hits[k] = compute_hits(ranks, k);
  return report;
}

MatrixResult run_matrix(const Dataset& dataset, std::size_t n_choices, std::uint64_t seed,
                        std::span<const MatchConfig> configs, const Backends& backends, const RunOptions& options) {
  const auto instances = generate_choice_problems(dataset, n_choices, seed);
  auto caches = std::make_shared<RunCaches>();
  MatrixResult result;
  for (const auto& config : configs) {
    try {
      Matcher matcher(config, backends, caches);
      result.reports.push_back(evaluate_config(dataset, instances, n_choices, matcher, options));
    } catch (const std::exception& e) {
      result.failures.push_back({config.name(), e.what()});
    }
  }
  return result;
}

std::string report_csv(std::span<const BenchmarkReport> reports) {
  std::set<std::size_t> ks;
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.hits) ks.insert(k);
  }
  std::string out = "config,mrr";
  for (std::size_t k : ks) out += ",hits@" + std::to_string(k);
  out += '\n';
  for (const auto& r : reports) {
    out += csv_field(r.config_name) + "," + fmt_metric(r.mrr);
    for (std::size_t k : ks) {
      const auto it = r.hits.find(k);
      out += ",";
      if (it != r.hits.end()) out += fmt_metric(it->second);
    }
    out += '\n';
  }
  return out;
}

std::string report_table(std::span<const BenchmarkReport> reports) {
  std::set<std::size_t> ks;
  std::size_t name_width = 6;
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.hits) ks.insert(k);
    name_width = std::max(name_width, r.config_name.size());
  }
  std::string out;
  if (!reports.empty()) {
    out += fmt::format("{}-choice, {} instances\n", reports.front().n_choices, reports.front().instance_count);
  }
  std::string header = fmt::format("{:<{}}  {:>8}", "config", name_width, "MRR");
  for (std::size_t k : ks) header += fmt::format("  {:>8}", "Hits@" + std::to_string(k));
  out += header + '\n';
  out += std::string(header.size(), '-') + '\n';
  for (const auto& r : reports) {
    std::string row = fmt::format("{:<{}}  {:>8.3f}", r.config_name, name_width, r.mrr);
    for (std::size_t k : ks) {
      const auto it = r.hits.find(k);
      row += it == r.hits.end() ? fmt::format("  {:>8}", "-") : fmt::format("  {:>8.3f}", it->second);
    }
    out += row + '\n';
  }
  return out;
}

std::string instances_csv(std::span<const BenchmarkReport> reports) {
  std::string out = "config,group,label,rank,total\n";
  for (const auto& r : reports) {
    for (const auto& rec : r.records) {
      out += csv_field(r.config_name) + "," + csv_field(rec.group_id) + "," + csv_field(rec.label) + "," +
             std::to_string(rec.rank) + "," + fmt_metric(rec.total) + "\n";
    }
  }
  return out;
}

ReportFiles emit_report(std::span<const BenchmarkReport> reports, const std::filesystem::path& out_dir) {
  if (reports.empty()) throw ArgumentError("emit_report: no reports");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  ReportFiles files{out_dir / "report.csv", out_dir / "report.txt", out_dir / "instances.csv"};
  write_file(files.csv, report_csv(reports));
  write_file(files.table, report_table(reports));
  write_file(files.instances, instances_csv(reports));
  return files;
}

std::string manifest_json(const RunManifest& manifest) {
  json doc;
  doc["seed"] = manifest.seed;
  doc["n_choices"] = manifest.n_choices;
  doc["configs"] = manifest.configs;
  doc["dataset_hash"] = manifest.dataset_hash;
  doc["cache_hash"] = manifest.cache_hash;
  json failures = json::array();
  for (const auto& f : manifest.failures) failures.push_back({{"config", f.config_name}, {"error", f.error}});
  doc["failures"] = failures;
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest is not JSON: ") + e.what());
  }
  RunManifest m;
  try {
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.n_choices = doc.at("n_choices").get<std::size_t>();
    m.configs = doc.at("configs").get<std::vector<std::string>>();
    m.dataset_hash = doc.at("dataset_hash").get<std::string>();
    m.cache_hash = doc.at("cache_hash").get<std::string>();
    for (const auto& f : doc.at("failures")) {
      m.failures.push_back({f.at("config").get<std::string>(), f.at("error").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

}  // namespace dld

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

// dld: ingest datasets, warm the enrichment cache, run benchmarks and match
// labels to glossaries from the command line. Offline unless --live.

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "dld/bench.hpp"
#include "dld/config.hpp"
#include "dld/ingest.hpp"
#include "dld/parallel.hpp"
#include "dld/scoring.hpp"
#include "dld/testkit.hpp"

namespace {

using namespace dld;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitRetrieval = 3;
constexpr int kExitAllConfigsFailed = 4;

struct CommonOptions {
  std::string config_file;
  bool live = false;
  std::size_t workers = default_worker_count();
  std::string cache;
};

struct BackendOptions {
  std::string llm_script;
  bool llm_oracle = false;
  bool embed_mock = false;
};

void add_common(CLI::App& cmd, CommonOptions& common) {
  cmd.add_option("--config", common.config_file, "JSON run config (endpoints, limits)")->check(CLI::ExistingFile);
  cmd.add_flag("--live", common.live, "allow network access for cache misses and model endpoints");
  cmd.add_option("--workers", common.workers, "upper bound on worker threads")->check(CLI::PositiveNumber);
}

void add_backends(CLI::App& cmd, BackendOptions& backends) {
  cmd.add_option("--llm-script", backends.llm_script, "answer LLM prompts from a script file")
      ->check(CLI::ExistingFile);
  cmd.add_flag("--llm-oracle", backends.llm_oracle, "answer LLM prompts with the dataset's perfect-oracle script");
  cmd.add_flag("--embed-mock", backends.embed_mock, "use the offline hashed bag-of-words embedder");
}

RunConfig run_config(const CommonOptions& common) {
  RunConfig config = common.config_file.empty() ? RunConfig{} : load_run_config(common.config_file);
  apply_env_overrides(config, process_env);
  config.llm.validate();
  return config;
}

std::shared_ptr<HttpTransport> transport_for(const CommonOptions& common) {
  return common.live ? make_http_transport() : make_offline_transport();
}

std::shared_ptr<KnowledgeCache> open_cache(const CommonOptions& common) {
  if (common.cache.empty()) return std::make_shared<KnowledgeCache>();
  // Only live runs write new records back to the file.
  return common.live ? KnowledgeCache::open(common.cache) : KnowledgeCache::load(common.cache);
}

Backends make_backends(const CommonOptions& common, const BackendOptions& options, const RunConfig& config,
                       const Dataset* oracle_dataset, std::shared_ptr<KnowledgeCache> cache) {
  Backends backends;
  backends.llm_config = config.llm;
  backends.enrich_options.max_results = config.lse_max_results;
  if (options.llm_oracle) {
    if (oracle_dataset == nullptr) throw ArgumentError("--llm-oracle needs a dataset");
    backends.llm = std::make_shared<testkit::ScriptedLlmBackend>(
        testkit::perfect_oracle_script(*oracle_dataset, config.llm.prompt));
  } else if (!options.llm_script.empty()) {
    backends.llm = std::make_shared<testkit::ScriptedLlmBackend>(testkit::load_llm_script(options.llm_script));
  } else if (!config.llm.endpoint.empty()) {
    backends.llm = std::make_shared<HttpLlmBackend>(config.llm, transport_for(common));
  }
  if (options.embed_mock) {
    backends.embedder = std::make_shared<CachingEmbedder>(std::make_shared<testkit::HashedEmbeddingBackend>());
  } else if (!config.embedding.endpoint.empty()) {
    backends.embedder = std::make_shared<CachingEmbedder>(
        std::make_shared<HttpEmbeddingBackend>(config.embedding, transport_for(common)));
  }
  backends.knowledge = std::make_shared<WikidataClient>(config.wikidata, std::move(cache),
                                                        common.live ? make_http_transport() : nullptr);
  return backends;
}

std::vector<MatchConfig> parse_config_list(const std::string& list) {
  if (list == "all") return all_match_configs();
  std::vector<MatchConfig> out;
  std::stringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    const std::string trimmed = trim(name);
    auto parsed = MatchConfig::parse(trimmed);
    if (!parsed) {
      throw ArgumentError("unknown config '" + trimmed +
                          "' (expected all or names like T, P-LSE, L-LSE-SCC)");
    }
    out.push_back(*parsed);
  }
  if (out.empty()) throw ArgumentError("no configs selected");
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// ---- ingest ---------------------------------------------------------------

struct IngestOptions {
  std::string csv;
  std::string label_col = "label";
  std::string desc_col = "description";
  std::string group_id;
  std::vector<std::string> rdf;
  std::vector<std::string> datasets;
  std::string out;
};

int cmd_ingest(const IngestOptions& o) {
  const int sources = (!o.csv.empty()) + (!o.rdf.empty()) + (!o.datasets.empty());
  if (sources != 1) throw ArgumentError("give exactly one of --csv, --fibo or --dataset");
  Dataset dataset;
  if (!o.csv.empty()) {
    const std::string gid = o.group_id.empty() ? std::filesystem::path(o.csv).stem().string() : o.group_id;
    dataset.groups.push_back(load_table_csv(o.csv, gid, o.label_col, o.desc_col));
  } else if (!o.rdf.empty()) {
    std::vector<std::filesystem::path> paths(o.rdf.begin(), o.rdf.end());
    dataset = extract_ontology(paths);
  } else {
    for (const auto& path : o.datasets) {
      Dataset part = load_dataset(path);
      std::move(part.groups.begin(), part.groups.end(), std::back_inserter(dataset.groups));
    }
  }
  if (auto violations = validate_dataset(dataset); !violations.empty()) throw ValidationError(violations);
  save_dataset(dataset, o.out);
  fmt::print("entries: {}\ngroups: {}\nwrote {}\n", dataset.entry_count(), dataset.groups.size(), o.out);
  return kExitOk;
}

// ---- enrich ---------------------------------------------------------------

int cmd_enrich(const CommonOptions& common, const std::string& dataset_path) {
  if (common.cache.empty()) throw ArgumentError("enrich needs --cache");
  const RunConfig config = run_config(common);
  const Dataset dataset = load_dataset(dataset_path);
  auto cache = open_cache(common);
  WikidataClient client(config.wikidata, cache, common.live ? make_http_transport() : nullptr);

  std::vector<const DescriptiveLabel*> labels;
  std::set<std::string, std::less<>> seen;
  for (const auto& g : dataset.groups) {
    for (const auto& l : g.labels) {
      if (seen.insert(l.text).second) labels.push_back(&l);
    }
  }
  const MatchConfig lse{StsBackendKind::kTfidf, true, false, true};
  const EnrichOptions options{config.lse_max_results};
  std::vector<std::optional<EnrichmentResult>> results(labels.size());
  std::vector<std::string> errors(labels.size());
  // Live fetches share one rate-limited queue, so extra workers only help
  // with cache hits.
  parallel_for(labels.size(), common.workers, [&](std::size_t i) {
    try {
      results[i] = enrich(*labels[i], lse, client, options);
    } catch (const RetrievalError& e) {
      errors[i] = e.what();
    } catch (const ProtocolError& e) {
      errors[i] = e.what();
    }
  });

  std::size_t hits = 0;
  std::size_t fetched = 0;
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!results[i]) {
      missing.push_back(errors[i]);
    } else if (results[i]->cache_hit) {
      ++hits;
    } else {
      ++fetched;
    }
  }
  fmt::print("labels: {}\ncache hits: {}\nfetched: {}\nmissing: {}\nnetwork requests: {}\n", labels.size(), hits,
             fetched, missing.size(), client.network_requests());
  if (!missing.empty()) {
    for (const auto& m : missing) std::cerr << "missing: " << m << "\n";
    return kExitRetrieval;
  }
  return kExitOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchOptions {
  std::string dataset;
  std::size_t n = 10;
  std::uint64_t seed = 42;
  std::string configs = "all";
  std::string out = "dld-report";
};

int cmd_bench(const CommonOptions& common, const BackendOptions& backend_options, const BenchOptions& o) {
  // Validate everything cheap before loading models or data.
  const auto configs = parse_config_list(o.configs);
  if (o.n < 2) throw ArgumentError("--n must be at least 2");
  const RunConfig config = run_config(common);
  const Dataset dataset = load_dataset(o.dataset);
  auto cache = open_cache(common);
  const Backends backends = make_backends(common, backend_options, config, &dataset, cache);

  const MatrixResult result = run_matrix(dataset, o.n, o.seed, configs, backends, RunOptions{common.workers});
  // The manifest records failures even when no config produced a report.
  if (result.reports.empty()) {
    std::filesystem::create_directories(o.out);
  } else {
    emit_report(result.reports, o.out);
  }

  RunManifest manifest;
  manifest.seed = o.seed;
  manifest.n_choices = o.n;
  for (const auto& c : configs) manifest.configs.push_back(c.name());
  manifest.dataset_hash = dataset_hash(dataset);
  manifest.cache_hash = cache->content_hash();
  manifest.failures = result.failures;
  write_text(std::filesystem::path(o.out) / "manifest.json", manifest_json(manifest));

  if (!result.reports.empty()) std::cout << report_table(result.reports);
  for (const auto& f : result.failures) std::cerr << "config " << f.config_name << " failed: " << f.error << "\n";
  if (result.reports.empty()) return kExitAllConfigsFailed;
  return kExitOk;
}

// ---- match ----------------------------------------------------------------

struct MatchOptions {
  std::string labels;
  std::vector<std::string> glossaries;
  std::string method = "T";
  std::size_t k = 3;
  std::string out;
};

// A JSON array of strings, or one item per non-blank line.
std::vector<std::string> read_items(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<std::string> items;
  const std::string head = trim(text);
  if (!head.empty() && head.front() == '[') {
    try {
      for (const auto& v : nlohmann::json::parse(head)) items.push_back(v.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  } else {
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (auto t = trim(line); !t.empty()) items.push_back(t);
    }
  }
  return items;
}

int cmd_match(const CommonOptions& common, const BackendOptions& backend_options, const MatchOptions& o) {
  const auto parsed = MatchConfig::parse(o.method);
  if (!parsed) throw ArgumentError("unknown config '" + o.method + "'");
  if (o.k < 1) throw ArgumentError("--k must be at least 1");
  const RunConfig config = run_config(common);

  SemanticGroup label_group;
  label_group.group_id = std::filesystem::path(o.labels).stem().string();
  const auto label_texts = read_items(o.labels);
  if (label_texts.empty()) throw ArgumentError("label file " + o.labels + " is empty");
  for (std::size_t i = 0; i < label_texts.size(); ++i) {
    label_group.labels.push_back({label_texts[i], label_group.group_id + ":" + std::to_string(i)});
  }

  std::vector<SemanticGroup> glossaries;
  for (const auto& path : o.glossaries) {
    SemanticGroup g;
    g.group_id = std::filesystem::path(path).stem().string();
    const auto descriptions = read_items(path);
    if (descriptions.empty()) throw ArgumentError("glossary " + path + " is empty");
    for (std::size_t i = 0; i < descriptions.size(); ++i) {
      g.glossary.push_back({descriptions[i], g.group_id + ":" + std::to_string(i)});
    }
    glossaries.push_back(std::move(g));
  }
  if (glossaries.empty()) throw ArgumentError("no glossary given");

  std::vector<GlossarySide> candidates;
  for (const auto& g : glossaries) {
    for (const auto& e : g.glossary) candidates.push_back({&e, g.glossary, g.group_id});
  }
  auto cache = open_cache(common);
  Matcher matcher(*parsed, make_backends(common, backend_options, config, nullptr, cache));

  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const auto& label : label_group.labels) {
    const LabelSide side{&label, label_group.labels, label_group.group_id};
    const auto ordered = matcher.order_candidates(side, candidates, common.workers);
    nlohmann::ordered_json top = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < std::min(o.k, ordered.size()); ++r) {
      const auto& c = ordered[r];
      const auto& side_c = candidates[c.candidate_index];
      top.push_back({{"rank", r + 1},
                     {"group_id", side_c.group_id},
                     {"entry_id", side_c.entry->entry_id},
                     {"description", side_c.entry->text},
                     {"total", c.score.total},
                     {"text_score", c.score.text_score},
                     {"context_score", c.score.context_score},
                     {"best_sentence", c.score.best_sentence}});
    }
    results.push_back({{"label", label.text}, {"candidates", top}});
  }
  const nlohmann::ordered_json doc{{"config", parsed->name()}, {"k", o.k}, {"results", results}};
  const std::string text = doc.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return kExitOk;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
    return kExitInvalid;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const RetrievalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRetrieval;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Match descriptive labels to glossary descriptions"};
  app.require_subcommand(1);
  CommonOptions common;
  BackendOptions backend_options;

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "build a dataset file from CSV, RDF/XML or dataset files");
  ingest_cmd->add_option("--csv", ingest.csv, "table with a label and a description column")
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--label-col", ingest.label_col, "label column name");
  ingest_cmd->add_option("--desc-col", ingest.desc_col, "description column name");
  ingest_cmd->add_option("--group-id", ingest.group_id, "group id (default: CSV file stem)");
  ingest_cmd->add_option("--fibo,--rdf", ingest.rdf, "RDF/XML ontology files")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--dataset", ingest.datasets, "dataset files or directories to merge and validate");
  ingest_cmd->add_option("--out", ingest.out, "output dataset file")->required();

  std::string enrich_dataset;
  auto* enrich_cmd = app.add_subcommand("enrich", "pre-fetch enrichment sentences for every label");
  enrich_cmd->add_option("--dataset", enrich_dataset, "dataset file or directory")->required();
  enrich_cmd->add_option("--cache", common.cache, "cache file (JSONL)")->required();
  add_common(*enrich_cmd, common);

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "run the N-choice benchmark over a config matrix");
  bench_cmd->add_option("--dataset", bench.dataset, "dataset file or directory")->required();
  bench_cmd->add_option("--n", bench.n, "choices per instance");
  bench_cmd->add_option("--seed", bench.seed, "sampling seed");
  bench_cmd->add_option("--configs", bench.configs, "all, or comma-separated names such as T,T-LSE,L-SCC");
  bench_cmd->add_option("--cache", common.cache, "enrichment cache file (JSONL)");
  bench_cmd->add_option("--out", bench.out, "report directory");
  add_common(*bench_cmd, common);
  add_backends(*bench_cmd, backend_options);

  MatchOptions match;
  auto* match_cmd = app.add_subcommand("match", "rank glossary descriptions for each label");
  match_cmd->add_option("--labels", match.labels, "label file (lines or JSON array)")
      ->required()
      ->check(CLI::ExistingFile);
  match_cmd->add_option("--glossary", match.glossaries, "glossary files (lines or JSON array)")
      ->required()
      ->check(CLI::ExistingFile);
  match_cmd->add_option("--method", match.method, "configuration name, e.g. T or L-LSE-SCC");
  match_cmd->add_option("--k", match.k, "candidates reported per label");
  match_cmd->add_option("--cache", common.cache, "enrichment cache file (JSONL)");
  match_cmd->add_option("--out", match.out, "output file (default: stdout)");
  add_common(*match_cmd, common);
  add_backends(*match_cmd, backend_options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (ingest_cmd->parsed()) return guarded([&] { return cmd_ingest(ingest); });
  if (enrich_cmd->parsed()) return guarded([&] { return cmd_enrich(common, enrich_dataset); });
  if (bench_cmd->parsed()) return guarded([&] { return cmd_bench(common, backend_options, bench); });
  if (match_cmd->parsed()) return guarded([&] { return cmd_match(common, backend_options, match); });
  return kExitInvalid;
}

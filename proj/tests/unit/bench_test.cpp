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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dld/bench.hpp"
#include "dld/ingest.hpp"
#include "dld/testkit.hpp"
#include "oracles/oracles.hpp"
#include "test_support.hpp"

namespace dld {
namespace {

Dataset tiny_dataset(std::size_t groups, std::size_t per_group) {
  Dataset d;
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<std::string> labels;
    std::vector<std::string> descs;
    for (std::size_t i = 0; i < per_group; ++i) {
      labels.push_back("l" + std::to_string(g) + "_" + std::to_string(i));
      descs.push_back("description " + std::to_string(g) + " " + std::to_string(i));
    }
    d.groups.push_back(make_group("g" + std::to_string(g), labels, descs));
  }
  return d;
}

TEST(GenerateChoiceProblems, OneValidInstancePerEntry) {
  const Dataset d = load_dataset(test::synthetic_dataset());
  for (std::size_t n : {2u, 10u, 40u}) {
    const auto instances = generate_choice_problems(d, n, 42);
    ASSERT_EQ(instances.size(), d.entry_count());
    for (const auto& inst : instances) EXPECT_NO_THROW(check_instance(d, inst, n));
  }
}

TEST(GenerateChoiceProblems, DeterministicPerSeed) {
  const Dataset d = load_dataset(test::synthetic_dataset());
  EXPECT_EQ(generate_choice_problems(d, 10, 42), generate_choice_problems(d, 10, 42));
  const auto a = generate_choice_problems(d, 10, 1);
  const auto b = generate_choice_problems(d, 10, 2);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differing += a[i] == b[i] ? 0 : 1;
  EXPECT_GT(differing, a.size() * 9 / 10);
}

TEST(GenerateChoiceProblems, TruthPositionVaries) {
  const Dataset d = load_dataset(test::synthetic_dataset());
  std::set<std::size_t> positions;
  for (const auto& inst : generate_choice_problems(d, 10, 42)) positions.insert(inst.truth_index);
  EXPECT_GT(positions.size(), 5u);
}

TEST(GenerateChoiceProblems, TooSmall) {
  try {
    generate_choice_problems(tiny_dataset(1, 5), 10, 1);
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("requires 10"), std::string::npos) << what;
    EXPECT_NE(what.find("has 5"), std::string::npos) << what;
  }
  // Enough entries overall but not enough outside one group.
  EXPECT_THROW(generate_choice_problems(tiny_dataset(2, 6), 10, 1), ArgumentError);
  EXPECT_THROW(generate_choice_problems(tiny_dataset(3, 3), 1, 1), ArgumentError);
}

TEST(CheckInstance, RejectsOwnGroupDistractor) {
  const Dataset d = tiny_dataset(3, 3);
  auto inst = generate_choice_problems(d, 3, 5).front();
  const std::size_t other = inst.truth_index == 0 ? 1 : 0;
  inst.candidates[other] = {d.groups[0].glossary[2], d.groups[0].group_id};
  EXPECT_THROW(check_instance(d, inst, 3), ArgumentError);
}

TEST(Metrics, Examples) {
  const std::vector<std::size_t> ones{1, 1, 1};
  const std::vector<std::size_t> mixed{1, 2, 4};
  const std::vector<std::size_t> tens(7, 10);
  const std::vector<std::size_t> twos{2, 2};
  EXPECT_EQ(compute_mrr(ones), 1.0);
  EXPECT_NEAR(compute_mrr(mixed), 1.75 / 3.0, 1e-15);
  EXPECT_NEAR(compute_mrr(tens), 0.1, 1e-15);
  EXPECT_NEAR(compute_hits(mixed, 3), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(compute_hits(tens, 10), 1.0);
  EXPECT_EQ(compute_hits(twos, 1), 0.0);
  EXPECT_THROW(compute_mrr(std::vector<std::size_t>{}), ArgumentError);
  EXPECT_THROW(compute_hits(std::vector<std::size_t>{}, 1), ArgumentError);
  EXPECT_THROW(compute_hits(ones, 0), ArgumentError);
}

TEST(Metrics, AgreeWithOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    std::vector<std::size_t> ranks(1 + rng() % 50);
    for (auto& r : ranks) r = 1 + rng() % n;
    EXPECT_NEAR(compute_mrr(ranks), static_cast<double>(oracle::mrr(ranks)), 1e-12);
    double previous = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double h = compute_hits(ranks, k);
      EXPECT_NEAR(h, static_cast<double>(oracle::hits(ranks, k)), 1e-12);
      EXPECT_GE(h, previous);
      previous = h;
    }
    EXPECT_EQ(previous, 1.0);
  }
}

TEST(Metrics, HitsCutoffs) {
  EXPECT_EQ(hits_cutoffs(10), (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_EQ(hits_cutoffs(50), (std::vector<std::size_t>{1, 5, 10}));
  EXPECT_EQ(hits_cutoffs(2), (std::vector<std::size_t>{1}));
}

BenchmarkReport report_named(std::string name) {
  BenchmarkReport r;
  r.config_name = std::move(name);
  r.n_choices = 10;
  r.mrr = 0.5;
  r.hits = {{1, 0.25}, {3, 0.5}, {5, 0.75}};
  r.instance_count = 1;
  r.records.push_back({"g", "label, with comma", 2, 0.4});
  return r;
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(Reports, CsvShape) {
  const std::vector<BenchmarkReport> one{report_named("T")};
  EXPECT_EQ(report_csv(one), "config,mrr,hits@1,hits@3,hits@5\nT,0.500000,0.250000,0.500000,0.750000\n");
  std::vector<BenchmarkReport> twelve;
  for (const auto& c : all_match_configs()) twelve.push_back(report_named(c.name()));
  EXPECT_EQ(line_count(report_csv(twelve)), 13u);
  EXPECT_NE(instances_csv(one).find("\"label, with comma\""), std::string::npos);
}

TEST(Reports, TableAligned) {
  const std::vector<BenchmarkReport> reports{report_named("T"), report_named("L-LSE-SCC")};
  const std::string table = report_table(reports);
  EXPECT_NE(table.find("10-choice, 1 instances\n"), std::string::npos);
  EXPECT_NE(table.find("Hits@5"), std::string::npos);
  std::vector<std::size_t> widths;
  std::size_t start = table.find('\n') + 1;
  for (std::size_t end; (end = table.find('\n', start)) != std::string::npos; start = end + 1) {
    widths.push_back(end - start);
  }
  for (std::size_t w : widths) EXPECT_EQ(w, widths.front());
}

TEST(Reports, EmitIsDeterministic) {
  test::TempDir a;
  test::TempDir b;
  const std::vector<BenchmarkReport> reports{report_named("T"), report_named("P")};
  const auto fa = emit_report(reports, a.path());
  const auto fb = emit_report(reports, b.path());
  EXPECT_EQ(test::read_file(fa.csv), test::read_file(fb.csv));
  EXPECT_EQ(test::read_file(fa.table), test::read_file(fb.table));
  EXPECT_EQ(test::read_file(fa.instances), test::read_file(fb.instances));
  EXPECT_THROW(emit_report(std::vector<BenchmarkReport>{}, a.path()), ArgumentError);
}

TEST(Reports, UnwritableDirectory) {
  test::TempDir dir;
  test::write_file(dir / "file", "x");
  const std::vector<BenchmarkReport> reports{report_named("T")};
  EXPECT_THROW(emit_report(reports, dir / "file" / "sub"), IoError);
}

TEST(Manifest, RoundTrip) {
  RunManifest m;
  m.seed = 18446744073709551615ULL;
  m.n_choices = 50;
  m.configs = {"T", "L-SCC"};
  m.dataset_hash = "abc";
  m.cache_hash = "def";
  m.failures = {{"P", "no embedding backend"}};
  const RunManifest back = parse_manifest(manifest_json(m));
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.configs, m.configs);
  EXPECT_EQ(back.failures[0].error, "no embedding backend");
  EXPECT_EQ(manifest_json(back), manifest_json(m));
  EXPECT_THROW(parse_manifest("{"), ParseError);
  EXPECT_THROW(parse_manifest("{}"), ParseError);
}

TEST(RunMatrix, TwelveNamedReportsWithMocks) {
  const Dataset d = load_dataset(test::synthetic_dataset());
  Backends backends;
  backends.llm = std::make_shared<testkit::ScriptedLlmBackend>(testkit::perfect_oracle_script(d));
  backends.embedder = std::make_shared<CachingEmbedder>(std::make_shared<testkit::HashedEmbeddingBackend>());
  backends.knowledge = std::make_shared<testkit::MockKnowledgeSource>(*KnowledgeCache::load(test::wikidata_fixture()));
  const auto configs = all_match_configs();
  const MatrixResult result = run_matrix(d, 10, 42, configs, backends, {4});
  EXPECT_TRUE(result.failures.empty());
  ASSERT_EQ(result.reports.size(), 12u);
  std::set<std::string> names;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    EXPECT_EQ(result.reports[i].config_name, configs[i].name());
    names.insert(result.reports[i].config_name);
    EXPECT_EQ(result.reports[i].instance_count, 48u);
    EXPECT_EQ(result.reports[i].hits.size(), 3u);
  }
  EXPECT_EQ(names.size(), 12u);
}

TEST(RunMatrix, FailuresAreRecordedAndOthersRun) {
  const Dataset d = load_dataset(test::synthetic_dataset());
  const auto configs = all_match_configs();
  const MatrixResult result = run_matrix(d, 10, 42, configs, {}, {});
  // Only plain TFIDF runs without any backend.
  ASSERT_EQ(result.reports.size(), 1u);
  EXPECT_EQ(result.reports[0].config_name, "T");
  EXPECT_EQ(result.failures.size(), 11u);
}

}  // namespace
}  // namespace dld

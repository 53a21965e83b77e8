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

#include "dld/embedding.hpp"
#include "dld/ingest.hpp"
#include "dld/testkit.hpp"
#include "test_support.hpp"

namespace dld::testkit {
namespace {

TEST(ScriptedLlm, FirstMatchingRuleWins) {
  ScriptedLlm script;
  script.rules.push_back({"School District Code", yes_no(0.9)});
  script.rules.push_back({"School", yes_no(0.1)});
  EXPECT_EQ(scripted_llm_respond(script, "Is \"School District Code\" same"), yes_no(0.9));
  EXPECT_EQ(scripted_llm_respond(script, "School bus"), yes_no(0.1));
  EXPECT_EQ(scripted_llm_respond(script, "unrelated"), script.fallback);
}

TEST(ScriptedLlm, YesNoOmitsZeroMass) {
  EXPECT_EQ(yes_no(1.0).entries().size(), 1u);
  EXPECT_EQ(yes_no(0.0).entries().front().token, "No");
  EXPECT_EQ(yes_no(0.25).entries().size(), 2u);
}

TEST(ScriptedLlm, FileRoundTrip) {
  ScriptedLlm script;
  script.rules.push_back({"lvdd", TokenDistribution({{"Yes", 0.7}, {"No", 0.2}, {"Maybe", 0.1}})});
  script.fallback = yes_no(0.0);
  const ScriptedLlm back = parse_llm_script(llm_script_to_json(script));
  ASSERT_EQ(back.rules.size(), 1u);
  EXPECT_EQ(back.rules[0].pattern, "lvdd");
  EXPECT_EQ(back.rules[0].response, script.rules[0].response);
  EXPECT_EQ(back.fallback, script.fallback);
}

TEST(ScriptedLlm, MalformedScripts) {
  EXPECT_THROW(parse_llm_script("nope"), ParseError);
  EXPECT_THROW(parse_llm_script("[]"), ParseError);
  EXPECT_THROW(parse_llm_script(R"({"rules":[{"tokens":[]}]})"), ParseError);
  EXPECT_THROW(parse_llm_script(R"({"rules":[{"pattern":"x","tokens":[{"token":"Yes"}]}]})"), ParseError);
  EXPECT_THROW(parse_llm_script(R"({"default":{"tokens":[{"token":"Yes","probability":-1}]}})"), ParseError);
  EXPECT_THROW(load_llm_script("/nonexistent/script.json"), IoError);
}

TEST(ScriptedLlmBackend, TruncatesToTopN) {
  ScriptedLlm script;
  script.fallback = TokenDistribution({{"Yes", 0.5}, {"No", 0.3}, {"y", 0.2}});
  ScriptedLlmBackend backend(script);
  EXPECT_EQ(backend.first_token_distribution("p", 2).entries().size(), 2u);
  EXPECT_EQ(backend.calls(), 1u);
  EXPECT_EQ(backend.prompts(), std::vector<std::string>{"p"});
}

TEST(PairPatterns, StsPatternIgnoresLabelSet) {
  const std::vector<DescriptiveLabel> a{{"type", "x:0"}, {"amount", "x:1"}};
  const std::vector<DescriptiveLabel> b{{"type", "y:0"}};
  const std::string pattern = sts_pair_pattern("type", "Kind of money movement");
  EXPECT_NE(build_sts_prompt(a[0], a, {"Kind of money movement", "x:0"}).find(pattern), std::string::npos);
  EXPECT_NE(build_sts_prompt(b[0], b, {"Kind of money movement", "y:0"}).find(pattern), std::string::npos);
  EXPECT_EQ(build_sts_prompt(a[1], a, {"Kind of money movement", "x:0"}).find(pattern), std::string::npos);
  EXPECT_EQ(build_sts_prompt(a[0], a, {"Category of credit product", "x:0"}).find(pattern), std::string::npos);
}

TEST(PerfectOracle, YesExactlyOnTruePairs) {
  const Dataset d = load_dataset(test::synthetic_dataset());
  ScriptedLlmBackend backend(perfect_oracle_script(d));
  const LlmBackendConfig config;
  for (const auto& g : d.groups) {
    for (std::size_t p = 0; p < g.size(); ++p) {
      EXPECT_EQ(sts_llm_score(g.labels[p], g.labels, g.glossary[p], backend, config).value, 1.0);
      const std::size_t q = (p + 1) % g.size();
      EXPECT_EQ(sts_llm_score(g.labels[p], g.labels, g.glossary[q], backend, config).value, 0.0);
    }
  }
  // "type" appears in two groups; each only matches its own description.
  const SemanticGroup* loans = d.find_group("loans");
  const SemanticGroup* tx = d.find_group("transactions");
  ASSERT_NE(loans, nullptr);
  ASSERT_NE(tx, nullptr);
  const auto type_in = [](const SemanticGroup& g) {
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (g.labels[p].text == "type") return p;
    }
    return g.size();
  };
  const std::size_t lp = type_in(*loans);
  const std::size_t tp = type_in(*tx);
  EXPECT_EQ(sts_llm_score(loans->labels[lp], loans->labels, tx->glossary[tp], backend, config).value, 0.0);
}

TEST(MockKnowledgeSource, FixtureAndUnknownQueries) {
  MockKnowledgeSource knowledge(*KnowledgeCache::load(test::wikidata_fixture()));
  const auto hits = knowledge.search_entities("lvdd", 5);
  ASSERT_EQ(hits.value.size(), 1u);
  const auto texts = knowledge.fetch_entity_texts(hits.value);
  EXPECT_EQ(texts.value[0].label, "left ventricular end-diastolic dimension");
  EXPECT_TRUE(knowledge.search_entities("nonexistent query", 5).value.empty());
  EXPECT_EQ(knowledge.searches(), 2u);
}

TEST(MockKnowledgeSource, MalformedFixture) {
  test::TempDir dir;
  test::write_file(dir / "bad.jsonl", "{\"kind\": \"search\"\n");
  EXPECT_THROW(KnowledgeCache::load(dir / "bad.jsonl"), ParseError);
}

TEST(HashedEmbedding, SharedTokensOnly) {
  HashedEmbeddingBackend backend(64);
  const std::vector<std::string> texts{"loan amount", "amount of the loan", "zebra"};
  const auto v = backend.embed(texts);
  EXPECT_GT(cosine_similarity(v[0], v[1]), 0.5);
  EXPECT_EQ(v[0].dimension(), 64u);
  EXPECT_EQ(backend.calls(), 1u);
  EXPECT_EQ(backend.texts_embedded(), 3u);
  EXPECT_THROW(HashedEmbeddingBackend(0), ArgumentError);
}

TEST(ScriptedEmbedding, UnknownTextFails) {
  ScriptedEmbeddingBackend backend({{"a", SentenceVector{{1.0, 0.0}}}});
  EXPECT_EQ(backend.embed(std::vector<std::string>{"a"}).size(), 1u);
  EXPECT_THROW(backend.embed(std::vector<std::string>{"b"}), BackendError);
}

TEST(StubServer, ServesBothProtocols) {
  ScriptedLlm script;
  script.rules.push_back({"School District Code", yes_no(0.75)});
  StubServer server(script, 32);
  server.start();
  ASSERT_GT(server.port(), 0);
  const auto transport = make_http_transport();

  LlmBackendConfig llm_config;
  llm_config.endpoint = server.base_url() + "/llm";
  HttpLlmBackend llm(llm_config, transport);
  const auto dist = llm.first_token_distribution("Is \"School District Code\" same", 20);
  EXPECT_NEAR(score_from_token_distribution(dist, llm_config).value, 0.75, 1e-12);

  EmbeddingBackendConfig embed_config;
  embed_config.endpoint = server.base_url() + "/embed";
  HttpEmbeddingBackend embedder(embed_config, transport);
  std::vector<std::string> texts;
  for (int i = 0; i < 100; ++i) texts.push_back("text " + std::to_string(i));
  const auto vectors = embedder.embed(texts);
  ASSERT_EQ(vectors.size(), 100u);
  EXPECT_EQ(vectors[0].dimension(), 32u);
  EXPECT_EQ(server.requests(), 3u);
  server.stop();
}

}  // namespace
}  // namespace dld::testkit

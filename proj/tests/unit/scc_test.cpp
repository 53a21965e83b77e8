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

#include <thread>

#include "dld/scc.hpp"
#include "dld/testkit.hpp"

namespace dld {
namespace {

std::size_t count_bullets(const std::string& prompt) {
  std::size_t n = 0;
  for (std::size_t pos = 0; (pos = prompt.find("\n  - ", pos)) != std::string::npos; ++pos) ++n;
  return n;
}

TEST(BuildSccPrompt, MatchesPublishedExample) {
  const std::vector<DescriptiveLabel> labels{{"ordered", "a:0"}, {"device_computer", "a:1"}};
  const std::vector<GlossaryEntry> glossary{
      {"Indicates whether an appeal to the published decision has been received.", "b:0"},
      {"Indicates if Design Review is part of the application process for this permit.", "b:1"}};
  const std::string expected =
      "I have a dataset and a glossary. The given dataset has these columns.\n"
      "[Column names]\n"
      "  - ordered\n"
      "  - device_computer\n"
      "The given glossary has these glossary terms.\n"
      "[Glossary terms]\n"
      "  - Indicates whether an appeal to the published decision has been received.\n"
      "  - Indicates if Design Review is part of the application process for this permit.\n"
      "[Question]\n"
      "Does these glossary terms describe the given column names? \n"
      "[Answer (Yes/No)]";
  EXPECT_EQ(build_scc_prompt(labels, glossary), expected);
}

TEST(BuildSccPrompt, MinimalAndTruncated) {
  const std::vector<DescriptiveLabel> one{{"x", "a:0"}};
  const std::vector<GlossaryEntry> term{{"y", "b:0"}};
  EXPECT_EQ(count_bullets(build_scc_prompt(one, term)), 2u);

  std::vector<DescriptiveLabel> labels;
  std::vector<GlossaryEntry> glossary;
  for (int i = 0; i < 50; ++i) {
    labels.push_back({"col" + std::to_string(i), "a"});
    glossary.push_back({std::string(1200, 'd'), "b"});
  }
  const std::string prompt = build_scc_prompt(labels, glossary);
  EXPECT_EQ(count_bullets(prompt), 60u);
  EXPECT_EQ(prompt.find("  - col30\n"), std::string::npos);
  EXPECT_EQ(prompt.find(std::string(1001, 'd')), std::string::npos);
  EXPECT_NE(prompt.find("  - " + std::string(1000, 'd') + "\n"), std::string::npos);
}

TEST(BuildSccPrompt, EmptyListsRejected) {
  const std::vector<DescriptiveLabel> labels{{"x", "a:0"}};
  const std::vector<GlossaryEntry> glossary{{"y", "b:0"}};
  EXPECT_THROW(build_scc_prompt({}, glossary), ArgumentError);
  EXPECT_THROW(build_scc_prompt(labels, {}), ArgumentError);
}

struct SccFixture : ::testing::Test {
  std::vector<DescriptiveLabel> labels{{"ordered", "a:0"}, {"device_computer", "a:1"}};
  std::vector<GlossaryEntry> glossary{{"appeal received", "b:0"}};
  std::shared_ptr<testkit::ScriptedLlmBackend> backend;

  void SetUp() override {
    testkit::ScriptedLlm script;
    script.rules.push_back({testkit::scc_pair_pattern(labels, glossary),
                            TokenDistribution({{"Yes", 0.8}, {"No", 0.1}})});
    backend = std::make_shared<testkit::ScriptedLlmBackend>(script);
  }
};

TEST_F(SccFixture, TokenRatio) {
  const StsScore s = context_score(labels, glossary, *backend, {});
  EXPECT_NEAR(s.value, 8.0 / 9.0, 1e-12);
  EXPECT_FALSE(s.undetermined);
}

TEST_F(SccFixture, MemoizedPerKey) {
  ContextScorer scorer(backend, {});
  const ContextKey key{"a", "b"};
  const StsScore first = scorer.score(key, labels, glossary);
  const StsScore second = scorer.score(key, labels, glossary);
  EXPECT_EQ(first.value, second.value);
  EXPECT_EQ(backend->calls(), 1u);
  EXPECT_EQ(scorer.memo_size(), 1u);
  EXPECT_THROW(scorer.score({"", "b"}, labels, glossary), ArgumentError);
}

TEST_F(SccFixture, ConcurrentLookupsShareOneCall) {
  ContextScorer scorer(backend, {});
  std::vector<std::jthread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { scorer.score({"a", "b"}, labels, glossary); });
  }
  threads.clear();
  EXPECT_EQ(backend->calls(), 1u);
}

TEST(ContextScorer, BackendErrorCarriesKey) {
  struct Broken final : LlmBackend {
    TokenDistribution first_token_distribution(const std::string&, int) override {
      throw BackendError("boom");
    }
  };
  ContextScorer scorer(std::make_shared<Broken>(), {});
  const std::vector<DescriptiveLabel> labels{{"x", "a:0"}};
  const std::vector<GlossaryEntry> glossary{{"y", "b:0"}};
  try {
    scorer.score({"loans", "books"}, labels, glossary);
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("loans"), std::string::npos);
    EXPECT_NE(what.find("books"), std::string::npos);
  }
  // A failed key is not memoized.
  EXPECT_THROW(scorer.score({"loans", "books"}, labels, glossary), BackendError);
}

TEST(ContextScorer, NeedsBackend) { EXPECT_THROW(ContextScorer(nullptr, {}), ArgumentError); }

}  // namespace
}  // namespace dld

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

#include <json.hpp>
#include <random>

#include "dld/llm.hpp"
#include "dld/testkit.hpp"
#include "oracles/oracles.hpp"

namespace dld {
namespace {

std::vector<DescriptiveLabel> labels_of(std::initializer_list<const char*> texts) {
  std::vector<DescriptiveLabel> out;
  std::size_t i = 0;
  for (const char* t : texts) out.push_back({t, "L:" + std::to_string(i++)});
  return out;
}

std::size_t count_bullets(const std::string& prompt) {
  std::size_t n = 0;
  for (std::size_t pos = 0; (pos = prompt.find("\n  - ", pos)) != std::string::npos; ++pos) ++n;
  return n;
}

TEST(BuildStsPrompt, MatchesPublishedExample) {
  const auto labels = labels_of({"School District Code", "County Code"});
  const GlossaryEntry g{
      "The code by which a school district is identified, as utilized by the Department\xe2\x80\x99s ...", "G:0"};
  const std::string expected =
      "I have a dataset and a glossary. The given dataset has these columns.\n"
      "[Column names]\n"
      "  - School District Code\n"
      "  - County Code\n"
      "[Question]\n"
      "Is \"School District Code\" same to the following concept in glossary?\n"
      "glossary description: \"The code by which a school district is identified, as utilized by the "
      "Department\xe2\x80\x99s ...\"\n"
      "[Answer (Yes/No)]";
  EXPECT_EQ(build_sts_prompt(labels[0], labels, g), expected);
}

TEST(BuildStsPrompt, SingleLabel) {
  const auto labels = labels_of({"amount"});
  const auto prompt = build_sts_prompt(labels[0], labels, {"sum of money", "g"});
  EXPECT_EQ(count_bullets(prompt), 1u);
}

TEST(BuildStsPrompt, TruncatesLabelListAndDescription) {
  std::vector<DescriptiveLabel> labels;
  for (int i = 0; i < 100; ++i) labels.push_back({"col" + std::to_string(i), std::to_string(i)});
  const std::string long_desc(1500, 'x');
  const auto prompt = build_sts_prompt(labels[0], labels, {long_desc, "g"});
  EXPECT_EQ(count_bullets(prompt), 30u);
  EXPECT_NE(prompt.find("  - col29\n"), std::string::npos);
  EXPECT_EQ(prompt.find("  - col30\n"), std::string::npos);
  EXPECT_NE(prompt.find("\"" + std::string(1000, 'x') + "\""), std::string::npos);
}

TEST(BuildStsPrompt, CustomLimits) {
  const auto labels = labels_of({"a", "b", "c"});
  const PromptLimits limits{2, 3};
  const auto prompt = build_sts_prompt(labels[2], labels, {"\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9", "g"}, limits);
  EXPECT_EQ(count_bullets(prompt), 2u);
  // Truncation counts code points, never splitting a UTF-8 sequence.
  EXPECT_NE(prompt.find("\"\xc3\xa9\xc3\xa9\xc3\xa9\"\n"), std::string::npos);
}

TEST(BuildStsPrompt, RejectsLabelOutsideSet) {
  const auto labels = labels_of({"a", "b"});
  EXPECT_THROW(build_sts_prompt({"c", "x"}, labels, {"d", "g"}), ArgumentError);
}

TEST(BuildStsPrompt, Deterministic) {
  const auto labels = labels_of({"a", "b"});
  EXPECT_EQ(build_sts_prompt(labels[1], labels, {"d", "g"}), build_sts_prompt(labels[1], labels, {"d", "g"}));
}

TEST(BuildStsPrompt, PlaceholdersInValuesAreNotExpanded) {
  const auto labels = labels_of({"{description}"});
  const auto prompt = build_sts_prompt(labels[0], labels, {"{label}", "g"});
  EXPECT_NE(prompt.find("Is \"{description}\" same"), std::string::npos);
  EXPECT_NE(prompt.find("glossary description: \"{label}\""), std::string::npos);
}

TEST(BuildStsPrompt, SizeBoundHolds) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> n_labels(1, 60);
    std::uniform_int_distribution<int> len(1, 40);
    std::vector<DescriptiveLabel> labels;
    std::size_t max_label = 0;
    const int n = n_labels(rng);
    for (int i = 0; i < n; ++i) {
      labels.push_back({std::string(static_cast<std::size_t>(len(rng)), 'a') + std::to_string(i), ""});
      max_label = std::max(max_label, labels.back().text.size());
    }
    const std::string desc(static_cast<std::size_t>(len(rng)) * 60, 'd');
    const PromptLimits limits{static_cast<std::size_t>(len(rng)), static_cast<std::size_t>(len(rng)) * 20};
    const auto prompt = build_sts_prompt(labels[0], labels, {desc, "g"}, limits);
    EXPECT_LE(prompt.size(), sts_prompt_size_bound(labels[0].text.size(), max_label, limits));
  }
}

TEST(TokenDistribution, ValidatesAndSorts) {
  const TokenDistribution d({{"a", 0.1}, {"b", 0.6}, {"c", 0.3}});
  EXPECT_EQ(d.entries()[0].token, "b");
  EXPECT_EQ(d.entries()[2].token, "a");
  EXPECT_THROW(TokenDistribution(std::vector<TokenProbability>{}), ArgumentError);
  EXPECT_THROW(TokenDistribution({{"a", 0.7}, {"b", 0.7}}), ArgumentError);
  EXPECT_THROW(TokenDistribution({{"a", 0.1}, {"a", 0.2}}), ArgumentError);
  EXPECT_THROW(TokenDistribution({{"a", -0.1}}), ArgumentError);
}

TEST(ScoreFromTokens, PublishedStyleExamples) {
  const LlmBackendConfig config;
  EXPECT_DOUBLE_EQ(score_from_token_distribution(TokenDistribution({{"Yes", 0.6}, {"No", 0.2}, {"the", 0.1}}), config)
                       .value,
                   0.75);
  EXPECT_DOUBLE_EQ(
      score_from_token_distribution(TokenDistribution({{"no", 0.5}, {"No", 0.3}, {"yes", 0.2}}), config).value,
      0.2);
  const auto undetermined = score_from_token_distribution(TokenDistribution({{"maybe", 0.9}, {"the", 0.1}}), config);
  EXPECT_EQ(undetermined.value, 0.5);
  EXPECT_TRUE(undetermined.undetermined);
}

TEST(ScoreFromTokens, TrimsAndLowercases) {
  const LlmBackendConfig config;
  const auto s = score_from_token_distribution(TokenDistribution({{" YES", 0.3}, {"\tTrue ", 0.1}, {" n", 0.4}}), config);
  EXPECT_DOUBLE_EQ(s.value, 0.4 / 0.8);
  EXPECT_FALSE(s.undetermined);
}

TEST(ScoreFromTokens, MonotoneInYesMass) {
  const LlmBackendConfig config;
  double previous = -1;
  for (int i = 0; i <= 10; ++i) {
    const double py = 0.05 * i;
    // Yes grows at the expense of a neutral token.
    const auto s = score_from_token_distribution(TokenDistribution({{"yes", py}, {"no", 0.3}, {"um", 0.6 - py}}),
                                                 config);
    EXPECT_GE(s.value, previous);
    previous = s.value;
  }
}

TEST(LlmBackendConfig, Validation) {
  LlmBackendConfig c;
  EXPECT_NO_THROW(c.validate());
  c.no_tokens.insert(" YES ");
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.yes_tokens.clear();
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.top_n_tokens = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(TokenJson, RoundTripAndErrors) {
  const TokenDistribution d({{"Yes", 0.25}, {"No", 0.5}});
  EXPECT_EQ(token_distribution_from_json(token_distribution_to_json(d)), d);
  EXPECT_THROW(token_distribution_from_json("not json"), ProtocolError);
  EXPECT_THROW(token_distribution_from_json(R"({"tokens": "x"})"), ProtocolError);
  EXPECT_THROW(token_distribution_from_json(R"({"tokens": [{"token": 1, "probability": 0.1}]})"), ProtocolError);
  EXPECT_THROW(token_distribution_from_json(R"({"tokens": []})"), ProtocolError);
}

TEST(StsLlmScore, ComposesPromptAndRatio) {
  testkit::ScriptedLlm script;
  script.fallback = TokenDistribution({{"Yes", 0.9}, {"No", 0.05}});
  testkit::ScriptedLlmBackend backend(script);
  const auto labels = labels_of({"a"});
  const auto s = sts_llm_score(labels[0], labels, {"desc", "g"}, backend, LlmBackendConfig{});
  EXPECT_NEAR(s.value, 0.947368, 1e-6);
  EXPECT_EQ(backend.calls(), 1u);
}

TEST(StsLlmScore, EmptyYesNoMassFallsBack) {
  testkit::ScriptedLlm script;
  script.fallback = TokenDistribution({{"hmm", 1.0}});
  testkit::ScriptedLlmBackend backend(script);
  const auto labels = labels_of({"a"});
  const auto s = sts_llm_score(labels[0], labels, {"desc", "g"}, backend, LlmBackendConfig{});
  EXPECT_EQ(s.value, 0.5);
  EXPECT_TRUE(s.undetermined);
}

LlmBackendConfig http_config() {
  LlmBackendConfig c;
  c.endpoint = "http://llm.invalid/v1/first-token";
  c.api_key = "secret";
  c.top_n_tokens = 7;
  return c;
}

TEST(HttpLlmBackend, SendsWireRequest) {
  auto transport = std::make_shared<testkit::ScriptedTransport>([](const HttpRequest&) {
    return HttpResponse{200, R"({"tokens":[{"token":"Yes","probability":0.8},{"token":"No","probability":0.2}]})"};
  });
  HttpLlmBackend backend(http_config(), transport);
  const auto dist = backend.first_token_distribution("hello", 7);
  EXPECT_EQ(dist.entries()[0].token, "Yes");
  const auto sent = transport->requests();
  ASSERT_EQ(sent.size(), 1u);
  EXPECT_EQ(sent[0].method, "POST");
  EXPECT_EQ(sent[0].url, "http://llm.invalid/v1/first-token");
  const auto body = nlohmann::json::parse(sent[0].body);
  EXPECT_EQ(body["prompt"], "hello");
  EXPECT_EQ(body["top_n_tokens"], 7);
  bool has_auth = false;
  for (const auto& [k, v] : sent[0].headers) has_auth = has_auth || (k == "Authorization" && v == "Bearer secret");
  EXPECT_TRUE(has_auth);
}

TEST(HttpLlmBackend, TransportFailureIsBackendErrorWithContext) {
  auto transport = std::make_shared<testkit::FailingTransport>();
  HttpLlmBackend backend(http_config(), transport);
  try {
    backend.first_token_distribution("the prompt", 5);
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("http://llm.invalid/v1/first-token"), std::string::npos);
    EXPECT_NE(what.find(prompt_hash("the prompt")), std::string::npos);
  }
}

TEST(HttpLlmBackend, StatusAndBodyErrors) {
  auto status = std::make_shared<testkit::ScriptedTransport>([](const HttpRequest&) {
    return HttpResponse{503, "busy"};
  });
  EXPECT_THROW(HttpLlmBackend(http_config(), status).first_token_distribution("p", 5), BackendError);
  auto garbage = std::make_shared<testkit::ScriptedTransport>([](const HttpRequest&) {
    return HttpResponse{200, "<html>"};
  });
  EXPECT_THROW(HttpLlmBackend(http_config(), garbage).first_token_distribution("p", 5), ProtocolError);
}

TEST(HttpLlmBackend, RequiresEndpoint) {
  EXPECT_THROW(HttpLlmBackend(LlmBackendConfig{}, std::make_shared<testkit::FailingTransport>()), ArgumentError);
}

TEST(LlmSts, UsesSentenceAsQuery) {
  testkit::ScriptedLlm script;
  script.rules.push_back({testkit::sts_pair_pattern("loan amount: money lent", "principal"),
                          TokenDistribution({{"Yes", 0.7}, {"No", 0.3}})});
  auto backend = std::make_shared<testkit::ScriptedLlmBackend>(script);
  LlmSts sts(backend, LlmBackendConfig{});
  const auto labels = labels_of({"LOAN_AMT"});
  StsContext ctx;
  ctx.label_set = labels;
  EXPECT_DOUBLE_EQ(sts.score("loan amount: money lent", {"principal", "g"}, ctx).value, 0.7);
  EXPECT_DOUBLE_EQ(sts.score("LOAN_AMT", {"principal", "g"}, ctx).value, 0.0);
}

}  // namespace
}  // namespace dld

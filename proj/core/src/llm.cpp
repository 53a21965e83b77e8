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

#include "dld/llm.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>

#include "dld/hash.hpp"
#include "dld_prompt_templates.hpp"

namespace dld {

namespace {

using json = nlohmann::json;

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::set<std::string, std::less<>> normalized(const std::set<std::string, std::less<>>& tokens) {
  std::set<std::string, std::less<>> out;
  for (const auto& t : tokens) out.insert(lower_ascii(trim(t)));
  return out;
}

std::vector<std::string_view> label_texts(std::span<const DescriptiveLabel> labels) {
  std::vector<std::string_view> out;
  out.reserve(labels.size());
  for (const auto& label : labels) out.push_back(label.text);
  return out;
}

// Bytes added by the STS template around its substitutions.
std::size_t sts_template_overhead() {
  std::size_t size = detail::kStsPromptTemplate.size();
  for (std::string_view name : {"{columns}", "{label}", "{description}"}) size -= name.size();
  return size;
}

}  // namespace

namespace detail {

std::string render_template(std::string_view tmpl,
                            std::span<const std::pair<std::string_view, std::string_view>> values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    const auto name = tmpl.substr(open + 1, close - open - 1);
    const auto it = std::find_if(values.begin(), values.end(),
                                 [&](const auto& kv) { return kv.first == name; });
    out.append(tmpl.substr(pos, open - pos));
    if (it == values.end()) {
      out.append(tmpl.substr(open, close - open + 1));
    } else {
      out.append(it->second);
    }
    pos = close + 1;
  }
  out.append(tmpl.substr(std::min(pos, tmpl.size())));
  return out;
}

std::string_view truncate_utf8(std::string_view text, std::size_t max_chars) {
  std::size_t chars = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) != 0x80) {
      if (chars == max_chars) return text.substr(0, i);
      ++chars;
    }
  }
  return text;
}

std::string bullet_lines(std::span<const std::string_view> items, std::size_t max_items,
                         std::size_t max_chars) {
  std::string out;
  const std::size_t count = std::min(items.size(), max_items);
  for (std::size_t i = 0; i < count; ++i) {
    out += "  - ";
    out += truncate_utf8(items[i], max_chars);
    out += '\n';
  }
  return out;
}

}  // namespace detail

TokenDistribution::TokenDistribution(std::vector<TokenProbability> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ArgumentError("token distribution must not be empty");
  double sum = 0.0;
  std::set<std::string_view> seen;
  for (const auto& e : entries_) {
    if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
      throw ArgumentError("token '" + e.token + "' has probability outside [0,1]");
    }
    if (!seen.insert(e.token).second) throw ArgumentError("duplicate token '" + e.token + "'");
    sum += e.probability;
  }
  if (sum > 1.0 + 1e-6) throw ArgumentError("token probabilities sum to more than 1");
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const auto& a, const auto& b) { return a.probability > b.probability; });
}

void LlmBackendConfig::validate() const {
  if (top_n_tokens < 1) throw ArgumentError("top_n_tokens must be >= 1");
  if (max_in_flight < 1) throw ArgumentError("max_in_flight must be >= 1");
  const auto yes = normalized(yes_tokens);
  const auto no = normalized(no_tokens);
  if (yes.empty() || no.empty()) throw ArgumentError("yes/no token sets must be non-empty");
  for (const auto& t : yes) {
    if (no.contains(t)) throw ArgumentError("token '" + t + "' is both a yes and a no token");
  }
}

std::string render_sts_prompt(std::string_view query, std::span<const DescriptiveLabel> label_set,
                              std::string_view description, const PromptLimits& limits) {
  const auto labels = label_texts(label_set);
  // Labels are listed verbatim; only the description is length-limited.
  const std::string columns = detail::bullet_lines(labels, limits.max_context_items, std::string::npos);
  const std::pair<std::string_view, std::string_view> values[] = {
      {"columns", columns},
      {"label", query},
      {"description", detail::truncate_utf8(description, limits.max_desc_chars)},
  };
  return detail::render_template(detail::kStsPromptTemplate, values);
}

std::string build_sts_prompt(const DescriptiveLabel& label, std::span<const DescriptiveLabel> label_set,
                             const GlossaryEntry& description, const PromptLimits& limits) {
  if (std::find(label_set.begin(), label_set.end(), label) == label_set.end()) {
    throw ArgumentError("label '" + label.text + "' is not a member of the label set");
  }
  return render_sts_prompt(label.text, label_set, description.text, limits);
}

std::size_t sts_prompt_size_bound(std::size_t query_bytes, std::size_t max_label_bytes,
                                  const PromptLimits& limits) {
  // Four bytes of "  - " plus a newline per listed label; UTF-8 code points
  // take at most four bytes each.
  return sts_template_overhead() + limits.max_context_items * (max_label_bytes + 5) + query_bytes +
         limits.max_desc_chars * 4;
}

StsScore score_from_token_distribution(const TokenDistribution& dist, const LlmBackendConfig& config) {
  const auto yes = normalized(config.yes_tokens);
  const auto no = normalized(config.no_tokens);
  double p_yes = 0.0;
  double p_no = 0.0;
  for (const auto& entry : dist.entries()) {
    const std::string token = lower_ascii(trim(entry.token));
    if (yes.contains(token)) {
      p_yes += entry.probability;
    } else if (no.contains(token)) {
      p_no += entry.probability;
    }
  }
  if (p_yes + p_no < 1e-12) return {0.5, true};
  return {p_yes / (p_yes + p_no), false};
}

std::string token_distribution_to_json(const TokenDistribution& dist) {
  json tokens = json::array();
  for (const auto& e : dist.entries()) {
    tokens.push_back({{"token", e.token}, {"probability", e.probability}});
  }
  return json{{"tokens", tokens}}.dump();
}

TokenDistribution token_distribution_from_json(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("token distribution is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tokens") || !doc["tokens"].is_array()) {
    throw ProtocolError("token distribution lacks a 'tokens' array");
  }
  std::vector<TokenProbability> entries;
  for (const auto& item : doc["tokens"]) {
    if (!item.is_object() || !item.contains("token") || !item["token"].is_string() ||
        !item.contains("probability") || !item["probability"].is_number()) {
      throw ProtocolError("malformed token entry: " + item.dump());
    }
    entries.push_back({item["token"].get<std::string>(), item["probability"].get<double>()});
  }
  try {
    return TokenDistribution(std::move(entries));
  } catch (const ArgumentError& e) {
    throw ProtocolError(std::string("invalid token distribution: ") + e.what());
  }
}

std::string prompt_hash(std::string_view prompt) { return sha256_hex(prompt).substr(0, 12); }

HttpLlmBackend::HttpLlmBackend(LlmBackendConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config_.max_in_flight))) {
  config_.validate();
  if (config_.endpoint.empty()) throw ArgumentError("LLM endpoint is not configured");
  if (!transport_) throw ArgumentError("LLM backend needs a transport");
}

TokenDistribution HttpLlmBackend::first_token_distribution(const std::string& prompt, int top_n) {
  HttpRequest request;
  request.method = "POST";
  request.url = config_.endpoint;
  request.content_type = "application/json";
  request.body = json{{"prompt", prompt}, {"top_n_tokens", top_n}}.dump();
  request.timeout = config_.request_timeout;
  if (!config_.api_key.empty()) request.headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  HttpResponse response;
  in_flight_.acquire();
  try {
    response = transport_->send(request);
  } catch (const TransportError& e) {
    in_flight_.release();
    throw BackendError("LLM backend " + config_.endpoint + " (prompt " + prompt_hash(prompt) +
                       "): " + e.what());
  } catch (...) {
    in_flight_.release();
    throw;
  }
  in_flight_.release();
  if (response.status < 200 || response.status >= 300) {
    throw BackendError("LLM backend " + config_.endpoint + " (prompt " + prompt_hash(prompt) +
                       "): HTTP status " + std::to_string(response.status));
  }
  return token_distribution_from_json(response.body);
}

StsScore sts_llm_score(const DescriptiveLabel& label, std::span<const DescriptiveLabel> label_set,
                       const GlossaryEntry& description, LlmBackend& backend,
                       const LlmBackendConfig& config) {
  const std::string prompt = build_sts_prompt(label, label_set, description, config.prompt);
  return score_from_token_distribution(backend.first_token_distribution(prompt, config.top_n_tokens),
                                       config);
}

LlmSts::LlmSts(std::shared_ptr<LlmBackend> backend, LlmBackendConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {
  if (!backend_) throw ArgumentError("LLM STS needs a backend");
  config_.validate();
}

StsScore LlmSts::score(std::string_view sentence, const GlossaryEntry& description,
                       const StsContext& context) {
  const std::string prompt = render_sts_prompt(sentence, context.label_set, description.text, config_.prompt);
  return score_from_token_distribution(backend_->first_token_distribution(prompt, config_.top_n_tokens),
                                       config_);
}

}  // namespace dld

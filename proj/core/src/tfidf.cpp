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

#include "dld/tfidf.hpp"

#include <cmath>
#include <set>

#include "dld/error.hpp"
#include "dld/sts.hpp"

namespace dld {

namespace {

enum class CharClass { kSeparator, kLower, kUpper, kDigit, kOther };

CharClass classify(unsigned char c) {
  if (c >= 'a' && c <= 'z') return CharClass::kLower;
  if (c >= 'A' && c <= 'Z') return CharClass::kUpper;
  if (c >= '0' && c <= '9') return CharClass::kDigit;
  if (c >= 0x80) return CharClass::kOther;
  return CharClass::kSeparator;
}

bool is_letter(CharClass c) {
  return c == CharClass::kLower || c == CharClass::kUpper || c == CharClass::kOther;
}

char to_lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

using WeightMap = std::map<std::string_view, double, std::less<>>;

WeightMap weigh(const TokenizedText& text, const CorpusStats& stats) {
  std::map<std::string_view, std::size_t, std::less<>> tf;
  for (const auto& token : text.tokens) ++tf[token];
  WeightMap weights;
  for (const auto& [token, count] : tf) {
    weights.emplace(token, static_cast<double>(count) * stats.idf(token));
  }
  return weights;
}

double norm(const WeightMap& weights) {
  double sum = 0.0;
  for (const auto& [token, w] : weights) sum += w * w;
  return std::sqrt(sum);
}

}  // namespace

double CorpusStats::idf(std::string_view token) const {
  const auto it = doc_frequency.find(token);
  const double df = it == doc_frequency.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(doc_count)) / (1.0 + df)) + 1.0;
}

TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    const CharClass cls = classify(c);
    if (cls == CharClass::kSeparator) {
      flush();
      continue;
    }
    if (!current.empty()) {
      const CharClass prev = classify(static_cast<unsigned char>(text[i - 1]));
      const bool camel = prev == CharClass::kLower && cls == CharClass::kUpper;
      const bool digit_edge = (prev == CharClass::kDigit && is_letter(cls)) ||
                              (is_letter(prev) && cls == CharClass::kDigit);
      if (camel || digit_edge) flush();
    }
    current.push_back(to_lower(c));
  }
  flush();
  return out;
}

CorpusStats build_corpus_stats(std::span<const TokenizedText> documents) {
  if (documents.empty()) throw ArgumentError("build_corpus_stats: empty document list");
  CorpusStats stats;
  stats.doc_count = documents.size();
  for (const auto& doc : documents) {
    const std::set<std::string_view> unique(doc.tokens.begin(), doc.tokens.end());
    for (const auto token : unique) {
      auto it = stats.doc_frequency.find(token);
      if (it == stats.doc_frequency.end()) {
        stats.doc_frequency.emplace(std::string(token), 1);
      } else {
        ++it->second;
      }
    }
  }
  return stats;
}

double tfidf_similarity(const TokenizedText& a, const TokenizedText& b, const CorpusStats& stats) {
  const WeightMap wa = weigh(a, stats);
  const WeightMap wb = weigh(b, stats);
  const double na = norm(wa);
  const double nb = norm(wb);
  if (na == 0.0 || nb == 0.0) return 0.0;
  if (wa == wb) return 1.0;
  // Walk both maps in token order so the dot product sums in the same order
  // whichever argument comes first.
  double dot = 0.0;
  auto ia = wa.begin();
  auto ib = wb.begin();
  while (ia != wa.end() && ib != wb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  const double score = dot / (na * nb);
  return std::min(1.0, std::max(0.0, score));
}

StsScore TfidfSts::score(std::string_view sentence, const GlossaryEntry& description,
                         const StsContext& context) {
  if (context.corpus == nullptr) throw ArgumentError("TF-IDF scoring needs corpus statistics");
  return {tfidf_similarity(tokenize(sentence), tokenize(description.text), *context.corpus), false};
}

}  // namespace dld

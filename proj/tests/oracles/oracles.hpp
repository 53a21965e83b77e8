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

// Brute-force reference implementations. They share no code with the library
// and favour obviousness over speed: dense vectors, long double, linear scans.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dld::oracle {

using Doc = std::vector<std::string>;

inline long double idf(const std::vector<Doc>& corpus, const std::string& token) {
  long double df = 0;
  for (const auto& doc : corpus) {
    if (std::find(doc.begin(), doc.end(), token) != doc.end()) df += 1;
  }
  const long double n = static_cast<long double>(corpus.size());
  return std::log((1.0L + n) / (1.0L + df)) + 1.0L;
}

inline long double tfidf_cosine(const Doc& a, const Doc& b, const std::vector<Doc>& corpus) {
  std::vector<std::string> vocab(a.begin(), a.end());
  vocab.insert(vocab.end(), b.begin(), b.end());
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  std::vector<long double> va;
  std::vector<long double> vb;
  for (const auto& t : vocab) {
    const long double w = idf(corpus, t);
    va.push_back(static_cast<long double>(std::count(a.begin(), a.end(), t)) * w);
    vb.push_back(static_cast<long double>(std::count(b.begin(), b.end(), t)) * w);
  }
  long double dot = 0;
  long double na = 0;
  long double nb = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline long double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double dot = 0;
  long double na = 0;
  long double nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  if (std::sqrt(na) < 1e-12L || std::sqrt(nb) < 1e-12L) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::string normalize_token(const std::string& raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string out = raw.substr(begin, end - begin);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct RatioResult {
  long double score;
  bool undetermined;
};

inline RatioResult token_ratio(const std::vector<std::pair<std::string, double>>& dist,
                               const std::set<std::string>& yes, const std::set<std::string>& no) {
  long double py = 0;
  long double pn = 0;
  for (const auto& [token, p] : dist) {
    const std::string t = normalize_token(token);
    if (yes.count(t) != 0) py += p;
    if (no.count(t) != 0) pn += p;
  }
  if (py + pn < 1e-12L) return {0.5L, true};
  return {py / (py + pn), false};
}

inline long double mrr(const std::vector<std::size_t>& ranks) {
  long double sum = 0;
  for (std::size_t r : ranks) sum += 1.0L / static_cast<long double>(r);
  return sum / static_cast<long double>(ranks.size());
}

inline long double hits(const std::vector<std::size_t>& ranks, std::size_t k) {
  std::size_t in = 0;
  for (std::size_t r : ranks) in += r <= k ? 1 : 0;
  return static_cast<long double>(in) / static_cast<long double>(ranks.size());
}

/// 1 + number of other entries scoring at least as high as `totals[truth]`.
inline std::size_t pessimistic_rank(const std::vector<double>& totals, std::size_t truth) {
  std::size_t rank = 1;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    if (i != truth && totals[i] >= totals[truth]) ++rank;
  }
  return rank;
}

}  // namespace dld::oracle

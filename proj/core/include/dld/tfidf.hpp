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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dld {

struct TokenizedText {
  std::vector<std::string> tokens;

  friend bool operator==(const TokenizedText&, const TokenizedText&) = default;
};

struct CorpusStats {
  std::size_t doc_count = 0;
  std::map<std::string, std::size_t, std::less<>> doc_frequency;

  /// Smoothed idf: ln((1 + N) / (1 + df)) + 1, with df = 0 for unseen tokens.
  double idf(std::string_view token) const;
};

/// Splits identifiers and prose into lowercase tokens. Boundaries: any
/// non-alphanumeric ASCII byte, lower->upper case transitions ("isFlagged")
/// and letter<->digit transitions. Bytes >= 0x80 are kept inside tokens.
/// No stemming or stop-word removal.
TokenizedText tokenize(std::string_view text);

/// Document frequencies over `documents`. Throws ArgumentError when empty.
CorpusStats build_corpus_stats(std::span<const TokenizedText> documents);

/// Cosine of the raw-tf * smoothed-idf vectors of `a` and `b`; 0 when either
/// vector is all-zero. Symmetric in (a, b) bit-for-bit.
double tfidf_similarity(const TokenizedText& a, const TokenizedText& b, const CorpusStats& stats);

}  // namespace dld

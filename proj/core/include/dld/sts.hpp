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

#include <span>
#include <string_view>

#include "dld/domain.hpp"
#include "dld/tfidf.hpp"

namespace dld {

struct StsScore {
  double value = 0.0;
  // The backend gave no usable signal and `value` is the neutral fallback.
  bool undetermined = false;
};

// Everything an STS backend may consult beyond the (sentence, description)
// pair while one N-choice instance is being ranked.
struct StsContext {
  std::span<const DescriptiveLabel> label_set;
  // idf statistics over the instance's candidate descriptions (TF-IDF only).
  const CorpusStats* corpus = nullptr;
};

class StsBackend {
 public:
  virtual ~StsBackend() = default;
  virtual StsScore score(std::string_view sentence, const GlossaryEntry& description,
                         const StsContext& context) = 0;
};

// STS(s, g | T). Requires context.corpus.
class TfidfSts final : public StsBackend {
 public:
  StsScore score(std::string_view sentence, const GlossaryEntry& description,
                 const StsContext& context) override;
};

}  // namespace dld

// Copyright 2026 The ewer Authors.
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

#ifndef EWER_SCORER_H_
#define EWER_SCORER_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ewer {

using WordSeq = std::vector<std::string>;

// Edit counts of one hypothesis against its reference.
struct AlignmentCounts {
  int64_t ins = 0;
  int64_t del = 0;
  int64_t sub = 0;
  int64_t n_ref = 0;
  int64_t err = 0;  // ins + del + sub

  AlignmentCounts& operator+=(const AlignmentCounts& o) {
    ins += o.ins;
    del += o.del;
    sub += o.sub;
    n_ref += o.n_ref;
    err += o.err;
    return *this;
  }
  bool operator==(const AlignmentCounts&) const = default;
};

// Levenshtein alignment with unit costs. When several optimal alignments
// exist the traceback prefers match > substitution > deletion > insertion,
// so the I/D/S split is reproducible.
AlignmentCounts Align(const WordSeq& ref, const WordSeq& hyp);

// ERR / N for one sentence. Unclamped; insertions can push it above 1.
// Throws ValidationError on an empty reference.
double WerUtterance(const WordSeq& ref, const WordSeq& hyp);

using RefHypPair = std::pair<WordSeq, WordSeq>;

// Sum of errors over sum of reference words; not the mean of per-sentence
// WERs.
double CorpusWer(const std::vector<RefHypPair>& pairs);
double CorpusWer(const std::vector<AlignmentCounts>& counts);

// Fraction of sentences with at least one error.
double SentenceErrorRate(const std::vector<RefHypPair>& pairs);

// Splits on ASCII whitespace; no normalisation.
WordSeq Tokenize(const std::string& text);
std::string JoinTokens(const WordSeq& tokens);

}  // namespace ewer

#endif  // EWER_SCORER_H_

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

#include "ewer/scorer.h"

#include <algorithm>
#include <sstream>

#include "ewer/error.h"

namespace ewer {

AlignmentCounts Align(const WordSeq& ref, const WordSeq& hyp) {
  const size_t n = ref.size();
  const size_t m = hyp.size();
  // cost[i][j]: distance between ref[0, i) and hyp[0, j).
  std::vector<int64_t> cost((n + 1) * (m + 1));
  auto at = [&](size_t i, size_t j) -> int64_t& { return cost[i * (m + 1) + j]; };
  for (size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int64_t>(i);
  for (size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int64_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int64_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int64_t del = at(i - 1, j) + 1;
      const int64_t ins = at(i, j - 1) + 1;
      at(i, j) = std::min({diag, del, ins});
    }
  }

  AlignmentCounts counts;
  counts.n_ref = static_cast<int64_t>(n);
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    const int64_t here = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i - 1, j - 1) == here) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && at(i - 1, j - 1) + 1 == here) {
      ++counts.sub;
      --i;
      --j;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      ++counts.del;
      --i;
    } else {
      ++counts.ins;
      --j;
    }
  }
  counts.err = counts.ins + counts.del + counts.sub;
  return counts;
}

double WerUtterance(const WordSeq& ref, const WordSeq& hyp) {
  if (ref.empty()) {
    throw ValidationError("undefined WER for empty reference");
  }
  const AlignmentCounts c = Align(ref, hyp);
  return static_cast<double>(c.err) / static_cast<double>(c.n_ref);
}

double CorpusWer(const std::vector<AlignmentCounts>& counts) {
  if (counts.empty()) throw ValidationError("corpus WER of an empty corpus");
  AlignmentCounts total;
  for (const auto& c : counts) total += c;
  if (total.n_ref == 0) {
    throw ValidationError("undefined WER for empty reference");
  }
  return static_cast<double>(total.err) / static_cast<double>(total.n_ref);
}

double CorpusWer(const std::vector<RefHypPair>& pairs) {
  if (pairs.empty()) throw ValidationError("corpus WER of an empty corpus");
  std::vector<AlignmentCounts> counts;
  counts.reserve(pairs.size());
  for (const auto& [ref, hyp] : pairs) {
    if (ref.empty()) throw ValidationError("undefined WER for empty reference");
    counts.push_back(Align(ref, hyp));
  }
  return CorpusWer(counts);
}

double SentenceErrorRate(const std::vector<RefHypPair>& pairs) {
  if (pairs.empty()) {
    throw ValidationError("sentence error rate of an empty corpus");
  }
  size_t wrong = 0;
  for (const auto& [ref, hyp] : pairs) {
    if (Align(ref, hyp).err > 0) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(pairs.size());
}

WordSeq Tokenize(const std::string& text) {
  WordSeq out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(std::move(tok));
  return out;
}

std::string JoinTokens(const WordSeq& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace ewer

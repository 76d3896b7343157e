/*
 * Copyright 2026 The reljudge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Synthetic generation logs for dataset tests.

#ifndef RELJUDGE_TESTS_SYNTHETIC_LOG_H_
#define RELJUDGE_TESTS_SYNTHETIC_LOG_H_

#include <string>
#include <vector>

#include <fmt/format.h>

#include "reljudge/dataset.h"
#include "reljudge/util.h"

namespace reljudge::testing {

// `queries` queries with `positives` cited (3 of 5 passes) and `negatives`
// uncited documents each. All entries use forwards = 5.
inline std::vector<GenerationLogEntry> SyntheticLog(std::size_t queries,
                                                    std::size_t positives,
                                                    std::size_t negatives) {
  std::vector<GenerationLogEntry> log;
  log.reserve(queries * (positives + negatives));
  for (std::size_t q = 0; q < queries; ++q) {
    const std::string query = fmt::format("query number {}", q);
    for (std::size_t d = 0; d < positives + negatives; ++d) {
      GenerationLogEntry e;
      e.query = query;
      e.doc_id = fmt::format("d{}-{}", q, d);
      e.doc_text = fmt::format("Document {} about topic {}.", d, q);
      e.forwards = 5;
      e.citation_count = d < positives ? 3 : static_cast<int>(d % 2);
      log.push_back(std::move(e));
    }
  }
  return log;
}

// Documents never seen in any log, for random negatives.
inline std::vector<CorpusDoc> SyntheticCorpus(std::size_t count) {
  std::vector<CorpusDoc> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    corpus.push_back({fmt::format("c{}", i), fmt::format("Unrelated text {}.", i)});
  }
  return corpus;
}

inline CitationConfig DefaultCitation() {
  CitationConfig c;
  c.forwards_required = 5;
  c.citation_threshold = 2;
  return c;
}

}  // namespace reljudge::testing

#endif  // RELJUDGE_TESTS_SYNTHETIC_LOG_H_

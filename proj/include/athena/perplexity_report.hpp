// Copyright 2026 The Athena Authors.
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

#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>

#include "athena/errors.hpp"

namespace athena {

/// Average perplexity over a scored corpus. For the n-gram model the tokens
/// are words; for the character model they are characters.
struct PerplexityReport {
  double avg_perplexity = 0.0;
  std::uint64_t scored_words = 0;
  std::uint64_t skipped_words = 0;
  /// Natural-log sum of -ln p over scored tokens.
  double sum_neg_log_prob = 0.0;

  double sum_neg_log2_prob() const { return sum_neg_log_prob / std::log(2.0); }
};

/// Builds a report from a log-prob sum, enforcing m > 0. The sum arrives in
/// extended precision so that the mean rounds to the nearest double.
inline PerplexityReport make_report(long double sum_neg_log_prob, std::uint64_t scored,
                                    std::uint64_t skipped) {
  if (scored == 0) throw UndefinedPerplexityError();
  PerplexityReport r;
  r.sum_neg_log_prob = static_cast<double>(sum_neg_log_prob);
  r.scored_words = scored;
  r.skipped_words = skipped;
  r.avg_perplexity = std::exp(static_cast<double>(sum_neg_log_prob / static_cast<long double>(scored)));
  return r;
}

inline nlohmann::json to_json(const PerplexityReport& r) {
  return {{"avg_perplexity", r.avg_perplexity},
          {"scored_words", r.scored_words},
          {"skipped_words", r.skipped_words},
          {"sum_neg_log_prob", r.sum_neg_log_prob},
          {"sum_neg_log2_prob", r.sum_neg_log2_prob()}};
}

}  // namespace athena

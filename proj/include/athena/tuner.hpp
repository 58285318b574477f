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

// Perplexity-guided hill climbing over one integer tool parameter.

#pragma once

#include <algorithm>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "athena/charrnn.hpp"
#include "athena/errors.hpp"
#include "athena/ngram.hpp"
#include "athena/parallel.hpp"
#include "athena/perplexity_report.hpp"
#include "athena/seqio.hpp"

namespace athena::tuner {

using seqio::ReadSet;

/// Scores a (corrected) read set with a trained language model.
using Scorer = std::function<PerplexityReport(const ReadSet&)>;
/// Corrects a read set at one parameter value.
using Corrector = std::function<ReadSet(const ReadSet&, long)>;
using Objective = std::function<double(long)>;

struct SearchSpace {
  long lower = 1;
  long upper = 1;
  long step = 2;
  std::vector<long> initials;
  std::size_t iter_max = 50;

  long midpoint() const { return lower + (upper - lower) / 2; }

  void validate() const {
    if (lower > upper) throw ArgumentError("search range lower bound exceeds upper bound");
    if (step < 1) throw ArgumentError("search step must be at least 1");
    for (long k : initials) {
      if (k < lower || k > upper) throw ArgumentError("initial value " + std::to_string(k) + " outside range");
    }
  }

  /// Starting values, defaulting to the midpoint.
  std::vector<long> starts() const { return initials.empty() ? std::vector<long>{midpoint()} : initials; }

  /// Upper bound on distinct evaluations of one climb.
  std::size_t lattice_size() const { return static_cast<std::size_t>((upper - lower) / step) + 1; }
};

enum class Termination { kLocalMinimum, kIterationBudget, kBoundary };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::kLocalMinimum: return "local_minimum";
    case Termination::kIterationBudget: return "iteration_budget";
    case Termination::kBoundary: return "boundary";
  }
  return "?";
}

struct Evaluation {
  long value = 0;
  double perplexity = 0.0;

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

struct SearchResult {
  long start = 0;
  long best_value = 0;
  /// Distinct values in the order this climb first asked for them.
  std::vector<Evaluation> trace;
  std::size_t evaluations = 0;
  /// Centers visited, in order; each consecutive pair is one accepted move.
  std::vector<long> path;
  Termination termination = Termination::kLocalMinimum;

  double best_perplexity() const {
    for (const auto& e : trace) {
      if (e.value == best_value) return e.perplexity;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// Thread-safe memo over an objective: each value is computed once, even
/// when several climbs ask for it concurrently.
class MemoizedObjective {
 public:
  explicit MemoizedObjective(Objective f) : f_(std::move(f)) {}

  double operator()(long value) {
    std::shared_future<double> result;
    std::promise<double> promise;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = table_.find(value);
      if (it == table_.end()) {
        result = promise.get_future().share();
        table_.emplace(value, result);
        owner = true;
        ++computations_;
      } else {
        result = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(f_(value));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return result.get();
  }

  /// Number of distinct values actually computed.
  std::size_t computations() const {
    std::lock_guard lock(mutex_);
    return computations_;
  }

 private:
  Objective f_;
  mutable std::mutex mutex_;
  std::map<long, std::shared_future<double>> table_;
  std::size_t computations_ = 0;
};

/// Average perplexity of the sample after correcting it at value.
inline double evaluate_point(const Scorer& scorer, const Corrector& corrector, const ReadSet& sample,
                             long value) {
  if (sample.empty()) throw ArgumentError("evaluation sample is empty");
  ReadSet corrected;
  try {
    corrected = corrector(sample, value);
  } catch (const EvaluationError&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(value, e.what());
  }
  return scorer(corrected).avg_perplexity;
}

/// Hill climb from k_init: compare f at k, k-step, k+step (out-of-range
/// neighbours count as +inf and are never evaluated). Stop when f(k) is
/// strictly below both neighbours; otherwise move to the lower neighbour
/// (ties to the smaller value) while iterations remain. When the budget runs
/// out the best value seen by this climb is returned.
inline SearchResult find_optimal_k(MemoizedObjective& f, long k_init, const SearchSpace& space,
                                   std::size_t iter_max) {
  space.validate();
  if (k_init < space.lower || k_init > space.upper) {
    throw ArgumentError("initial value " + std::to_string(k_init) + " outside range");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  SearchResult result;
  result.start = k_init;
  std::map<long, double> seen;
  auto eval = [&](long v) {
    if (v < space.lower || v > space.upper) return kInf;
    auto it = seen.find(v);
    if (it != seen.end()) return it->second;
    const double y = f(v);
    seen.emplace(v, y);
    result.trace.push_back({v, y});
    return y;
  };

  long k = k_init;
  std::size_t budget = iter_max;
  for (;;) {
    result.path.push_back(k);
    const double fk = eval(k);
    const double fl = eval(k - space.step);
    const double fr = eval(k + space.step);
    if (fk < fl && fk < fr) {
      result.best_value = k;
      result.termination = (fl == kInf || fr == kInf) ? Termination::kBoundary : Termination::kLocalMinimum;
      break;
    }
    const long next = fl <= fr ? k - space.step : k + space.step;
    if (budget == 0) {
      const auto best = std::min_element(result.trace.begin(), result.trace.end(), [](const auto& a, const auto& b) {
        return a.perplexity < b.perplexity || (a.perplexity == b.perplexity && a.value < b.value);
      });
      result.best_value = best->value;
      result.termination = Termination::kIterationBudget;
      break;
    }
    --budget;
    k = next;
  }
  result.evaluations = result.trace.size();
  return result;
}

enum class LmKind { kNgram, kCharRnn };

inline LmKind parse_lm_kind(const std::string& s) {
  if (s == "ngram") return LmKind::kNgram;
  if (s == "charrnn" || s == "rnn") return LmKind::kCharRnn;
  throw ArgumentError("unknown language model kind: " + s);
}

inline std::string to_string(LmKind k) { return k == LmKind::kNgram ? "ngram" : "charrnn"; }

struct LmOptions {
  LmKind kind = LmKind::kNgram;
  std::size_t word_len = segmenter::kDefaultWordLength;
  std::size_t history_len = ngram::kDefaultHistory;
  ngram::SmoothingConfig smoothing{};
  charrnn::TrainConfig rnn{};
};

/// A trained model of either kind behind one scoring interface.
struct TrainedLm {
  LmKind kind = LmKind::kNgram;
  std::optional<ngram::NgramModel> ngram;
  std::optional<charrnn::RnnLm> rnn;
  std::uint64_t seed = 0;

  /// Scores every read handed to it (the caller has already sampled).
  Scorer scorer() const {
    if (kind == LmKind::kNgram) {
      const ngram::NgramModel* m = &*ngram;
      return [m](const ReadSet& reads) { return ngram::perplexity_of_reads(*m, reads); };
    }
    const charrnn::RnnLm* m = &*rnn;
    const std::uint64_t s = seed;
    return [m, s](const ReadSet& reads) {
      return charrnn::perplexity_rnn(*m, reads, std::max<std::size_t>(1, reads.size()), s);
    };
  }
};

inline TrainedLm train_lm(const ReadSet& reads, const LmOptions& options) {
  TrainedLm lm;
  lm.kind = options.kind;
  lm.seed = options.rnn.seed;
  if (options.kind == LmKind::kNgram) {
    lm.ngram = ngram::train_on_reads(reads, options.word_len, options.history_len, options.smoothing);
  } else {
    lm.rnn = charrnn::train_rnn(reads, options.rnn);
  }
  return lm;
}

struct TuneResult {
  long best_value = 0;
  ReadSet corrected;
  std::vector<SearchResult> runs;
  /// Distinct values corrected and scored across all restarts.
  std::size_t computations = 0;
};

/// Searches with an already-trained model: samples S' once, climbs from
/// every start sharing one memo, takes the argmin over restarts (ties to
/// the smaller value), and corrects the full dataset at that value.
inline TuneResult tune_with_scorer(const ReadSet& dataset, const Scorer& scorer, const Corrector& corrector,
                                   const SearchSpace& space, std::size_t sample_n, std::uint64_t seed) {
  space.validate();
  if (dataset.empty()) throw ArgumentError("dataset is empty");
  const ReadSet sample = seqio::sample_reads(dataset, sample_n == 0 ? dataset.size() : sample_n, seed);
  MemoizedObjective f([&](long v) { return evaluate_point(scorer, corrector, sample, v); });
  const auto starts = space.starts();
  TuneResult result;
  result.runs.resize(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    result.runs[i] = find_optimal_k(f, starts[i], space, space.iter_max);
  }
  const SearchResult* best = &result.runs.front();
  for (const auto& run : result.runs) {
    const double p = run.best_perplexity();
    const double q = best->best_perplexity();
    if (p < q || (p == q && run.best_value < best->best_value)) best = &run;
  }
  result.best_value = best->best_value;
  result.computations = f.computations();
  try {
    result.corrected = corrector(dataset, result.best_value);
  } catch (const EvaluationError&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(result.best_value, e.what());
  }
  return result;
}

/// Trains the chosen model on the whole uncorrected dataset, then tunes.
inline TuneResult tune(const ReadSet& dataset, const LmOptions& lm_options, const Corrector& corrector,
                       const SearchSpace& space, std::size_t sample_n, std::uint64_t seed) {
  if (dataset.empty()) throw ArgumentError("dataset is empty");
  const TrainedLm lm = train_lm(dataset, lm_options);
  return tune_with_scorer(dataset, lm.scorer(), corrector, space, sample_n, seed);
}

inline nlohmann::json to_json(const SearchResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.trace) trace.push_back({{"value", e.value}, {"perplexity", e.perplexity}});
  return {{"start", r.start},
          {"best_value", r.best_value},
          {"best_perplexity", r.best_perplexity()},
          {"termination", to_string(r.termination)},
          {"evaluations", r.evaluations},
          {"path", r.path},
          {"trace", trace}};
}

inline nlohmann::json to_json(const TuneResult& r, const SearchSpace& space) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) runs.push_back(to_json(run));
  return {{"best_value", r.best_value},
          {"lower", space.lower},
          {"upper", space.upper},
          {"step", space.step},
          {"iter_max", space.iter_max},
          {"computations", r.computations},
          {"restarts", runs}};
}

}  // namespace athena::tuner

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

// Pearson correlation and parameter sweeps that tabulate perplexity against
// correction quality.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "athena/ecsim.hpp"
#include "athena/errors.hpp"
#include "athena/tuner.hpp"

namespace athena::metrics {

/// Pearson product-moment correlation. Needs >= 3 paired points and nonzero
/// variance on both sides.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw StatisticsError("pearson: length mismatch");
  if (xs.size() < 3) throw StatisticsError("pearson: need at least 3 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw StatisticsError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct SweepRow {
  long value = 0;
  std::optional<double> perplexity_ngram;
  std::optional<double> perplexity_rnn;
  std::optional<double> gain;
  std::optional<double> external_quality;
};

inline constexpr const char* kPerplexityColumns[] = {"perplexity_ngram", "perplexity_rnn"};
inline constexpr const char* kQualityColumns[] = {"gain", "external_quality"};

inline std::optional<double> column(const SweepRow& row, const std::string& name) {
  if (name == "perplexity_ngram") return row.perplexity_ngram;
  if (name == "perplexity_rnn") return row.perplexity_rnn;
  if (name == "gain") return row.gain;
  if (name == "external_quality") return row.external_quality;
  throw ArgumentError("unknown sweep column: " + name);
}

struct SweepReport {
  /// Sorted ascending by value.
  std::vector<SweepRow> rows;
  /// Defined correlations keyed "perplexity_column:quality_column".
  std::map<std::string, double> correlations;

  /// Throws StatisticsError when the pair has no defined correlation.
  double correlation(const std::string& perplexity_column, const std::string& quality_column) const {
    auto it = correlations.find(perplexity_column + ":" + quality_column);
    if (it != correlations.end()) return it->second;
    // Recompute to surface the precise reason.
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
      auto x = column(r, perplexity_column);
      auto y = column(r, quality_column);
      if (x && y) {
        xs.push_back(*x);
        ys.push_back(*y);
      }
    }
    return pearson(xs, ys);
  }
};

/// Fills correlations for every perplexity/quality column pair that is
/// present on every row and defined.
inline void compute_correlations(SweepReport& report) {
  report.correlations.clear();
  for (const char* p : kPerplexityColumns) {
    for (const char* q : kQualityColumns) {
      std::vector<double> xs, ys;
      bool complete = !report.rows.empty();
      for (const auto& r : report.rows) {
        auto x = column(r, p);
        auto y = column(r, q);
        if (!x || !y) {
          complete = false;
          break;
        }
        xs.push_back(*x);
        ys.push_back(*y);
      }
      if (!complete) continue;
      try {
        report.correlations[std::string(p) + ":" + q] = pearson(xs, ys);
      } catch (const StatisticsError&) {
        // Undefined (too few rows or zero variance): left absent.
      }
    }
  }
}

struct SweepInputs {
  tuner::Scorer ngram;  // either scorer may be empty, not both
  tuner::Scorer rnn;
  tuner::Corrector corrector;
  std::vector<long> values;
  /// Error-free reads aligned with the dataset; enables the gain column.
  const seqio::ReadSet* truth = nullptr;
  std::map<long, double> external_quality;
};

/// Corrects the dataset at each value and scores it.
inline SweepReport sweep(const seqio::ReadSet& dataset, const SweepInputs& in) {
  if (in.values.empty()) throw ArgumentError("sweep needs at least one value");
  if (!in.ngram && !in.rnn) throw ArgumentError("sweep needs a language model");
  std::vector<long> values = in.values;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  SweepReport report;
  for (long v : values) {
    seqio::ReadSet corrected;
    try {
      corrected = in.corrector(dataset, v);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(v, e.what());
    }
    SweepRow row;
    row.value = v;
    if (in.ngram) row.perplexity_ngram = in.ngram(corrected).avg_perplexity;
    if (in.rnn) row.perplexity_rnn = in.rnn(corrected).avg_perplexity;
    if (in.truth != nullptr) row.gain = ecsim::ec_gain(dataset, corrected, *in.truth);
    if (auto it = in.external_quality.find(v); it != in.external_quality.end()) row.external_quality = it->second;
    report.rows.push_back(row);
  }
  compute_correlations(report);
  return report;
}

/// Columns, always in this order: value, perplexity_ngram, perplexity_rnn,
/// gain, external_quality. Absent cells are "NA".
inline void write_tsv(const SweepReport& report, std::ostream& out) {
  out << "value\tperplexity_ngram\tperplexity_rnn\tgain\texternal_quality\n";
  out.precision(17);
  auto cell = [&](const std::optional<double>& v) {
    if (v) {
      out << *v;
    } else {
      out << "NA";
    }
  };
  for (const auto& r : report.rows) {
    out << r.value << '\t';
    cell(r.perplexity_ngram);
    out << '\t';
    cell(r.perplexity_rnn);
    out << '\t';
    cell(r.gain);
    out << '\t';
    cell(r.external_quality);
    out << '\n';
  }
}

inline nlohmann::json to_json(const SweepReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"value", r.value}};
    auto put = [&](const char* key, const std::optional<double>& v) {
      j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    put("perplexity_ngram", r.perplexity_ngram);
    put("perplexity_rnn", r.perplexity_rnn);
    put("gain", r.gain);
    put("external_quality", r.external_quality);
    rows.push_back(j);
  }
  return {{"rows", rows}, {"correlations", report.correlations}};
}

}  // namespace athena::metrics

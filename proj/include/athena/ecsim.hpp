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

// k-mer spectrum counting, a substitution-only k-spectrum corrector, and
// per-base error-correction gain against ground truth.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "athena/errors.hpp"
#include "athena/parallel.hpp"
#include "athena/seqio.hpp"

namespace athena::ecsim {

using seqio::Read;
using seqio::ReadSet;

inline constexpr std::size_t kMaxK = 32;

/// Packed k-mer: two bits per base, first base most significant, so integer
/// order equals lexicographic order for a fixed k.
using Kmer = std::uint64_t;

inline int base_code(char c) {
  switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

inline std::string decode_kmer(Kmer code, std::size_t k) {
  std::string s(k, 'A');
  for (std::size_t i = k; i-- > 0;) {
    s[i] = "ACGT"[code & 3u];
    code >>= 2;
  }
  return s;
}

/// Calls fn(position, kmer) for every window of length k with only ACGT.
template <typename Fn>
void for_each_kmer(std::string_view seq, std::size_t k, Fn&& fn) {
  if (k == 0 || seq.size() < k) return;
  const Kmer mask = k == 32 ? ~Kmer{0} : ((Kmer{1} << (2 * k)) - 1);
  Kmer code = 0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const int b = base_code(seq[i]);
    if (b < 0) {
      valid = 0;
      code = 0;
      continue;
    }
    code = ((code << 2) | static_cast<Kmer>(b)) & mask;
    if (++valid >= k) fn(i + 1 - k, code);
  }
}

class KmerSpectrum {
 public:
  KmerSpectrum() = default;
  explicit KmerSpectrum(std::size_t k) : k_(k) {}

  std::size_t k() const { return k_; }
  std::size_t size() const { return counts_.size(); }
  /// Reads shorter than k.
  std::size_t short_reads() const { return short_reads_; }

  std::uint32_t count(Kmer code) const {
    auto it = counts_.find(code);
    return it == counts_.end() ? 0 : it->second;
  }

  std::uint32_t count(std::string_view kmer) const {
    if (kmer.size() != k_) return 0;
    std::uint32_t c = 0;
    bool found = false;
    for_each_kmer(kmer, k_, [&](std::size_t, Kmer code) {
      c = count(code);
      found = true;
    });
    return found ? c : 0;
  }

  /// Entries as strings; handy for comparisons in tests and reports.
  std::unordered_map<std::string, std::uint32_t> as_strings() const {
    std::unordered_map<std::string, std::uint32_t> out;
    for (const auto& [code, c] : counts_) out.emplace(decode_kmer(code, k_), c);
    return out;
  }

  const std::unordered_map<Kmer, std::uint32_t>& table() const { return counts_; }

  void add(Kmer code, std::uint32_t c) { counts_[code] += c; }
  void add_short_reads(std::size_t n) { short_reads_ += n; }

 private:
  std::size_t k_ = 0;
  std::size_t short_reads_ = 0;
  std::unordered_map<Kmer, std::uint32_t> counts_;
};

inline constexpr std::size_t kReadsPerTask = 2048;

/// Counts every overlapping (stride 1) k-mer made only of ACGT. Windows that
/// contain another symbol are not counted.
inline KmerSpectrum kmer_spectrum(const ReadSet& reads, std::size_t k) {
  if (k == 0 || k > kMaxK) throw ArgumentError("k must be in [1, 32]");
  const std::size_t tasks = parallel::chunk_count(reads.size(), kReadsPerTask);
  std::vector<KmerSpectrum> partial(tasks, KmerSpectrum(k));
  parallel::for_each_task(tasks, [&](std::size_t t) {
    const std::size_t lo = t * kReadsPerTask;
    const std::size_t hi = std::min(reads.size(), lo + kReadsPerTask);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& seq = reads[i].sequence;
      if (seq.size() < k) {
        partial[t].add_short_reads(1);
        continue;
      }
      for_each_kmer(seq, k, [&](std::size_t, Kmer code) { partial[t].add(code, 1); });
    }
  });
  KmerSpectrum spectrum(k);
  for (const auto& p : partial) {
    for (const auto& [code, c] : p.table()) spectrum.add(code, c);
    spectrum.add_short_reads(p.short_reads());
  }
  return spectrum;
}

struct KSpectrumConfig {
  std::size_t k = 17;
  /// k-mers with count >= solid_threshold are solid.
  std::uint32_t solid_threshold = 3;
  std::size_t max_edits = 2;

  void validate(std::size_t min_read_len) const {
    if (k == 0 || k > kMaxK) throw ArgumentError("k must be in [1, 32]");
    if (k > min_read_len) throw ArgumentError("k exceeds the shortest read length");
    if (solid_threshold == 0) throw ArgumentError("solid threshold must be at least 1");
  }
};

/// Solid threshold heuristic: max(2, coverage / 10).
inline std::uint32_t default_solid_threshold(double coverage) {
  return std::max<std::uint32_t>(2, static_cast<std::uint32_t>(coverage / 10.0));
}

/// Corrects one read against a spectrum: scans windows left to right; an
/// insolid window is replaced by its single-substitution neighbour with the
/// highest count among solid ones (ties go to the lexicographically smallest
/// k-mer). Stops after max_edits substitutions.
inline Read correct_read(const Read& read, const KmerSpectrum& spectrum, const KSpectrumConfig& cfg) {
  Read out = read;
  const std::size_t k = cfg.k;
  std::string& seq = out.sequence;
  if (cfg.max_edits == 0 || seq.size() < k) return out;
  std::size_t edits = 0;
  for (std::size_t i = 0; i + k <= seq.size() && edits < cfg.max_edits; ++i) {
    Kmer code = 0;
    bool valid = true;
    for (std::size_t j = 0; j < k; ++j) {
      const int b = base_code(seq[i + j]);
      if (b < 0) {
        valid = false;
        break;
      }
      code = (code << 2) | static_cast<Kmer>(b);
    }
    if (!valid || spectrum.count(code) >= cfg.solid_threshold) continue;

    std::uint32_t best_count = 0;
    Kmer best = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const unsigned shift = static_cast<unsigned>(2 * (k - 1 - j));
      const Kmer cleared = code & ~(Kmer{3} << shift);
      const Kmer current = (code >> shift) & 3u;
      for (Kmer b = 0; b < 4; ++b) {
        if (b == current) continue;
        const Kmer candidate = cleared | (b << shift);
        const std::uint32_t c = spectrum.count(candidate);
        if (c < cfg.solid_threshold) continue;
        if (c > best_count || (c == best_count && candidate < best)) {
          best_count = c;
          best = candidate;
        }
      }
    }
    if (best_count == 0) continue;
    const Kmer diff = best ^ code;
    for (std::size_t j = 0; j < k; ++j) {
      const unsigned shift = static_cast<unsigned>(2 * (k - 1 - j));
      if (((diff >> shift) & 3u) != 0) seq[i + j] = "ACGT"[(best >> shift) & 3u];
    }
    ++edits;
  }
  return out;
}

/// Built-in corrector. Read lengths never change; reads shorter than k pass
/// through unchanged.
inline ReadSet kspectrum_correct(const ReadSet& reads, const KSpectrumConfig& cfg) {
  if (cfg.k == 0 || cfg.k > kMaxK) throw ArgumentError("k must be in [1, 32]");
  if (cfg.solid_threshold == 0) throw ArgumentError("solid threshold must be at least 1");
  const KmerSpectrum spectrum = kmer_spectrum(reads, cfg.k);
  ReadSet out{std::vector<Read>(reads.size()), reads.source};
  parallel::for_each_task(parallel::chunk_count(reads.size(), kReadsPerTask), [&](std::size_t t) {
    const std::size_t lo = t * kReadsPerTask;
    const std::size_t hi = std::min(reads.size(), lo + kReadsPerTask);
    for (std::size_t i = lo; i < hi; ++i) out.reads[i] = correct_read(reads[i], spectrum, cfg);
  });
  return out;
}

struct GainBreakdown {
  std::size_t true_positives = 0;   // erroneous bases restored to truth
  std::size_t false_positives = 0;  // correct bases corrupted
  std::size_t errors = 0;           // erroneous bases in the original
  double gain = 0.0;                // (TP - FP) / errors
};

/// Per-base EC gain. The three sets must list the same ids in the same order
/// with equal lengths per read.
inline GainBreakdown ec_gain_breakdown(const ReadSet& original, const ReadSet& corrected,
                                       const ReadSet& truth) {
  if (original.size() != corrected.size() || original.size() != truth.size()) {
    throw AlignmentError("read sets differ in size");
  }
  GainBreakdown g;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const auto& o = original[i];
    const auto& c = corrected[i];
    const auto& t = truth[i];
    if (o.id != c.id || o.id != t.id) throw AlignmentError("read id mismatch at index " + std::to_string(i));
    if (o.sequence.size() != c.sequence.size() || o.sequence.size() != t.sequence.size()) {
      throw AlignmentError("read length mismatch for " + o.id);
    }
    for (std::size_t p = 0; p < o.sequence.size(); ++p) {
      const bool was_wrong = o.sequence[p] != t.sequence[p];
      g.errors += was_wrong;
      if (was_wrong && c.sequence[p] == t.sequence[p]) ++g.true_positives;
      if (!was_wrong && c.sequence[p] != t.sequence[p]) ++g.false_positives;
    }
  }
  if (g.errors == 0) throw UndefinedGainError();
  g.gain = (static_cast<double>(g.true_positives) - static_cast<double>(g.false_positives)) /
           static_cast<double>(g.errors);
  return g;
}

inline double ec_gain(const ReadSet& original, const ReadSet& corrected, const ReadSet& truth) {
  return ec_gain_breakdown(original, corrected, truth).gain;
}

}  // namespace athena::ecsim

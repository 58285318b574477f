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

// Synthetic genomes, clean read sampling, and error injection.
//
// U(0, x) below always means the uniform integer distribution on the closed
// range {0, ..., x}.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "athena/errors.hpp"
#include "athena/parallel.hpp"
#include "athena/rng.hpp"
#include "athena/seqio.hpp"

namespace athena::injector {

using seqio::Read;
using seqio::ReadSet;

enum class ErrorKind { kDeletion, kInsertion, kSubstitution, kMixture };

enum class Regime {
  kLow,   // 1..5 errors per read
  kHigh,  // 6..10 errors per read
};

inline std::string to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::kDeletion: return "deletion";
    case ErrorKind::kInsertion: return "insertion";
    case ErrorKind::kSubstitution: return "substitution";
    case ErrorKind::kMixture: return "mixture";
  }
  return "?";
}

inline ErrorKind parse_kind(const std::string& s) {
  if (s == "deletion") return ErrorKind::kDeletion;
  if (s == "insertion") return ErrorKind::kInsertion;
  if (s == "substitution") return ErrorKind::kSubstitution;
  if (s == "mixture") return ErrorKind::kMixture;
  throw ArgumentError("unknown error kind: " + s);
}

inline std::string to_string(Regime r) { return r == Regime::kLow ? "low" : "high"; }

inline Regime parse_regime(const std::string& s) {
  if (s == "low") return Regime::kLow;
  if (s == "high") return Regime::kHigh;
  throw ArgumentError("unknown error regime: " + s);
}

/// Inclusive per-read error-count bounds of a regime.
inline std::pair<int, int> regime_bounds(Regime r) {
  return r == Regime::kLow ? std::pair{1, 5} : std::pair{6, 10};
}

struct InjectionSpec {
  ErrorKind kind = ErrorKind::kSubstitution;
  Regime regime = Regime::kLow;
  std::uint64_t seed = 1;
};

/// One changed base. Deletions record the removed base at its position in
/// the original read; insertions record the added base at its position in
/// the corrupted read; substitutions record both bases. '-' marks absence.
struct Edit {
  std::string read_id;
  std::size_t position = 0;
  ErrorKind kind = ErrorKind::kSubstitution;
  char original = '-';
  char observed = '-';

  friend bool operator==(const Edit&, const Edit&) = default;
};

using ErrorLedger = std::vector<Edit>;

inline Read generate_genome(std::size_t length, std::uint64_t seed) {
  if (length == 0) throw ArgumentError("genome length must be at least 1");
  Rng rng(seed);
  Read genome{"genome", std::string(length, 'A'), std::nullopt};
  for (char& c : genome.sequence) c = rng.base();
  return genome;
}

/// n forward-strand substrings of length read_len at uniform start offsets.
inline ReadSet sample_clean_reads(const Read& genome, std::size_t n, std::size_t read_len,
                                  std::uint64_t seed) {
  if (read_len == 0 || read_len > genome.sequence.size()) {
    throw ArgumentError("read length must be in [1, genome length]");
  }
  Rng rng(seed);
  ReadSet out{{}, "generated"};
  out.reads.reserve(n);
  const auto last_start = static_cast<std::int64_t>(genome.sequence.size() - read_len);
  for (std::size_t i = 0; i < n; ++i) {
    const auto start = static_cast<std::size_t>(rng.uniform_int(0, last_start));
    out.reads.push_back({"read_" + std::to_string(i), genome.sequence.substr(start, read_len), std::nullopt});
  }
  return out;
}

/// Removes d consecutive bases starting at an index drawn from U(0, l-d).
inline Read inject_deletion(const Read& read, std::size_t d, Rng& rng, ErrorLedger* ledger = nullptr) {
  const std::size_t l = read.sequence.size();
  if (d > l) throw ArgumentError("deletion length exceeds read length");
  const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(l - d)));
  Read out = read;
  out.sequence.erase(i, d);
  if (out.quality) out.quality->erase(i, d);
  if (ledger != nullptr) {
    for (std::size_t j = 0; j < d; ++j) {
      ledger->push_back({read.id, i + j, ErrorKind::kDeletion, read.sequence[i + j], '-'});
    }
  }
  return out;
}

/// Inserts I uniform bases at an index drawn from U(0, l-I).
inline Read inject_insertion(const Read& read, std::size_t count, Rng& rng, ErrorLedger* ledger = nullptr) {
  const std::size_t l = read.sequence.size();
  if (count > l) throw ArgumentError("insertion length exceeds read length");
  const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(l - count)));
  std::string inserted(count, 'A');
  for (char& c : inserted) c = rng.base();
  Read out = read;
  out.sequence.insert(i, inserted);
  if (out.quality) out.quality->insert(i, std::string(count, 'I'));
  if (ledger != nullptr) {
    for (std::size_t j = 0; j < count; ++j) {
      ledger->push_back({read.id, i + j, ErrorKind::kInsertion, '-', inserted[j]});
    }
  }
  return out;
}

/// Draws k_pos positions from U(0, l-1) with replacement and overwrites each
/// with a uniform base, which may equal the original (one chance in four).
/// Only positions whose final base differs from the original are recorded.
inline Read inject_substitution(const Read& read, std::size_t k_pos, Rng& rng,
                                ErrorLedger* ledger = nullptr) {
  Read out = read;
  const std::size_t l = read.sequence.size();
  if (l == 0) return out;
  for (std::size_t n = 0; n < k_pos; ++n) {
    const auto p = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(l - 1)));
    out.sequence[p] = rng.base();
  }
  if (ledger != nullptr) {
    for (std::size_t p = 0; p < l; ++p) {
      if (out.sequence[p] != read.sequence[p]) {
        ledger->push_back({read.id, p, ErrorKind::kSubstitution, read.sequence[p], out.sequence[p]});
      }
    }
  }
  return out;
}

/// Per read: an error count from the regime, a kind (drawn uniformly from the
/// three for mixtures), then the matching procedure. Read i uses stream i of
/// the injection seed, so results do not depend on the thread count. Deletions are
/// capped at l-1 bases so no read becomes empty.
inline std::pair<ReadSet, ErrorLedger> inject_readset(const ReadSet& reads, const InjectionSpec& spec) {
  const auto [lo, hi] = regime_bounds(spec.regime);
  ReadSet out{std::vector<Read>(reads.size()), reads.source};
  std::vector<ErrorLedger> ledgers(reads.size());
  constexpr std::size_t kReadsPerTask = 1024;
  parallel::for_each_task(parallel::chunk_count(reads.size(), kReadsPerTask), [&](std::size_t t) {
    const std::size_t first = t * kReadsPerTask;
    const std::size_t last = std::min(reads.size(), first + kReadsPerTask);
    for (std::size_t i = first; i < last; ++i) {
      Rng rng = Rng::for_stream(spec.seed, i);
      const auto count = static_cast<std::size_t>(rng.uniform_int(lo, hi));
      ErrorKind kind = spec.kind;
      if (kind == ErrorKind::kMixture) kind = static_cast<ErrorKind>(rng.below(3));
      const Read& read = reads[i];
      switch (kind) {
        case ErrorKind::kDeletion: {
          const std::size_t d = std::min(count, read.sequence.size() - 1);
          out.reads[i] = inject_deletion(read, d, rng, &ledgers[i]);
          break;
        }
        case ErrorKind::kInsertion:
          out.reads[i] = inject_insertion(read, std::min(count, read.sequence.size()), rng, &ledgers[i]);
          break;
        default:
          out.reads[i] = inject_substitution(read, count, rng, &ledgers[i]);
          break;
      }
    }
  });
  ErrorLedger ledger;
  for (auto& l : ledgers) ledger.insert(ledger.end(), l.begin(), l.end());
  return {std::move(out), std::move(ledger)};
}

/// Undoes a ledger: returns the reads as they were before injection.
inline ReadSet replay_inverse(const ReadSet& corrupted, const ErrorLedger& ledger) {
  std::map<std::string, std::vector<const Edit*>> by_read;
  for (const auto& e : ledger) by_read[e.read_id].push_back(&e);
  ReadSet out = corrupted;
  for (auto& read : out.reads) {
    auto it = by_read.find(read.id);
    if (it == by_read.end()) continue;
    auto& edits = it->second;
    // Insertions first (highest position first), then deletions (lowest first).
    std::vector<const Edit*> ins, del;
    for (const Edit* e : edits) {
      if (e->kind == ErrorKind::kInsertion) ins.push_back(e);
      else if (e->kind == ErrorKind::kDeletion) del.push_back(e);
      else read.sequence.at(e->position) = e->original;
    }
    std::sort(ins.begin(), ins.end(), [](auto a, auto b) { return a->position > b->position; });
    for (const Edit* e : ins) {
      read.sequence.erase(e->position, 1);
      if (read.quality) read.quality->erase(e->position, 1);
    }
    std::sort(del.begin(), del.end(), [](auto a, auto b) { return a->position < b->position; });
    for (const Edit* e : del) {
      read.sequence.insert(e->position, 1, e->original);
      if (read.quality) read.quality->insert(e->position, 1, 'I');
    }
  }
  return out;
}

/// TSV with a header row: read_id, position, kind, original, observed.
inline void write_ledger(const ErrorLedger& ledger, std::ostream& out) {
  out << "read_id\tposition\tkind\toriginal\tobserved\n";
  for (const auto& e : ledger) {
    out << e.read_id << '\t' << e.position << '\t' << to_string(e.kind) << '\t' << e.original << '\t'
        << e.observed << '\n';
  }
  if (!out) throw Error("ledger write failed");
}

inline ErrorLedger read_ledger(std::istream& in) {
  ErrorLedger ledger;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::istringstream fields(line);
    Edit e;
    std::string position, kind, original, observed;
    if (!std::getline(fields, e.read_id, '\t') || !std::getline(fields, position, '\t') ||
        !std::getline(fields, kind, '\t') || !std::getline(fields, original, '\t') ||
        !std::getline(fields, observed, '\t') || original.size() != 1 || observed.size() != 1) {
      throw InputError("malformed ledger line " + std::to_string(line_no));
    }
    if (position.empty() || position.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("malformed ledger position on line " + std::to_string(line_no));
    }
    e.position = std::stoul(position);
    e.kind = parse_kind(kind);
    e.original = original[0];
    e.observed = observed[0];
    ledger.push_back(std::move(e));
  }
  return ledger;
}

}  // namespace athena::injector

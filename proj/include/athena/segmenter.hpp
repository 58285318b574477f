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

// Cuts reads into fixed-length, non-overlapping words for the n-gram model.
// Words are packed two bits per base (A=0, C=1, G=2, T=3).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "athena/errors.hpp"
#include "athena/seqio.hpp"

namespace athena::segmenter {

using Word = std::uint32_t;

/// Largest word length whose packed code stays clear of the reserved
/// marker codes at the top of the 32-bit range.
inline constexpr std::size_t kMaxWordLength = 15;
inline constexpr std::size_t kDefaultWordLength = 7;
inline constexpr std::size_t kMinConfiguredWordLength = 4;
inline constexpr std::size_t kMaxConfiguredWordLength = 12;

inline int base_code(char c) {
  switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
  }
}

inline std::optional<Word> encode_word(std::string_view word) {
  Word code = 0;
  for (char c : word) {
    const int b = base_code(c);
    if (b < 0) return std::nullopt;
    code = (code << 2) | static_cast<Word>(b);
  }
  return code;
}

inline std::string decode_word(Word code, std::size_t length) {
  std::string out(length, 'A');
  for (std::size_t i = length; i-- > 0;) {
    out[i] = "ACGT"[code & 3u];
    code >>= 2;
  }
  return out;
}

struct WordSequence {
  std::vector<Word> words;
  std::string read_id;
  /// Words dropped because they contained a non-ACGT symbol.
  std::size_t skipped = 0;
  /// Indices into words where history restarts because a skipped word
  /// preceded them. Index 0 is implicit and never listed.
  std::vector<std::size_t> history_resets;
  std::size_t word_len = 0;

  friend bool operator==(const WordSequence&, const WordSequence&) = default;
};

/// Validates a configured word length. Returns a warning for lengths below 5
/// (short words carry little discriminating power).
inline std::optional<std::string> check_word_length(std::size_t word_len) {
  if (word_len < kMinConfiguredWordLength || word_len > kMaxConfiguredWordLength) {
    throw ArgumentError("word length must be in [4, 12], got " + std::to_string(word_len));
  }
  if (word_len < 5) {
    return "word length " + std::to_string(word_len) +
           " gives near-uniform word frequencies; 5..8 is recommended";
  }
  return std::nullopt;
}

inline WordSequence segment_read(const seqio::Read& read, std::size_t word_len) {
  if (word_len == 0 || word_len > kMaxWordLength) {
    throw ArgumentError("word length must be in [1, 15], got " + std::to_string(word_len));
  }
  if (word_len > read.sequence.size()) {
    throw ArgumentError("word length " + std::to_string(word_len) + " exceeds read length " +
                        std::to_string(read.sequence.size()));
  }
  WordSequence out;
  out.read_id = read.id;
  out.word_len = word_len;
  const std::size_t n = read.sequence.size() / word_len;
  out.words.reserve(n);
  const std::string_view seq = read.sequence;
  bool gap = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto code = encode_word(seq.substr(i * word_len, word_len));
    if (!code) {
      ++out.skipped;
      gap = true;
      continue;
    }
    if (gap && !out.words.empty()) out.history_resets.push_back(out.words.size());
    gap = false;
    out.words.push_back(*code);
  }
  return out;
}

struct SegmentedCorpus {
  std::vector<WordSequence> sequences;
  /// Reads shorter than the word length.
  std::size_t short_reads = 0;
  std::size_t word_len = 0;

  std::size_t word_count() const {
    std::size_t n = 0;
    for (const auto& s : sequences) n += s.words.size();
    return n;
  }
  std::size_t skipped_words() const {
    std::size_t n = 0;
    for (const auto& s : sequences) n += s.skipped;
    return n;
  }
};

/// Streaming form: fn receives each WordSequence in read order. Returns the
/// number of reads shorter than word_len (skipped, not fatal).
template <typename Fn>
std::size_t for_each_segment(const seqio::ReadSet& reads, std::size_t word_len, Fn&& fn) {
  std::size_t short_reads = 0;
  for (const auto& read : reads) {
    if (read.sequence.size() < word_len) {
      ++short_reads;
      continue;
    }
    fn(segment_read(read, word_len));
  }
  return short_reads;
}

inline SegmentedCorpus segment_corpus(const seqio::ReadSet& reads, std::size_t word_len) {
  if (word_len == 0 || word_len > kMaxWordLength) {
    throw ArgumentError("word length must be in [1, 15], got " + std::to_string(word_len));
  }
  SegmentedCorpus corpus;
  corpus.word_len = word_len;
  corpus.sequences.reserve(reads.size());
  corpus.short_reads = for_each_segment(
      reads, word_len, [&](WordSequence&& s) { corpus.sequences.push_back(std::move(s)); });
  return corpus;
}

}  // namespace athena::segmenter

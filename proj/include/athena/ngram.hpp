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

// Word n-gram language model over packed nucleotide words, with interpolated
// Witten-Bell smoothing and a global probability floor.
//
// Each read is one sentence. A sentence (or the run of words following a
// skipped word) is preceded by `history_len` start markers, which condition
// predictions but are never predicted. Counts are kept for every order
// 0..history_len, where order o means a history of o tokens.
//
// Interpolated Witten-Bell, for a history g with c(g) tokens observed after
// it and T(g) distinct followers:
//
//   P_o(w | g) = (c(g, w) + T(g) * P_{o-1}(w | g')) / (c(g) + T(g))
//
// with g' the history minus its oldest token, P_o = P_{o-1} when g was never
// seen, and the unigram base interpolated against a uniform distribution over
// vocab + {UNK}. UNK is one class; an individual out-of-vocabulary word gets
// the class mass divided evenly over the word types never observed.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "athena/binary_io.hpp"
#include "athena/errors.hpp"
#include "athena/parallel.hpp"
#include "athena/perplexity_report.hpp"
#include "athena/rng.hpp"
#include "athena/segmenter.hpp"

namespace athena::ngram {

using segmenter::Word;
using segmenter::WordSequence;

inline constexpr std::size_t kMaxHistory = 5;
inline constexpr std::size_t kDefaultHistory = 3;
inline constexpr Word kStartMarker = 0xFFFFFFFFu;
/// Stands for "any out-of-vocabulary word" in class-probability queries.
inline constexpr Word kUnknownWord = 0xFFFFFFFEu;
inline constexpr double kDefaultFloor = 1e-7;

enum class Smoothing : std::uint8_t {
  kWittenBell = 0,
  /// Unsmoothed relative frequencies; unseen events fall to the floor.
  kMaximumLikelihood = 1,
};

inline std::string_view to_string(Smoothing s) {
  return s == Smoothing::kWittenBell ? "witten_bell" : "maximum_likelihood";
}

struct SmoothingConfig {
  Smoothing method = Smoothing::kWittenBell;
  double floor = kDefaultFloor;
};

/// Token tuple, oldest first.
struct Gram {
  std::array<Word, kMaxHistory + 1> tokens{};
  std::uint8_t size = 0;

  static Gram of(std::span<const Word> ws) {
    Gram g;
    g.size = static_cast<std::uint8_t>(ws.size());
    std::copy(ws.begin(), ws.end(), g.tokens.begin());
    return g;
  }

  std::span<const Word> view() const { return {tokens.data(), size}; }

  friend bool operator==(const Gram& a, const Gram& b) {
    return a.size == b.size && std::equal(a.tokens.begin(), a.tokens.begin() + a.size, b.tokens.begin());
  }
  friend bool operator<(const Gram& a, const Gram& b) {
    return std::lexicographical_compare(a.tokens.begin(), a.tokens.begin() + a.size,
                                        b.tokens.begin(), b.tokens.begin() + b.size);
  }
};

struct GramHash {
  std::size_t operator()(const Gram& g) const {
    std::uint64_t h = g.size;
    for (std::size_t i = 0; i < g.size; ++i) h = splitmix64_mix(h ^ g.tokens[i]) + i;
    return static_cast<std::size_t>(h);
  }
};

using CountTable = std::unordered_map<Gram, std::uint64_t, GramHash>;

struct ContextStats {
  std::uint64_t total = 0;  // c(g)
  std::uint64_t types = 0;  // T(g)
};

class NgramModel {
 public:
  NgramModel() = default;

  NgramModel(std::size_t word_len, std::size_t history_len, SmoothingConfig smoothing = {})
      : word_len_(word_len), history_len_(history_len), smoothing_(smoothing),
        counts_(history_len + 1), contexts_(history_len + 1) {
    if (word_len == 0 || word_len > segmenter::kMaxWordLength) {
      throw ArgumentError("word length must be in [1, 15]");
    }
    if (history_len > kMaxHistory) throw ArgumentError("history length must be in [0, 5]");
    if (!(smoothing.floor > 0.0 && smoothing.floor < 1.0)) {
      throw ArgumentError("probability floor must be in (0, 1)");
    }
  }

  std::size_t word_len() const { return word_len_; }
  std::size_t history_len() const { return history_len_; }
  const SmoothingConfig& smoothing() const { return smoothing_; }
  std::uint64_t total_words() const { return total_words_; }
  std::size_t vocab_size() const { return counts_.empty() ? 0 : counts_[0].size(); }

  /// Count table of one order; keys hold order+1 tokens (history, word).
  const CountTable& counts(std::size_t order) const { return counts_.at(order); }

  bool in_vocab(Word w) const { return counts_[0].contains(Gram::of({&w, 1})); }

  /// Number of word types never observed in training (at least 1).
  double unseen_types() const {
    const double all = std::pow(4.0, static_cast<double>(word_len_));
    return std::max(1.0, all - static_cast<double>(vocab_size()));
  }

  std::uint64_t count(std::span<const Word> gram) const {
    if (gram.empty() || gram.size() > history_len_ + 1) return 0;
    const auto& table = counts_[gram.size() - 1];
    auto it = table.find(Gram::of(gram));
    return it == table.end() ? 0 : it->second;
  }

  /// c(g) and T(g) for a history of 1..history_len tokens, or nullptr.
  const ContextStats* context(std::span<const Word> history) const {
    if (history.empty() || history.size() > history_len_) return nullptr;
    const auto& table = contexts_[history.size()];
    auto it = table.find(Gram::of(history));
    return it == table.end() ? nullptr : &it->second;
  }

  /// Smoothed probability of w, or of the whole UNK class when w is out of
  /// vocabulary, before the floor. Sums to one over vocab + {UNK}.
  double class_prob(Word w, std::span<const Word> history) const {
    if (history.size() > history_len_) history = history.last(history_len_);
    const bool known = in_vocab(w);
    const double n = static_cast<double>(total_words_);
    double p;
    if (smoothing_.method == Smoothing::kWittenBell) {
      const double types = static_cast<double>(vocab_size());
      const double base = 1.0 / (types + 1.0);
      const double c = known ? static_cast<double>(count({&w, 1})) : 0.0;
      p = (c + types * base) / (n + types);
    } else {
      p = known ? static_cast<double>(count({&w, 1})) / n : 0.0;
    }
    std::array<Word, kMaxHistory + 1> buf{};
    for (std::size_t o = 1; o <= history.size(); ++o) {
      const auto g = history.last(o);
      const ContextStats* stats = context(g);
      if (stats == nullptr) continue;
      double c_gw = 0.0;
      if (known) {
        std::copy(g.begin(), g.end(), buf.begin());
        buf[o] = w;
        c_gw = static_cast<double>(count({buf.data(), o + 1}));
      }
      const double c_g = static_cast<double>(stats->total);
      if (smoothing_.method == Smoothing::kWittenBell) {
        const double t_g = static_cast<double>(stats->types);
        p = (c_gw + t_g * p) / (c_g + t_g);
      } else {
        p = c_gw / c_g;
      }
    }
    return p;
  }

  /// P(UNK class | history).
  double unknown_mass(std::span<const Word> history) const {
    return class_prob(kUnknownWord, history);
  }

  /// Conditional word probability, floored. history is oldest first and may
  /// include start markers; only the last history_len tokens are used.
  double prob(Word w, std::span<const Word> history) const {
    double p = class_prob(w, history);
    if (!in_vocab(w)) p /= unseen_types();
    return std::max(p, smoothing_.floor);
  }

  double prob(std::string_view word, std::span<const std::string> history) const {
    std::vector<Word> h;
    for (const auto& s : history) h.push_back(encode_or_throw(s));
    return prob(encode_or_throw(word), h);
  }

  /// Adds raw counts (used by training, merging, and loading).
  void add_count(const Gram& gram, std::uint64_t c) {
    counts_.at(gram.size - 1)[gram] += c;
    if (gram.size == 1) total_words_ += c;
    finalized_ = false;
  }

  /// Adds every count of another model with identical shape.
  void merge(const NgramModel& other) {
    if (other.word_len_ != word_len_ || other.history_len_ != history_len_) {
      throw ArgumentError("cannot merge models of different shape");
    }
    for (std::size_t o = 0; o <= history_len_; ++o) {
      for (const auto& [gram, c] : other.counts_[o]) add_count(gram, c);
    }
    finalize();
  }

  /// Rebuilds context statistics from the count tables.
  void finalize() {
    for (std::size_t o = 1; o <= history_len_; ++o) {
      auto& table = contexts_[o];
      table.clear();
      for (const auto& [gram, c] : counts_[o]) {
        Gram g = gram;
        g.size = static_cast<std::uint8_t>(o);
        auto& stats = table[g];
        stats.total += c;
        stats.types += 1;
      }
    }
    finalized_ = true;
  }

  bool finalized() const { return finalized_; }

  friend bool operator==(const NgramModel& a, const NgramModel& b) {
    return a.word_len_ == b.word_len_ && a.history_len_ == b.history_len_ &&
           a.smoothing_.method == b.smoothing_.method && a.smoothing_.floor == b.smoothing_.floor &&
           a.total_words_ == b.total_words_ && a.counts_ == b.counts_;
  }

 private:
  Word encode_or_throw(std::string_view s) const {
    if (s.size() != word_len_) throw ArgumentError("word length does not match model");
    auto code = segmenter::encode_word(s);
    if (!code) throw ArgumentError("word contains non-ACGT symbol");
    return *code;
  }

  std::size_t word_len_ = 0;
  std::size_t history_len_ = 0;
  SmoothingConfig smoothing_{};
  std::uint64_t total_words_ = 0;
  std::vector<CountTable> counts_;
  std::vector<std::unordered_map<Gram, ContextStats, GramHash>> contexts_;
  bool finalized_ = true;
};

namespace detail {

/// Calls fn(history, word) for each word of a sentence, history being the
/// preceding `h` tokens (start markers included), oldest first.
template <typename Fn>
void walk_sentence(const WordSequence& seq, std::size_t h, Fn&& fn) {
  std::array<Word, kMaxHistory + 1> window{};
  auto reset = [&] { std::fill(window.begin(), window.begin() + h, kStartMarker); };
  reset();
  std::size_t next_reset = 0;
  for (std::size_t i = 0; i < seq.words.size(); ++i) {
    if (next_reset < seq.history_resets.size() && seq.history_resets[next_reset] == i) {
      reset();
      ++next_reset;
    }
    const Word w = seq.words[i];
    fn(std::span<const Word>(window.data(), h), w);
    if (h > 0) {
      std::copy(window.begin() + 1, window.begin() + h, window.begin());
      window[h - 1] = w;
    }
  }
}

inline void count_sentence(const WordSequence& seq, std::size_t h, std::vector<CountTable>& tables) {
  walk_sentence(seq, h, [&](std::span<const Word> history, Word w) {
    Gram g;
    for (std::size_t o = 0; o <= h; ++o) {
      const auto ctx = history.last(o);
      std::copy(ctx.begin(), ctx.end(), g.tokens.begin());
      g.tokens[o] = w;
      g.size = static_cast<std::uint8_t>(o + 1);
      ++tables[o][g];
    }
  });
}

inline constexpr std::size_t kSentencesPerTask = 2048;

}  // namespace detail

/// Counts every order over the corpus. Counting is split into fixed chunks
/// merged afterwards; counts are additive, so the result does not depend on
/// the thread count.
inline NgramModel train(std::span<const WordSequence> corpus, std::size_t history_len,
                        SmoothingConfig smoothing = {}) {
  if (corpus.empty()) throw TrainingError("empty training corpus");
  const std::size_t word_len = corpus.front().word_len;
  for (const auto& s : corpus) {
    if (s.word_len != word_len) throw TrainingError("corpus mixes word lengths");
  }
  NgramModel model(word_len, history_len, smoothing);
  const std::size_t tasks = parallel::chunk_count(corpus.size(), detail::kSentencesPerTask);
  std::vector<std::vector<CountTable>> partial(tasks);
  parallel::for_each_task(tasks, [&](std::size_t t) {
    auto& tables = partial[t];
    tables.resize(history_len + 1);
    const std::size_t lo = t * detail::kSentencesPerTask;
    const std::size_t hi = std::min(corpus.size(), lo + detail::kSentencesPerTask);
    for (std::size_t i = lo; i < hi; ++i) detail::count_sentence(corpus[i], history_len, tables);
  });
  for (auto& tables : partial) {
    for (std::size_t o = 0; o <= history_len; ++o) {
      for (const auto& [gram, c] : tables[o]) model.add_count(gram, c);
    }
    tables.clear();
  }
  if (model.total_words() == 0) throw TrainingError("training corpus contains no words");
  model.finalize();
  return model;
}

inline NgramModel train(const segmenter::SegmentedCorpus& corpus, std::size_t history_len,
                        SmoothingConfig smoothing = {}) {
  return train(std::span<const WordSequence>(corpus.sequences), history_len, smoothing);
}

/// Trains directly from reads, segmenting with word_len.
inline NgramModel train_on_reads(const seqio::ReadSet& reads, std::size_t word_len,
                                 std::size_t history_len, SmoothingConfig smoothing = {}) {
  return train(segmenter::segment_corpus(reads, word_len), history_len, smoothing);
}

/// -ln P of every word of one sentence, summed.
inline long double sentence_neg_log_prob(const NgramModel& model, const WordSequence& seq) {
  long double sum = 0.0L;
  detail::walk_sentence(seq, model.history_len(), [&](std::span<const Word> history, Word w) {
    sum -= std::log(model.prob(w, history));
  });
  return sum;
}

/// exp of the mean -ln P(W_i | preceding words of the same read). Per-read
/// sums are combined by pairwise summation in read order.
inline PerplexityReport perplexity(const NgramModel& model, std::span<const WordSequence> corpus) {
  std::uint64_t scored = 0;
  std::uint64_t skipped = 0;
  for (const auto& s : corpus) {
    if (s.word_len != model.word_len()) {
      throw ArgumentError("corpus word length " + std::to_string(s.word_len) +
                          " does not match model word length " + std::to_string(model.word_len()));
    }
    scored += s.words.size();
    skipped += s.skipped;
  }
  std::vector<long double> sums(corpus.size(), 0.0L);
  const std::size_t tasks = parallel::chunk_count(corpus.size(), detail::kSentencesPerTask);
  parallel::for_each_task(tasks, [&](std::size_t t) {
    const std::size_t lo = t * detail::kSentencesPerTask;
    const std::size_t hi = std::min(corpus.size(), lo + detail::kSentencesPerTask);
    for (std::size_t i = lo; i < hi; ++i) sums[i] = sentence_neg_log_prob(model, corpus[i]);
  });
  return make_report(parallel::pairwise_sum(sums), scored, skipped);
}

inline PerplexityReport perplexity(const NgramModel& model, const segmenter::SegmentedCorpus& corpus) {
  if (corpus.word_len != 0 && corpus.word_len != model.word_len()) {
    throw ArgumentError("corpus word length does not match model");
  }
  return perplexity(model, std::span<const WordSequence>(corpus.sequences));
}

/// Segments reads with the model's word length and scores them.
inline PerplexityReport perplexity_of_reads(const NgramModel& model, const seqio::ReadSet& reads) {
  return perplexity(model, segmenter::segment_corpus(reads, model.word_len()));
}

// Model file, little-endian:
//   "ATHN" | u32 version | u32 word_len | u32 history_len | u8 smoothing
//   | f64 floor | u64 total_words
//   | for order 0..history_len: u64 entries, then entries sorted by token
//     tuple, each (order+1) x u32 token + u64 count
//   | u32 CRC-32 of all preceding bytes
inline constexpr std::string_view kModelMagic = "ATHN";
inline constexpr std::uint32_t kModelVersion = 1;

inline void save_model(const NgramModel& model, std::ostream& out) {
  binary::Writer w;
  w.bytes(kModelMagic);
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.word_len()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.history_len()));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.smoothing().method));
  w.put<double>(model.smoothing().floor);
  w.put<std::uint64_t>(model.total_words());
  for (std::size_t o = 0; o <= model.history_len(); ++o) {
    std::vector<std::pair<Gram, std::uint64_t>> entries(model.counts(o).begin(), model.counts(o).end());
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    w.put<std::uint64_t>(entries.size());
    for (const auto& [gram, c] : entries) {
      for (Word t : gram.view()) w.put<std::uint32_t>(t);
      w.put<std::uint64_t>(c);
    }
  }
  w.finish(out);
}

inline NgramModel load_model(std::istream& in) {
  binary::Reader r(in, kModelMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelVersion) {
    throw ModelFormatError("unsupported n-gram model version " + std::to_string(version));
  }
  const auto word_len = r.get<std::uint32_t>();
  const auto history_len = r.get<std::uint32_t>();
  const auto method = r.get<std::uint8_t>();
  if (method > 1) throw ModelFormatError("unknown smoothing method");
  SmoothingConfig smoothing{static_cast<Smoothing>(method), r.get<double>()};
  const auto total_words = r.get<std::uint64_t>();
  NgramModel model = [&] {
    try {
      return NgramModel(word_len, history_len, smoothing);
    } catch (const ArgumentError& e) {
      throw ModelFormatError(std::string("invalid model header: ") + e.what());
    }
  }();
  for (std::size_t o = 0; o <= history_len; ++o) {
    const auto entries = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < entries; ++i) {
      Gram g;
      g.size = static_cast<std::uint8_t>(o + 1);
      for (std::size_t k = 0; k <= o; ++k) g.tokens[k] = r.get<std::uint32_t>();
      model.add_count(g, r.get<std::uint64_t>());
    }
  }
  if (!r.at_end()) throw ModelFormatError("trailing bytes in model file");
  if (model.total_words() != total_words) throw ModelFormatError("word total does not match counts");
  model.finalize();
  return model;
}

}  // namespace athena::ngram

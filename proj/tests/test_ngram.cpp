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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "athena/injector.hpp"
#include "athena/ngram.hpp"
#include "ngram_oracle.hpp"

namespace athena::ngram {
namespace {

using segmenter::segment_corpus;
using oracle::NgramOracle;
using oracle::Strings;

seqio::ReadSet reads_of(const Strings& seqs) {
  seqio::ReadSet set;
  for (std::size_t i = 0; i < seqs.size(); ++i) set.reads.push_back({"r" + std::to_string(i), seqs[i], std::nullopt});
  return set;
}

seqio::ReadSet random_reads(std::uint64_t seed, std::size_t n, std::size_t max_len, int n_rate = 0) {
  Rng rng(seed);
  Strings seqs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const auto len = 1 + rng.below(max_len);
    for (std::uint64_t j = 0; j < len; ++j) s += n_rate > 0 && rng.below(n_rate) == 0 ? 'N' : "ACGT"[rng.below(3)];
    seqs.push_back(s);
  }
  return reads_of(seqs);
}

std::string decode_token(Word t, std::size_t L) {
  return t == kStartMarker ? "<s>" : segmenter::decode_word(t, L);
}

TEST(NgramTrain, CountsMatchBruteForce) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto reads = random_reads(seed, 40, 30, seed % 2 ? 12 : 0);
    const std::size_t L = 2 + seed % 3;
    const std::size_t h = seed % 4;
    NgramOracle oracle(reads, L, h);
    const auto model = train_on_reads(reads, L, h);
    std::size_t entries = 0;
    for (std::size_t o = 0; o <= h; ++o) {
      for (const auto& [gram, c] : model.counts(o)) {
        Strings g;
        for (Word t : gram.view()) g.push_back(decode_token(t, L));
        ASSERT_EQ(oracle.counts().at(g), c);
        ++entries;
      }
    }
    EXPECT_EQ(entries, oracle.counts().size());
  }
}

TEST(NgramTrain, HistoryResetsAfterSkippedWord) {
  const auto model = train_on_reads(reads_of({"AACCNNGGTT"}), 2, 1);
  const Word gg = *segmenter::encode_word("GG");
  const Word cc = *segmenter::encode_word("CC");
  const std::array<Word, 2> after_reset{kStartMarker, gg};
  const std::array<Word, 2> across_gap{cc, gg};
  EXPECT_EQ(model.count(after_reset), 1u);
  EXPECT_EQ(model.count(across_gap), 0u);
}

// Toy corpus AC / AA / CA with L=1, h=1. Hand evaluation:
//   P0(A) = (4 + 2/3) / 8 = 7/12,  P0(C) = 1/3,  P0(UNK) = 1/12
//   P(A|<s>) = (2 + 2*7/12) / 5 = 19/30
//   P(C|A)   = (1 + 2*1/3) / 4  = 5/12
//   P(A|A)   = (1 + 2*7/12) / 4 = 13/24
//   P(A|C)   = (1 + 1*7/12) / 2 = 19/24
//   P(C|<s>) = (1 + 2*1/3) / 5  = 1/3
//   P(G|A)   = (0 + 2*1/12) / 4 / (4 - 2) = 1/48
class ToyCorpus : public ::testing::Test {
 protected:
  NgramModel model = train_on_reads(reads_of({"AC", "AA", "CA"}), 1, 1);
};

TEST_F(ToyCorpus, HandEvaluatedProbabilities) {
  auto p = [&](const std::string& w, const std::string& h) {
    return model.prob(*segmenter::encode_word(w), std::array<Word, 1>{h == "<s>" ? kStartMarker : *segmenter::encode_word(h)});
  };
  EXPECT_NEAR(p("A", "<s>"), 19.0 / 30, 1e-15);
  EXPECT_NEAR(p("C", "A"), 5.0 / 12, 1e-15);
  EXPECT_NEAR(p("A", "A"), 13.0 / 24, 1e-15);
  EXPECT_NEAR(p("A", "C"), 19.0 / 24, 1e-15);
  EXPECT_NEAR(p("C", "<s>"), 1.0 / 3, 1e-15);
  EXPECT_NEAR(p("G", "A"), 1.0 / 48, 1e-15);
  EXPECT_NEAR(model.prob("C", Strings{"A"}), 5.0 / 12, 1e-15);
}

TEST_F(ToyCorpus, HandEvaluatedPerplexity) {
  const double product = (19.0 / 30) * (5.0 / 12) * (19.0 / 30) * (13.0 / 24) * (1.0 / 3) * (19.0 / 24);
  const auto report = perplexity_of_reads(model, reads_of({"AC", "AA", "CA"}));
  EXPECT_EQ(report.scored_words, 6u);
  EXPECT_NEAR(report.avg_perplexity, std::pow(product, -1.0 / 6), 1e-12);
}

TEST(NgramProb, MatchesOracleRecursion) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto reads = random_reads(seed * 7, 60, 40, seed % 2 ? 15 : 0);
    const std::size_t L = 2 + seed % 2;
    const std::size_t h = 1 + seed % 3;
    NgramOracle oracle(reads, L, h);
    const auto model = train_on_reads(reads, L, h);
    const auto probe = random_reads(seed + 100, 20, 30);
    for (const auto& r : probe.reads) {
      Strings hist(h, "<s>");
      std::vector<Word> codes(h, kStartMarker);
      for (std::size_t i = 0; i + L <= r.sequence.size(); i += L) {
        const std::string w = r.sequence.substr(i, L);
        const Word code = *segmenter::encode_word(w);
        EXPECT_NEAR(model.prob(code, codes), oracle.prob(w, hist), 1e-12 * oracle.prob(w, hist));
        hist.push_back(w);
        hist.erase(hist.begin());
        codes.push_back(code);
        codes.erase(codes.begin());
      }
    }
  }
}

// Product form: PP = (prod P)^(-1/m), evaluated through the oracle.
TEST(NgramPerplexity, MatchesProductFormOnSmallCorpora) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto train_reads = random_reads(seed, 30, 24, 20);
    const std::size_t L = 2 + seed % 3;
    const std::size_t h = seed % 4;
    const auto model = train_on_reads(train_reads, L, h);
    const auto test_reads = random_reads(seed + 1000, 6, 24, 20);
    NgramOracle oracle(test_reads, L, h);  // only used for positions
    ASSERT_LE(oracle.positions().size(), 50u);
    if (oracle.positions().empty()) continue;
    NgramOracle reference(train_reads, L, h);
    long double product = 1.0L;
    for (const auto& [hist, w] : oracle.positions()) product *= reference.prob(w, hist);
    const double expected = static_cast<double>(std::pow(product, -1.0L / oracle.positions().size()));
    const auto report = perplexity_of_reads(model, test_reads);
    EXPECT_EQ(report.scored_words, oracle.positions().size());
    EXPECT_NEAR(report.avg_perplexity, expected, 1e-9 * expected);
  }
}

TEST(NgramPerplexity, UniformVocabularyOfFour) {
  const auto model = train_on_reads(reads_of({"ACGTACGTTGCA"}), 1, 0, {Smoothing::kMaximumLikelihood});
  const auto report = perplexity_of_reads(model, reads_of({"GATTACA", "CCGGT"}));
  EXPECT_NEAR(report.avg_perplexity, 4.0, 1e-6);
}

TEST(NgramPerplexity, SingleWordCorpus) {
  const auto reads = reads_of({"AAAAAAAAAAAAAAAAAAAAA"});
  const auto model = train_on_reads(reads, 7, 3, {Smoothing::kMaximumLikelihood});
  EXPECT_NEAR(perplexity_of_reads(model, reads).avg_perplexity, 1.0, 1e-9);
}

TEST(NgramPerplexity, Errors) {
  const auto model = train_on_reads(reads_of({"ACGTACGTACGTAC"}), 7, 1);
  EXPECT_THROW(perplexity_of_reads(model, reads_of({"NNNNNNNACG"})), UndefinedPerplexityError);
  EXPECT_THROW(perplexity(model, segment_corpus(reads_of({"ACGTACGTACGT"}), 4)), ArgumentError);
  EXPECT_THROW(train_on_reads(reads_of({"NNNNNNN"}), 7, 1), TrainingError);
  EXPECT_THROW(train(std::span<const segmenter::WordSequence>{}, 1), TrainingError);
  EXPECT_THROW(NgramModel(7, 6), ArgumentError);
}

TEST(NgramPerplexity, ReportsSkippedWords) {
  const auto model = train_on_reads(reads_of({"ACGTACGTACGTAC"}), 7, 1);
  const auto report = perplexity_of_reads(model, reads_of({"ACGTACGNACGTAC"}));
  EXPECT_EQ(report.scored_words, 1u);
  EXPECT_EQ(report.skipped_words, 1u);
}

TEST(NgramPerplexity, FloorKeepsPerplexityFinite) {
  const auto model = train_on_reads(reads_of({"AAAAAAAAAAAAAAAAAAAAA"}), 7, 3, {Smoothing::kMaximumLikelihood});
  const auto report = perplexity_of_reads(model, reads_of({"CCCCCCCGGGGGGG"}));
  EXPECT_NEAR(report.avg_perplexity, 1e7, 1e-3);
}

// Normalization over vocab + UNK class for every context seen in training.
TEST(NgramProb, Normalization) {
  const auto reads = random_reads(77, 200, 40, 25);
  const auto model = train_on_reads(reads, 3, 2);
  std::vector<Word> vocab;
  for (const auto& [g, c] : model.counts(0)) vocab.push_back(g.tokens[0]);
  for (std::size_t o = 1; o <= 2; ++o) {
    for (const auto& [g, c] : model.counts(o)) {
      const auto hist = g.view().first(o);
      double sum = model.unknown_mass(hist);
      for (Word w : vocab) sum += model.class_prob(w, hist);
      ASSERT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

// Every context occurrence is followed by a word unless it ends a sentence.
TEST(NgramTrain, CountConsistency) {
  const auto reads = random_reads(5, 100, 40);
  const std::size_t h = 2;
  const auto model = train_on_reads(reads, 3, h);
  const auto corpus = segment_corpus(reads, 3);
  for (std::size_t o = 1; o <= h; ++o) {
    std::map<Gram, std::uint64_t> followed;
    for (const auto& [g, c] : model.counts(o)) followed[Gram::of(g.view().first(o))] += c;
    std::map<Gram, std::uint64_t> final_occurrences;
    for (const auto& s : corpus.sequences) {
      std::vector<Word> padded(h, kStartMarker);
      padded.insert(padded.end(), s.words.begin(), s.words.end());
      final_occurrences[Gram::of(std::span<const Word>(padded).last(o))] += 1;
    }
    std::size_t checked = 0;
    for (const auto& [ctx, c] : followed) {
      const auto v = ctx.view();
      if (std::find(v.begin(), v.end(), kStartMarker) != v.end()) continue;
      EXPECT_EQ(c + final_occurrences[ctx], model.count(v)) << "order " << o;
      ++checked;
    }
    EXPECT_GT(checked, 0u);
  }
}

TEST(NgramModelFile, RoundTripIsByteIdentical) {
  const auto model = train_on_reads(random_reads(3, 50, 40, 10), 4, 3);
  std::stringstream first;
  save_model(model, first);
  const auto loaded = load_model(first);
  EXPECT_EQ(loaded, model);
  std::stringstream second;
  save_model(loaded, second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(NgramModelFile, GoldenFile) {
  std::ifstream in(std::string(ATHENA_TEST_DATA) + "/toy.athn", std::ios::binary);
  ASSERT_TRUE(in);
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(bytes.substr(0, 4), "ATHN");
  std::istringstream stream(bytes);
  const auto loaded = load_model(stream);
  EXPECT_EQ(loaded, train_on_reads(reads_of({"AC", "AA", "CA"}), 1, 1));
  std::ostringstream out;
  save_model(loaded, out);
  EXPECT_EQ(out.str(), bytes);
}

TEST(NgramModelFile, CorruptionDetected) {
  const auto model = train_on_reads(reads_of({"ACGTACGTACGTAC"}), 7, 1);
  std::stringstream buf;
  save_model(model, buf);
  std::string bytes = buf.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_model(truncated), ModelFormatError);
  bytes[20] ^= 0x5a;
  std::istringstream flipped(bytes);
  EXPECT_THROW(load_model(flipped), ModelFormatError);
  std::istringstream wrong_magic("ATHR" + bytes.substr(4));
  EXPECT_THROW(load_model(wrong_magic), ModelFormatError);
}

TEST(NgramTrain, MergeEqualsTrainingOnConcatenation) {
  const auto a = random_reads(11, 50, 40);
  const auto b = random_reads(12, 50, 40);
  auto merged = train_on_reads(a, 3, 2);
  merged.merge(train_on_reads(b, 3, 2));
  seqio::ReadSet both = a;
  both.reads.insert(both.reads.end(), b.reads.begin(), b.reads.end());
  EXPECT_EQ(merged, train_on_reads(both, 3, 2));
}

TEST(NgramTrain, ThreadCountDoesNotChangeModel) {
  const auto reads = random_reads(9, 6000, 60, 30);
  parallel::set_threads(1);
  const auto one = train_on_reads(reads, 5, 3);
  const double pp1 = perplexity_of_reads(one, reads).avg_perplexity;
  parallel::set_threads(8);
  const auto eight = train_on_reads(reads, 5, 3);
  const double pp8 = perplexity_of_reads(eight, reads).avg_perplexity;
  parallel::set_threads(0);
  EXPECT_EQ(one, eight);
  EXPECT_EQ(pp1, pp8);
}

}  // namespace
}  // namespace athena::ngram

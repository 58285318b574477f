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
#include <set>
#include <sstream>

#include "athena/charrnn.hpp"

namespace athena::charrnn {
namespace {

seqio::ReadSet periodic_reads(std::size_t n, const std::string& unit, std::uint64_t seed) {
  Rng rng(seed);
  seqio::ReadSet set;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const auto phase = rng.below(unit.size());
    for (std::size_t j = 0; j < 50; ++j) s += unit[(phase + j) % unit.size()];
    set.reads.push_back({"p" + std::to_string(i), s, std::nullopt});
  }
  return set;
}

seqio::ReadSet uniform_reads(std::size_t n, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  seqio::ReadSet set;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (std::size_t j = 0; j < len; ++j) s += rng.base();
    set.reads.push_back({"u" + std::to_string(i), s, std::nullopt});
  }
  return set;
}

// One layer, hidden 2: U picks A and C into the two units, W = 0.5 I, V
// copies the units onto the A and C logits, biases zero.
RnnLm hand_model() {
  RnnLm m(1, 2);
  m.U(0)(0, 0) = 1.0;
  m.U(0)(1, 1) = 1.0;
  m.W(0)(0, 0) = 0.5;
  m.W(0)(1, 1) = 0.5;
  m.V()(0, 0) = 1.0;
  m.V()(1, 1) = 1.0;
  return m;
}

TEST(Forward, HandEvaluatedTwoSteps) {
  const auto out = forward(hand_model(), "AC");
  ASSERT_EQ(out.size(), 2u);
  // Step 0: s = (tanh 1, 0).
  const double s0 = std::tanh(1.0);
  const double z0 = std::exp(s0) + 3.0;
  EXPECT_NEAR(out[0][0], std::exp(s0) / z0, 1e-12);
  EXPECT_NEAR(out[0][1], 1.0 / z0, 1e-12);
  EXPECT_NEAR(out[0][3], 1.0 / z0, 1e-12);
  // Step 1: s = (tanh(0.5 s0), tanh(1)).
  const double a = std::tanh(0.5 * s0);
  const double b = std::tanh(1.0);
  const double z1 = std::exp(a) + std::exp(b) + 2.0;
  EXPECT_NEAR(out[1][0], std::exp(a) / z1, 1e-12);
  EXPECT_NEAR(out[1][1], std::exp(b) / z1, 1e-12);
  EXPECT_NEAR(out[1][2], 1.0 / z1, 1e-12);
  EXPECT_NEAR(out[1][0], 0.2577485, 1e-6);
}

TEST(Forward, RejectsNonNucleotides) {
  EXPECT_THROW(forward(hand_model(), "ACN"), InputError);
  EXPECT_THROW(encode("ACX"), InputError);
}

TEST(SequenceLoss, MatchesNaiveCrossEntropy) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto model = RnnLm::initialized(1 + seed % 2, 8, seed);
    const std::string s = uniform_reads(1, 30, seed)[0].sequence;
    const auto dist = forward(model, s);
    double naive = 0.0;
    for (std::size_t t = 0; t + 1 < s.size(); ++t) naive -= std::log(dist[t][encode(s.substr(t + 1, 1))[0]]);
    const auto loss = sequence_loss(model, encode(s));
    EXPECT_EQ(loss.targets, s.size() - 1);
    EXPECT_NEAR(loss.neg_log_prob, naive, 1e-10 * naive);
  }
}

TEST(Perplexity, ZeroWeightModelIsExactlyFour) {
  const auto report = perplexity_rnn(RnnLm(2, 32), uniform_reads(20, 40, 1), 20, 1);
  EXPECT_EQ(report.avg_perplexity, 4.0);
}

TEST(Perplexity, SkipsNTargets) {
  seqio::ReadSet set{{{"r", "ACNGT", std::nullopt}}, ""};
  const auto report = perplexity_rnn(RnnLm(1, 4), set, 1, 1);
  EXPECT_EQ(report.scored_words, 3u);
  EXPECT_EQ(report.skipped_words, 1u);
  seqio::ReadSet single{{{"r", "A", std::nullopt}}, ""};
  EXPECT_THROW(perplexity_rnn(RnnLm(1, 4), single, 1, 1), UndefinedPerplexityError);
  EXPECT_THROW(perplexity_rnn(RnnLm(1, 4), set, 0, 1), ArgumentError);
}

TEST(GradientCheck, RandomSmallModels) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 31);
    const auto model = RnnLm::initialized(1 + rng.below(2), 2 + rng.below(6), seed);
    std::string s;
    const auto len = 2 + rng.below(19);
    for (std::uint64_t i = 0; i < len; ++i) s += rng.below(10) == 0 ? 'N' : rng.base();
    if (s[1] == 'N') s[1] = 'A';
    EXPECT_LE(gradient_check(model, s, 1e-5), 1e-4) << "seed " << seed << " seq " << s;
  }
}

TEST(GradientCheck, ArgumentRanges) {
  const auto model = RnnLm::initialized(1, 4, 1);
  EXPECT_THROW(gradient_check(model, "A", 1e-5), ArgumentError);
  EXPECT_THROW(gradient_check(model, std::string(21, 'A'), 1e-5), ArgumentError);
  EXPECT_THROW(gradient_check(model, "ACGT", 1e-3), ArgumentError);
}

TEST(Train, PeriodicStringIsLearned) {
  TrainConfig cfg;
  cfg.layers = 1;
  cfg.hidden = 16;
  cfg.minibatch = 20;
  cfg.learning_rate = 0.5;
  cfg.epochs = 8;
  const auto result = train_rnn_detailed(periodic_reads(1000, "ACGGTCA", 3), cfg);
  const auto& test = result.split.test;
  EXPECT_LE(perplexity_rnn(result.model, test, test.size(), 1).avg_perplexity, 1.05);
  EXPECT_EQ(result.train_loss.size(), cfg.epochs);
}

TEST(Train, UniformCorpusStaysNearFour) {
  TrainConfig cfg;
  cfg.layers = 1;
  cfg.hidden = 16;
  cfg.minibatch = 20;
  cfg.learning_rate = 0.5;
  cfg.epochs = 4;
  const auto result = train_rnn_detailed(uniform_reads(1000, 50, 4), cfg);
  const auto& test = result.split.test;
  const double pp = perplexity_rnn(result.model, test, test.size(), 1).avg_perplexity;
  EXPECT_GE(pp, 3.8);
  EXPECT_LE(pp, 4.2);
}

TEST(Train, ThreadCountDoesNotChangeWeights) {
  TrainConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 8;
  cfg.minibatch = 50;
  cfg.learning_rate = 0.1;
  cfg.epochs = 2;
  const auto reads = uniform_reads(300, 40, 9);
  parallel::set_threads(1);
  const auto one = train_rnn(reads, cfg);
  parallel::set_threads(8);
  const auto eight = train_rnn(reads, cfg);
  parallel::set_threads(0);
  EXPECT_EQ(one, eight);
}

TEST(Train, Errors) {
  TrainConfig cfg;
  EXPECT_THROW(train_rnn(uniform_reads(50, 20, 1), cfg), TrainingError);
  cfg.train_fraction = 0.5;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(Split, DisjointAndSeeded) {
  TrainConfig cfg;
  const auto reads = uniform_reads(100, 10, 2);
  const auto split = split_reads(reads, cfg);
  EXPECT_EQ(split.train.size(), 90u);
  EXPECT_EQ(split.validation.size(), 5u);
  EXPECT_EQ(split.test.size(), 5u);
  std::set<std::string> ids;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const auto& r : part->reads) EXPECT_TRUE(ids.insert(r.id).second);
  }
  EXPECT_EQ(split_reads(reads, cfg).test, split.test);
}

TEST(ModelFile, RoundTripAndCorruption) {
  const auto model = RnnLm::initialized(2, 5, 8);
  std::stringstream buf;
  save_model(model, buf);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 4), "ATHR");
  EXPECT_EQ(load_model(buf), model);
  std::string bad = bytes;
  bad[bad.size() / 2] ^= 1;
  std::istringstream flipped(bad);
  EXPECT_THROW(load_model(flipped), ModelFormatError);
  std::istringstream truncated(bytes.substr(0, 10));
  EXPECT_THROW(load_model(truncated), ModelFormatError);
}

}  // namespace
}  // namespace athena::charrnn

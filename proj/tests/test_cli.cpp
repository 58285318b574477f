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
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "athena/athena.hpp"

namespace athena {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("athena_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  CliRun run(const std::string& args) const {
    const std::string cmd = "cd '" + dir.string() + "' && " ATHENA_CLI_PATH " " + args + " 2>stderr.txt";
    CliRun r;
    FILE* p = ::popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(dir / name, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  }

  void simulate() const {
    ASSERT_EQ(run("inject --genome-length 3000 --num-reads 600 --sim-seed 4 --clean-out clean.fq --kind substitution "
                  "--regime low --seed 9 -o noisy.fq --ledger ledger.tsv")
                  .code,
              0);
  }

  fs::path dir;
};

TEST_F(CliTest, TrainWritesLoadableDeterministicModel) {
  simulate();
  const auto r = run("train --reads noisy.fq -o a.athn --word-len 5 --history 2");
  ASSERT_EQ(r.code, 0);
  const auto stats = nlohmann::json::parse(r.out);
  EXPECT_EQ(stats.at("reads"), 600);
  EXPECT_EQ(stats.at("words"), 6000);
  ASSERT_EQ(run("train --reads noisy.fq -o b.athn --word-len 5 --history 2").code, 0);
  EXPECT_EQ(slurp("a.athn"), slurp("b.athn"));
  std::istringstream in(slurp("a.athn"));
  EXPECT_EQ(ngram::load_model(in).word_len(), 5u);
  EXPECT_TRUE(fs::exists(dir / "a.athn.config.toml"));
}

TEST_F(CliTest, MissingInputExitsTwo) {
  const auto r = run("train --reads nope.fq -o m.athn");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(slurp("stderr.txt").find("input not found"), std::string::npos);
  EXPECT_EQ(run("inject --kind swap -o x.fq --ledger l.tsv --reads nope.fq").code, 2);
}

TEST_F(CliTest, PerplexityReportInvariant) {
  simulate();
  ASSERT_EQ(run("train --reads clean.fq -o m.athn --word-len 5 --history 2").code, 0);
  const auto r = run("perplexity --model m.athn --reads clean.fq");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const double pp = j.at("avg_perplexity");
  EXPECT_GE(pp, 1.0);
  EXPECT_NEAR(pp, std::exp(j.at("sum_neg_log_prob").get<double>() / j.at("scored_words").get<double>()), 1e-9 * pp);
  { std::ofstream(dir / "empty.fq"); }
  EXPECT_EQ(run("perplexity --model m.athn --reads empty.fq").code, 1);
  EXPECT_NE(slurp("stderr.txt").find("undefined perplexity"), std::string::npos);
}

TEST_F(CliTest, InjectLedgerMatchesChanges) {
  simulate();
  const auto clean = seqio::read_file(dir / "clean.fq");
  const auto noisy = seqio::read_file(dir / "noisy.fq");
  std::ifstream lin(dir / "ledger.tsv");
  const auto ledger = injector::read_ledger(lin);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    for (std::size_t p = 0; p < clean[i].sequence.size(); ++p) changed += clean[i].sequence[p] != noisy[i].sequence[p];
  }
  EXPECT_EQ(ledger.size(), changed);
  std::map<std::string, int> per_read;
  for (const auto& e : ledger) ++per_read[e.read_id];
  for (const auto& [id, n] : per_read) EXPECT_LE(n, 5);
  ASSERT_EQ(run("inject --reads clean.fq --seed 9 -o again.fq --ledger again.tsv").code, 0);
  EXPECT_EQ(slurp("again.fq"), slurp("noisy.fq"));
}

TEST_F(CliTest, CorrectIdentityAdapterAndErrors) {
  simulate();
  std::ofstream(dir / "identity.json") << R"({"template": "cp {input} {output} # {k}", "timeout": 30})";
  ASSERT_EQ(run("correct --reads noisy.fq -o same.fq --adapter identity.json --k 11").code, 0);
  EXPECT_EQ(seqio::read_file(dir / "same.fq"), seqio::read_file(dir / "noisy.fq"));
  // Every read three times over: every k-mer is solid at M = 3.
  seqio::ReadSet solid;
  for (const auto& r : seqio::read_file(dir / "clean.fq").reads) {
    for (int c = 0; c < 3; ++c) solid.reads.push_back(r);
  }
  seqio::write_fastq_file(solid, dir / "solid.fq");
  ASSERT_EQ(run("correct --reads solid.fq -o solid2.fq --k 11").code, 0);
  EXPECT_EQ(slurp("solid2.fq"), slurp("solid.fq"));
  std::ofstream(dir / "missing.json") << R"({"template": "/nonexistent/tool {input} {output} {k}"})";
  EXPECT_EQ(run("correct --reads noisy.fq -o x.fq --adapter missing.json").code, 1);
  EXPECT_NE(slurp("stderr.txt").find("logs:"), std::string::npos);
}

TEST_F(CliTest, TuneWritesTraceAndIsReproducible) {
  simulate();
  const std::string args = "tune --reads noisy.fq --word-len 5 --history 1 --lower 9 --upper 25 --sample-n 300 ";
  const auto a = run(args + "--out-dir a");
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(run(args + "--out-dir b").code, 0);
  EXPECT_EQ(slurp("a/search.json"), slurp("b/search.json"));
  EXPECT_EQ(slurp("a/corrected.fastq"), slurp("b/corrected.fastq"));
  const auto j = nlohmann::json::parse(slurp("a/search.json"));
  EXPECT_EQ(std::stol(a.out), j.at("best_value").get<long>());
  EXPECT_LE(j.at("computations").get<std::size_t>(), 9u);
  EXPECT_EQ(j.at("restarts")[0].at("start"), 17);
  EXPECT_TRUE(fs::exists(dir / "a" / "config.toml"));
  // Full output equals the corrector applied at the chosen value.
  ASSERT_EQ(run("correct --reads noisy.fq -o direct.fq --k " + std::to_string(j.at("best_value").get<long>())).code, 0);
  EXPECT_EQ(seqio::read_file(dir / "direct.fq"), seqio::read_file(dir / "a" / "corrected.fastq"));
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  simulate();
  std::ofstream(dir / "run.toml") << "[correct]\nreads=\"noisy.fq\"\nout=\"cfg.fq\"\nk=9\n";
  ASSERT_EQ(run("--config run.toml correct --k 13").code, 0);
  ASSERT_EQ(run("correct --reads noisy.fq -o flag.fq --k 13").code, 0);
  EXPECT_EQ(slurp("cfg.fq"), slurp("flag.fq"));
  EXPECT_NE(slurp("cfg.fq.config.toml").find("k=13"), std::string::npos);
}

TEST_F(CliTest, SweepAndEval) {
  simulate();
  ASSERT_EQ(run("train --reads noisy.fq -o m.athn --word-len 5 --history 1").code, 0);
  const auto r = run("sweep --reads noisy.fq --ngram-model m.athn --truth clean.fq --values 9,13,17 --json s.json");
  ASSERT_EQ(r.code, 0);
  std::istringstream tsv(r.out);
  std::string line;
  std::vector<double> pp, gain;
  std::getline(tsv, line);
  while (std::getline(tsv, line)) {
    std::istringstream f(line);
    std::string v, p, rnn, g;
    f >> v >> p >> rnn >> g;
    pp.push_back(std::stod(p));
    gain.push_back(std::stod(g));
  }
  EXPECT_EQ(pp.size(), 3u);
  const auto j = nlohmann::json::parse(slurp("s.json"));
  EXPECT_NEAR(j.at("correlations").at("perplexity_ngram:gain").get<double>(), metrics::pearson(pp, gain), 1e-12);

  const auto e = run("eval --original noisy.fq --corrected clean.fq --truth clean.fq");
  ASSERT_EQ(e.code, 0);
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(e.out).at("gain").get<double>(), 1.0);
}

}  // namespace
}  // namespace athena

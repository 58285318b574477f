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

// athena: perplexity-guided tuning of read error correction.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "athena/athena.hpp"

namespace fs = std::filesystem;
using namespace athena;

namespace {

struct LmFlags {
  std::string kind = "ngram";
  std::size_t word_len = segmenter::kDefaultWordLength;
  std::size_t history_len = ngram::kDefaultHistory;
  std::string smoothing = "witten_bell";
  double floor = ngram::kDefaultFloor;
  charrnn::TrainConfig rnn;
};

struct CorrectorFlags {
  std::uint32_t solid_threshold = 3;
  std::size_t max_edits = 2;
  std::string adapter;
};

void add_lm_flags(CLI::App* app, LmFlags& f) {
  app->add_option("--lm", f.kind, "Language model: ngram or charrnn")
      ->check(CLI::IsMember({"ngram", "charrnn"}))
      ->capture_default_str();
  app->add_option("--word-len", f.word_len, "n-gram word length L_s")->capture_default_str();
  app->add_option("--history", f.history_len, "n-gram history length h")->capture_default_str();
  app->add_option("--smoothing", f.smoothing, "witten_bell or maximum_likelihood")
      ->check(CLI::IsMember({"witten_bell", "maximum_likelihood"}))
      ->capture_default_str();
  app->add_option("--floor", f.floor, "Probability floor")->capture_default_str();
  app->add_option("--layers", f.rnn.layers, "RNN layers")->capture_default_str();
  app->add_option("--hidden", f.rnn.hidden, "RNN hidden units")->capture_default_str();
  app->add_option("--minibatch", f.rnn.minibatch, "RNN minibatch size")->capture_default_str();
  app->add_option("--lr", f.rnn.learning_rate, "RNN learning rate")->capture_default_str();
  app->add_option("--unroll", f.rnn.unroll_len, "RNN truncated BPTT length")->capture_default_str();
  app->add_option("--epochs", f.rnn.epochs, "RNN epochs")->capture_default_str();
  app->add_option("--train-fraction", f.rnn.train_fraction)->capture_default_str();
  app->add_option("--validation-fraction", f.rnn.validation_fraction)->capture_default_str();
  app->add_option("--test-fraction", f.rnn.test_fraction)->capture_default_str();
  app->add_option("--clip", f.rnn.clip_norm, "RNN gradient norm clip")->capture_default_str();
  app->add_option("--rnn-seed", f.rnn.seed, "RNN initialization and shuffling seed")->capture_default_str();
}

void add_corrector_flags(CLI::App* app, CorrectorFlags& f) {
  app->add_option("--solid-threshold,-M", f.solid_threshold, "Built-in corrector solidity threshold M")
      ->capture_default_str();
  app->add_option("--max-edits", f.max_edits, "Built-in corrector edits per read")->capture_default_str();
  app->add_option("--adapter", f.adapter, "External tool adapter (JSON) instead of the built-in corrector");
}

tuner::LmOptions lm_options(const LmFlags& f) {
  tuner::LmOptions o;
  o.kind = tuner::parse_lm_kind(f.kind);
  o.word_len = f.word_len;
  o.history_len = f.history_len;
  o.smoothing = {f.smoothing == "witten_bell" ? ngram::Smoothing::kWittenBell : ngram::Smoothing::kMaximumLikelihood,
                 f.floor};
  o.rnn = f.rnn;
  return o;
}

ecsim::ToolAdapter load_adapter(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("input not found: " + path);
  try {
    return ecsim::ToolAdapter::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("invalid adapter file " + path + ": " + e.what());
  }
}

tuner::Corrector make_corrector(const CorrectorFlags& f) {
  if (!f.adapter.empty()) {
    auto adapter = std::make_shared<ecsim::ToolAdapter>(load_adapter(f.adapter));
    return [adapter](const seqio::ReadSet& reads, long v) { return ecsim::run_external(*adapter, v, reads); };
  }
  const CorrectorFlags copy = f;
  return [copy](const seqio::ReadSet& reads, long v) {
    if (v < 1) throw ArgumentError("k must be at least 1");
    return ecsim::kspectrum_correct(reads, {static_cast<std::size_t>(v), copy.solid_threshold, copy.max_edits});
  };
}

/// Either model kind, detected from the file magic.
struct LoadedModel {
  std::optional<ngram::NgramModel> ngram;
  std::optional<charrnn::RnnLm> rnn;
};

LoadedModel load_any_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("input not found: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.seekg(0);
  LoadedModel m;
  if (std::string_view(magic, 4) == ngram::kModelMagic) {
    m.ngram = ngram::load_model(in);
  } else if (std::string_view(magic, 4) == charrnn::kModelMagic) {
    m.rnn = charrnn::load_model(in);
  } else {
    throw ModelFormatError("unrecognized model file: " + path);
  }
  return m;
}

tuner::Scorer scorer_of(const LoadedModel& m, std::uint64_t seed) {
  if (m.ngram) {
    auto model = std::make_shared<ngram::NgramModel>(*m.ngram);
    return [model](const seqio::ReadSet& r) { return ngram::perplexity_of_reads(*model, r); };
  }
  auto model = std::make_shared<charrnn::RnnLm>(*m.rnn);
  return [model, seed](const seqio::ReadSet& r) {
    return charrnn::perplexity_rnn(*model, r, std::max<std::size_t>(1, r.size()), seed);
  };
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perplexity-guided tuning of sequencing-read error correction"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; flags override it");
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "Worker threads (outputs do not depend on it)")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train a language model on reads");
  std::string train_reads, model_out;
  LmFlags train_lm;
  train->add_option("--reads", train_reads, "FASTQ/FASTA reads (.gz ok)")->required();
  train->add_option("--model-out,-o", model_out, "Model file to write")->required();
  add_lm_flags(train, train_lm);

  // perplexity
  auto* ppl = app.add_subcommand("perplexity", "Score reads with a trained model");
  std::string ppl_model, ppl_reads, ppl_out;
  std::size_t ppl_sample = 0;
  std::uint64_t ppl_seed = 1;
  ppl->add_option("--model", ppl_model)->required();
  ppl->add_option("--reads", ppl_reads)->required();
  ppl->add_option("--sample-n", ppl_sample, "Reads sampled for scoring, 0 for all")->capture_default_str();
  ppl->add_option("--seed", ppl_seed)->capture_default_str();
  ppl->add_option("--out", ppl_out, "JSON report path (default stdout)");

  // inject
  auto* inject = app.add_subcommand("inject", "Inject synthetic errors into reads");
  std::string inj_reads, inj_out, inj_ledger, inj_clean_out, inj_kind = "substitution", inj_regime = "low";
  std::uint64_t inj_seed = 1, sim_seed = 1;
  std::size_t genome_len = 0, sim_reads = 0, read_len = 50;
  inject->add_option("--reads", inj_reads, "Clean reads to corrupt");
  inject->add_option("--genome-length", genome_len, "Simulate a random genome of this length instead of --reads");
  inject->add_option("--num-reads", sim_reads, "Reads sampled from the simulated genome");
  inject->add_option("--read-length", read_len, "Simulated read length")->capture_default_str();
  inject->add_option("--sim-seed", sim_seed, "Genome and read sampling seed")->capture_default_str();
  inject->add_option("--clean-out", inj_clean_out, "Write the simulated clean reads here");
  inject->add_option("--kind", inj_kind)
      ->check(CLI::IsMember({"deletion", "insertion", "substitution", "mixture"}))
      ->capture_default_str();
  inject->add_option("--regime", inj_regime)->check(CLI::IsMember({"low", "high"}))->capture_default_str();
  inject->add_option("--seed", inj_seed)->capture_default_str();
  inject->add_option("--out,-o", inj_out, "Corrupted FASTQ")->required();
  inject->add_option("--ledger", inj_ledger, "Error ledger TSV")->required();

  // correct
  auto* correct = app.add_subcommand("correct", "Correct reads at one parameter value");
  std::string cor_reads, cor_out;
  long cor_value = 17;
  CorrectorFlags cor_flags;
  correct->add_option("--reads", cor_reads)->required();
  correct->add_option("--out,-o", cor_out)->required();
  correct->add_option("--k,--value", cor_value, "k (or the adapter's tunable value)")->capture_default_str();
  add_corrector_flags(correct, cor_flags);

  // tune
  auto* tune = app.add_subcommand("tune", "Hill-climb the corrector parameter by perplexity");
  std::string tune_reads, tune_dir;
  LmFlags tune_lm;
  CorrectorFlags tune_cor;
  std::optional<long> tune_lower, tune_upper;
  long tune_step = 2;
  std::vector<long> tune_initials;
  std::size_t tune_iter = 50, tune_sample = 10000;
  std::uint64_t tune_seed = 1;
  tune->add_option("--reads", tune_reads)->required();
  tune->add_option("--out-dir", tune_dir)->required();
  add_lm_flags(tune, tune_lm);
  add_corrector_flags(tune, tune_cor);
  tune->add_option("--lower", tune_lower, "Range lower bound (default 1)");
  tune->add_option("--upper", tune_upper, "Range upper bound (default the corrector's legal maximum)");
  tune->add_option("--step", tune_step)->capture_default_str();
  tune->add_option("--initial", tune_initials, "Starting values (default the range midpoint)")->delimiter(',');
  tune->add_option("--iter-max", tune_iter)->capture_default_str();
  tune->add_option("--sample-n", tune_sample, "Reads in the search sample, 0 for all")->capture_default_str();
  tune->add_option("--seed", tune_seed, "Sampling seed")->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Correct at every value and score each result");
  std::string sw_reads, sw_ngram, sw_rnn, sw_truth, sw_quality, sw_out, sw_json;
  std::vector<long> sw_values;
  long sw_lower = 0, sw_upper = 0, sw_step = 2;
  std::size_t sw_sample = 0;
  std::uint64_t sw_seed = 1;
  CorrectorFlags sw_cor;
  sweep->add_option("--reads", sw_reads)->required();
  sweep->add_option("--values", sw_values, "Parameter values")->delimiter(',');
  sweep->add_option("--lower", sw_lower, "Range form: lower bound");
  sweep->add_option("--upper", sw_upper, "Range form: upper bound");
  sweep->add_option("--step", sw_step)->capture_default_str();
  sweep->add_option("--ngram-model", sw_ngram);
  sweep->add_option("--rnn-model", sw_rnn);
  sweep->add_option("--truth", sw_truth, "Error-free reads; adds the gain column");
  sweep->add_option("--external-quality", sw_quality, "TSV of value<TAB>quality");
  sweep->add_option("--sample-n", sw_sample, "RNN scoring sample, 0 for all")->capture_default_str();
  sweep->add_option("--seed", sw_seed)->capture_default_str();
  sweep->add_option("--out,-o", sw_out, "TSV report path (default stdout)");
  sweep->add_option("--json", sw_json, "Also write the report as JSON");
  add_corrector_flags(sweep, sw_cor);

  // eval
  auto* eval = app.add_subcommand("eval", "Per-base correction gain against truth");
  std::string ev_original, ev_corrected, ev_truth, ev_out;
  eval->add_option("--original", ev_original)->required();
  eval->add_option("--corrected", ev_corrected)->required();
  eval->add_option("--truth", ev_truth)->required();
  eval->add_option("--out", ev_out, "JSON report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // Writes the resolved configuration (defaults, file, flags) next to an output.
  auto record_config = [&](const fs::path& path) {
    ensure_parent(path);
    std::ofstream out(path);
    out << "threads=" << threads << "\n";
    for (const auto* sub : app.get_subcommands()) {
      out << "[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
    }
  };

  try {
    parallel::set_threads(threads);

    if (*train) {
      ensure_parent(model_out);
      const auto reads = seqio::read_file(train_reads);
      const auto opts = lm_options(train_lm);
      nlohmann::json stats = {{"reads", reads.size()}, {"lm", train_lm.kind}};
      std::ofstream out(model_out, std::ios::binary);
      if (opts.kind == tuner::LmKind::kNgram) {
        if (auto warning = segmenter::check_word_length(opts.word_len)) std::cerr << "warning: " << *warning << "\n";
        const auto corpus = segmenter::segment_corpus(reads, opts.word_len);
        const auto model = ngram::train(corpus, opts.history_len, opts.smoothing);
        ngram::save_model(model, out);
        stats["words"] = corpus.word_count();
        stats["skipped_words"] = corpus.skipped_words();
        stats["short_reads"] = corpus.short_reads;
        stats["vocab_size"] = model.vocab_size();
        std::cerr << "trained n-gram model: " << reads.size() << " reads, " << corpus.word_count() << " words, "
                  << model.vocab_size() << " word types\n";
      } else {
        const auto result = charrnn::train_rnn_detailed(reads, opts.rnn);
        charrnn::save_model(result.model, out);
        stats["train_reads"] = result.split.train.size();
        stats["best_epoch"] = result.best_epoch;
        stats["validation_loss"] = result.validation_loss;
        stats["vocab_size"] = charrnn::kVocab;
        std::cerr << "trained char-RNN: " << reads.size() << " reads, best epoch " << result.best_epoch << "\n";
      }
      if (!out) throw Error("cannot write " + model_out);
      record_config(model_out + ".config.toml");
      std::cout << json_text(stats);
    } else if (*ppl) {
      const auto model = load_any_model(ppl_model);
      const auto reads = seqio::read_file(ppl_reads);
      const auto sample = ppl_sample == 0 ? reads : seqio::sample_reads(reads, ppl_sample, ppl_seed);
      const auto report = scorer_of(model, ppl_seed)(sample);
      write_text(ppl_out, json_text(to_json(report)));
      if (!ppl_out.empty()) record_config(ppl_out + ".config.toml");
      std::cerr << "perplexity " << report.avg_perplexity << " over " << report.scored_words << " tokens\n";
    } else if (*inject) {
      seqio::ReadSet clean;
      if (genome_len > 0) {
        const auto genome = injector::generate_genome(genome_len, sim_seed);
        clean = injector::sample_clean_reads(genome, sim_reads, read_len, splitmix64_mix(sim_seed));
        if (!inj_clean_out.empty()) {
          ensure_parent(inj_clean_out);
          seqio::write_fastq_file(clean, inj_clean_out);
        }
      } else if (!inj_reads.empty()) {
        clean = seqio::read_file(inj_reads);
      } else {
        throw ArgumentError("inject needs --reads or --genome-length");
      }
      const injector::InjectionSpec spec{injector::parse_kind(inj_kind), injector::parse_regime(inj_regime), inj_seed};
      const auto [corrupted, ledger] = injector::inject_readset(clean, spec);
      ensure_parent(inj_out);
      ensure_parent(inj_ledger);
      seqio::write_fastq_file(corrupted, inj_out);
      std::ofstream lo(inj_ledger);
      injector::write_ledger(ledger, lo);
      record_config(inj_out + ".config.toml");
      std::cerr << "injected " << ledger.size() << " base changes into " << corrupted.size() << " reads\n";
    } else if (*correct) {
      const auto reads = seqio::read_file(cor_reads);
      const auto corrected = make_corrector(cor_flags)(reads, cor_value);
      ensure_parent(cor_out);
      seqio::write_fastq_file(corrected, cor_out);
      record_config(cor_out + ".config.toml");
      std::cerr << "corrected " << corrected.size() << " reads at " << cor_value << "\n";
    } else if (*tune) {
      const auto reads = seqio::read_file(tune_reads);
      if (reads.empty()) throw ArgumentError("dataset is empty");
      tuner::SearchSpace space;
      space.lower = tune_lower.value_or(1);
      if (tune_upper) {
        space.upper = *tune_upper;
      } else {
        std::size_t shortest = reads[0].sequence.size();
        for (const auto& r : reads.reads) shortest = std::min(shortest, r.sequence.size());
        space.upper = static_cast<long>(tune_cor.adapter.empty() ? std::min(shortest, ecsim::kMaxK) : shortest);
      }
      space.step = tune_step;
      space.initials = tune_initials;
      space.iter_max = tune_iter;
      const auto result =
          tuner::tune(reads, lm_options(tune_lm), make_corrector(tune_cor), space, tune_sample, tune_seed);
      fs::create_directories(tune_dir);
      seqio::write_fastq_file(result.corrected, fs::path(tune_dir) / "corrected.fastq");
      write_text((fs::path(tune_dir) / "search.json").string(), json_text(tuner::to_json(result, space)));
      record_config(fs::path(tune_dir) / "config.toml");
      std::cout << result.best_value << "\n";
      std::cerr << "best value " << result.best_value << " after " << result.computations << " evaluations\n";
    } else if (*sweep) {
      const auto reads = seqio::read_file(sw_reads);
      metrics::SweepInputs in;
      in.values = sw_values;
      if (in.values.empty()) {
        if (sw_step < 1 || sw_lower > sw_upper || sw_lower < 1) throw ArgumentError("sweep needs --values or a valid --lower/--upper");
        for (long v = sw_lower; v <= sw_upper; v += sw_step) in.values.push_back(v);
      }
      if (sw_ngram.empty() && sw_rnn.empty()) throw ArgumentError("sweep needs --ngram-model or --rnn-model");
      if (!sw_ngram.empty()) {
        const auto m = load_any_model(sw_ngram);
        if (!m.ngram) throw ArgumentError(sw_ngram + " is not an n-gram model");
        in.ngram = scorer_of(m, sw_seed);
      }
      if (!sw_rnn.empty()) {
        const auto m = load_any_model(sw_rnn);
        if (!m.rnn) throw ArgumentError(sw_rnn + " is not a char-RNN model");
        auto full = scorer_of(m, sw_seed);
        const std::size_t n = sw_sample;
        const std::uint64_t seed = sw_seed;
        in.rnn = [full, n, seed](const seqio::ReadSet& r) {
          return full(n == 0 ? r : seqio::sample_reads(r, n, seed));
        };
      }
      std::optional<seqio::ReadSet> truth;
      if (!sw_truth.empty()) {
        truth = seqio::read_file(sw_truth);
        in.truth = &*truth;
      }
      if (!sw_quality.empty()) {
        std::ifstream q(sw_quality);
        if (!q) throw InputError("input not found: " + sw_quality);
        long v;
        double quality;
        while (q >> v >> quality) in.external_quality[v] = quality;
      }
      in.corrector = make_corrector(sw_cor);
      const auto report = metrics::sweep(reads, in);
      std::ostringstream tsv;
      metrics::write_tsv(report, tsv);
      write_text(sw_out, tsv.str());
      if (!sw_json.empty()) write_text(sw_json, json_text(metrics::to_json(report)));
      if (!sw_out.empty()) record_config(sw_out + ".config.toml");
      for (const auto& [pair, r] : report.correlations) std::cerr << "pearson " << pair << " = " << r << "\n";
    } else if (*eval) {
      const auto g = ecsim::ec_gain_breakdown(seqio::read_file(ev_original), seqio::read_file(ev_corrected),
                                              seqio::read_file(ev_truth));
      const nlohmann::json j = {{"gain", g.gain},
                                {"true_positives", g.true_positives},
                                {"false_positives", g.false_positives},
                                {"errors", g.errors}};
      write_text(ev_out, json_text(j));
      if (!ev_out.empty()) record_config(ev_out + ".config.toml");
      std::cerr << "gain " << g.gain << "\n";
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const AdapterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.stderr_text().empty()) std::cerr << e.stderr_text();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

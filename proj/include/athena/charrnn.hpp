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

// Character-level recurrent language model over {A,C,G,T}.
//
// Each layer l applies the vanilla recurrence
//
//   s_t^l = tanh(U_l x_t^l + W_l s_{t-1}^l + b_l)
//
// where x_t^0 is the one-hot input character (all-zero for 'N') and
// x_t^l = s_t^{l-1} above the first layer. The top state feeds
// softmax(V s_t + c), the distribution of the character at t+1.
//
// Training is truncated backpropagation through time with plain SGD and
// global-norm gradient clipping. A minibatch is cut into fixed-size shards
// whose gradients are summed in shard order, so any thread count yields the
// same weights bit for bit.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "athena/binary_io.hpp"
#include "athena/errors.hpp"
#include "athena/parallel.hpp"
#include "athena/perplexity_report.hpp"
#include "athena/rng.hpp"
#include "athena/seqio.hpp"

namespace athena::charrnn {

inline constexpr std::size_t kVocab = 4;

using Matrix = Eigen::MatrixXd;
/// Per-position symbol codes: 0..3 for ACGT, -1 for N.
using Symbols = std::vector<std::int8_t>;

inline Symbols encode(std::string_view seq) {
  Symbols out(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    switch (seq[i]) {
      case 'A': out[i] = 0; break;
      case 'C': out[i] = 1; break;
      case 'G': out[i] = 2; break;
      case 'T': out[i] = 3; break;
      case 'N': out[i] = -1; break;
      default:
        throw InputError(std::string("character outside {A,C,G,T,N}: '") + seq[i] + "'");
    }
  }
  return out;
}

/// Weights stored as one tensor list in a fixed order:
/// per layer (U, W, b), then V and c. Biases are single-column matrices.
class RnnLm {
 public:
  RnnLm() = default;

  /// All-zero weights.
  RnnLm(std::size_t layers, std::size_t hidden) : layers_(layers), hidden_(hidden) {
    if (layers == 0 || hidden == 0) throw ArgumentError("layers and hidden must be positive");
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = l == 0 ? kVocab : hidden;
      tensors_.push_back(Matrix::Zero(hidden, in));
      tensors_.push_back(Matrix::Zero(hidden, hidden));
      tensors_.push_back(Matrix::Zero(hidden, 1));
    }
    tensors_.push_back(Matrix::Zero(kVocab, hidden));
    tensors_.push_back(Matrix::Zero(kVocab, 1));
  }

  /// Weights uniform in [-sqrt(1/fan_in), sqrt(1/fan_in)], biases zero.
  static RnnLm initialized(std::size_t layers, std::size_t hidden, std::uint64_t seed) {
    RnnLm m(layers, hidden);
    Rng rng(seed);
    for (std::size_t i = 0; i < m.tensors_.size(); ++i) {
      Matrix& t = m.tensors_[i];
      if (t.cols() == 1) continue;
      const double r = std::sqrt(1.0 / static_cast<double>(t.cols()));
      for (Eigen::Index row = 0; row < t.rows(); ++row) {
        for (Eigen::Index col = 0; col < t.cols(); ++col) t(row, col) = (2.0 * rng.uniform01() - 1.0) * r;
      }
    }
    return m;
  }

  std::size_t layers() const { return layers_; }
  std::size_t hidden() const { return hidden_; }

  Matrix& U(std::size_t l) { return tensors_[3 * l]; }
  Matrix& W(std::size_t l) { return tensors_[3 * l + 1]; }
  Matrix& b(std::size_t l) { return tensors_[3 * l + 2]; }
  Matrix& V() { return tensors_[3 * layers_]; }
  Matrix& c() { return tensors_[3 * layers_ + 1]; }
  const Matrix& U(std::size_t l) const { return tensors_[3 * l]; }
  const Matrix& W(std::size_t l) const { return tensors_[3 * l + 1]; }
  const Matrix& b(std::size_t l) const { return tensors_[3 * l + 2]; }
  const Matrix& V() const { return tensors_[3 * layers_]; }
  const Matrix& c() const { return tensors_[3 * layers_ + 1]; }

  std::vector<Matrix>& tensors() { return tensors_; }
  const std::vector<Matrix>& tensors() const { return tensors_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += static_cast<std::size_t>(t.size());
    return n;
  }

  friend bool operator==(const RnnLm& a, const RnnLm& b) {
    if (a.layers_ != b.layers_ || a.hidden_ != b.hidden_) return false;
    for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
      if (a.tensors_[i] != b.tensors_[i]) return false;
    }
    return true;
  }

 private:
  std::size_t layers_ = 0;
  std::size_t hidden_ = 0;
  std::vector<Matrix> tensors_;
};

using Gradients = std::vector<Matrix>;

inline Gradients zero_gradients(const RnnLm& model) {
  Gradients g;
  for (const auto& t : model.tensors()) g.push_back(Matrix::Zero(t.rows(), t.cols()));
  return g;
}

namespace detail {

inline void softmax_columns(Matrix& logits) {
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    auto col = logits.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

struct WindowLoss {
  long double neg_log_prob = 0.0L;
  std::size_t targets = 0;
  std::size_t skipped = 0;
};

/// Runs steps [t0, t1) of a batch of sequences (one column each), predicting
/// the symbol at t+1 from the symbol at t. `state` holds the per-layer hidden
/// states entering the window and is advanced to the states leaving it.
/// When grads is non-null, the summed loss gradients of the window are
/// added to it; the entering state is treated as a constant.
inline WindowLoss run_window(const RnnLm& m, const std::vector<const Symbols*>& batch,
                             std::size_t t0, std::size_t t1, std::vector<Matrix>& state,
                             Gradients* grads) {
  const std::size_t L = m.layers();
  const auto B = static_cast<Eigen::Index>(batch.size());
  const std::size_t T = t1 - t0;
  WindowLoss loss;
  if (T == 0) return loss;

  std::vector<Matrix> inputs(T, Matrix::Zero(kVocab, B));
  std::vector<std::vector<int>> targets(T, std::vector<int>(batch.size(), -1));
  std::vector<std::vector<Matrix>> hs(L, std::vector<Matrix>(T));
  std::vector<Matrix> probs(T);

  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t t = t0 + k;
    for (Eigen::Index j = 0; j < B; ++j) {
      const Symbols& s = *batch[static_cast<std::size_t>(j)];
      if (t < s.size() && s[t] >= 0) inputs[k](s[t], j) = 1.0;
      if (t + 1 < s.size()) {
        if (s[t + 1] >= 0) {
          targets[k][static_cast<std::size_t>(j)] = s[t + 1];
        } else {
          ++loss.skipped;
        }
      }
    }
    for (std::size_t l = 0; l < L; ++l) {
      const Matrix& in = l == 0 ? inputs[k] : hs[l - 1][k];
      const Matrix& prev = k == 0 ? state[l] : hs[l][k - 1];
      Matrix pre = m.U(l) * in + m.W(l) * prev;
      pre.colwise() += m.b(l).col(0);
      hs[l][k] = pre.array().tanh().matrix();
    }
    Matrix logits = m.V() * hs[L - 1][k];
    logits.colwise() += m.c().col(0);
    softmax_columns(logits);
    probs[k] = std::move(logits);
    for (Eigen::Index j = 0; j < B; ++j) {
      const int y = targets[k][static_cast<std::size_t>(j)];
      if (y < 0) continue;
      loss.neg_log_prob -= std::log(probs[k](y, j));
      ++loss.targets;
    }
  }

  if (grads != nullptr) {
    Gradients& g = *grads;
    std::vector<Matrix> carry(L, Matrix::Zero(static_cast<Eigen::Index>(m.hidden()), B));
    for (std::size_t k = T; k-- > 0;) {
      Matrix dlogits = probs[k];
      for (Eigen::Index j = 0; j < B; ++j) {
        const int y = targets[k][static_cast<std::size_t>(j)];
        if (y < 0) {
          dlogits.col(j).setZero();
        } else {
          dlogits(y, j) -= 1.0;
        }
      }
      g[3 * L].noalias() += dlogits * hs[L - 1][k].transpose();
      g[3 * L + 1] += dlogits.rowwise().sum();
      Matrix d_above = m.V().transpose() * dlogits;
      for (std::size_t l = L; l-- > 0;) {
        const Matrix dh = d_above + carry[l];
        const Matrix da = (dh.array() * (1.0 - hs[l][k].array().square())).matrix();
        const Matrix& in = l == 0 ? inputs[k] : hs[l - 1][k];
        const Matrix& prev = k == 0 ? state[l] : hs[l][k - 1];
        g[3 * l].noalias() += da * in.transpose();
        g[3 * l + 1].noalias() += da * prev.transpose();
        g[3 * l + 2] += da.rowwise().sum();
        carry[l].noalias() = m.W(l).transpose() * da;
        if (l > 0) d_above.noalias() = m.U(l).transpose() * da;
      }
    }
  }

  for (std::size_t l = 0; l < L; ++l) state[l] = hs[l][T - 1];
  return loss;
}

inline std::vector<Matrix> zero_state(const RnnLm& m, std::size_t columns) {
  return std::vector<Matrix>(
      m.layers(), Matrix::Zero(static_cast<Eigen::Index>(m.hidden()), static_cast<Eigen::Index>(columns)));
}

inline constexpr std::size_t kShardSize = 16;
inline constexpr std::size_t kReadsPerTask = 256;

}  // namespace detail

/// Per-position next-character distributions: entry t is P(char at t+1).
/// Initial state is zero.
inline std::vector<std::array<double, kVocab>> forward(const RnnLm& model, std::string_view sequence) {
  const Symbols symbols = encode(sequence);
  for (auto s : symbols) {
    if (s < 0) throw InputError("forward input must be over {A,C,G,T}");
  }
  std::vector<std::array<double, kVocab>> out;
  out.reserve(symbols.size());
  auto state = detail::zero_state(model, 1);
  Matrix x = Matrix::Zero(kVocab, 1);
  for (auto s : symbols) {
    x.setZero();
    x(s, 0) = 1.0;
    for (std::size_t l = 0; l < model.layers(); ++l) {
      const Matrix& in = l == 0 ? x : state[l - 1];
      Matrix pre = model.U(l) * in + model.W(l) * state[l] + model.b(l);
      state[l] = pre.array().tanh().matrix();
    }
    Matrix logits = model.V() * state.back() + model.c();
    detail::softmax_columns(logits);
    std::array<double, kVocab> p{};
    for (std::size_t v = 0; v < kVocab; ++v) p[v] = logits(static_cast<Eigen::Index>(v), 0);
    out.push_back(p);
  }
  return out;
}

/// Summed -ln P over the predictable characters of one sequence.
inline detail::WindowLoss sequence_loss(const RnnLm& model, const Symbols& symbols) {
  std::vector<const Symbols*> batch{&symbols};
  auto state = detail::zero_state(model, 1);
  return detail::run_window(model, batch, 0, symbols.size(), state, nullptr);
}

/// Mean cross-entropy (nats per predicted character) over a set of encoded
/// sequences; NaN when nothing is predictable.
inline double mean_loss(const RnnLm& model, const std::vector<Symbols>& seqs) {
  const std::size_t tasks = parallel::chunk_count(seqs.size(), detail::kReadsPerTask);
  std::vector<long double> sums(seqs.size(), 0.0L);
  std::vector<std::size_t> counts(seqs.size(), 0);
  parallel::for_each_task(tasks, [&](std::size_t t) {
    const std::size_t lo = t * detail::kReadsPerTask;
    const std::size_t hi = std::min(seqs.size(), lo + detail::kReadsPerTask);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto r = sequence_loss(model, seqs[i]);
      sums[i] = r.neg_log_prob;
      counts[i] = r.targets;
    }
  });
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(parallel::pairwise_sum(sums) / static_cast<long double>(total));
}

struct TrainConfig {
  std::size_t layers = 2;
  std::size_t hidden = 32;
  std::size_t minibatch = 200;
  double learning_rate = 2e-3;
  std::size_t unroll_len = 50;
  std::size_t epochs = 10;
  double train_fraction = 0.90;
  double validation_fraction = 0.05;
  double test_fraction = 0.05;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (layers == 0 || hidden == 0 || minibatch == 0 || unroll_len == 0 || epochs == 0) {
      throw ArgumentError("rnn config counts must be positive");
    }
    if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
    if (train_fraction <= 0.0 || validation_fraction < 0.0 || test_fraction < 0.0 ||
        std::abs(train_fraction + validation_fraction + test_fraction - 1.0) > 1e-9) {
      throw ArgumentError("split fractions must be non-negative and sum to 1");
    }
  }
};

struct Split {
  seqio::ReadSet train;
  seqio::ReadSet validation;
  seqio::ReadSet test;
};

/// Shuffles read indices with the seed and cuts them by the configured
/// fractions. Each part keeps ingest order.
inline Split split_reads(const seqio::ReadSet& reads, const TrainConfig& cfg) {
  std::vector<std::size_t> order(reads.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::for_stream(cfg.seed, 0x5B1);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n = static_cast<double>(reads.size());
  const auto n_train = static_cast<std::size_t>(std::floor(n * cfg.train_fraction));
  const auto n_val = static_cast<std::size_t>(std::floor(n * cfg.validation_fraction));
  auto take = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                 order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(idx.begin(), idx.end());
    seqio::ReadSet part{{}, reads.source};
    for (auto i : idx) part.reads.push_back(reads[i]);
    return part;
  };
  return {take(0, n_train), take(n_train, std::min(order.size(), n_train + n_val)),
          take(std::min(order.size(), n_train + n_val), order.size())};
}

struct TrainResult {
  RnnLm model;
  /// Mean training cross-entropy observed while streaming each epoch.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t best_epoch = 0;
  Split split;
};

inline double gradient_norm(const Gradients& g) {
  double s = 0.0;
  for (const auto& t : g) s += t.squaredNorm();
  return std::sqrt(s);
}

/// Trains from the configured seed and returns the weights with the best
/// validation loss (training loss when the validation split is empty).
inline TrainResult train_rnn_detailed(const seqio::ReadSet& corpus, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult result;
  result.split = split_reads(corpus, cfg);
  if (result.split.train.size() < cfg.minibatch) {
    throw TrainingError("corpus too small to fill one minibatch (" +
                        std::to_string(result.split.train.size()) + " training reads, minibatch " +
                        std::to_string(cfg.minibatch) + ")");
  }
  std::vector<Symbols> train, validation;
  for (const auto& r : result.split.train) train.push_back(encode(r.sequence));
  for (const auto& r : result.split.validation) validation.push_back(encode(r.sequence));

  RnnLm model = RnnLm::initialized(cfg.layers, cfg.hidden, cfg.seed);
  RnnLm best = model;
  double best_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = Rng::for_stream(cfg.seed, epoch + 1);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<double> step_losses;
    std::size_t epoch_targets = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      const std::size_t stop = std::min(order.size(), start + cfg.minibatch);
      std::size_t max_len = 0;
      std::vector<std::vector<const Symbols*>> shards;
      for (std::size_t i = start; i < stop; ++i) {
        if ((i - start) % detail::kShardSize == 0) shards.emplace_back();
        shards.back().push_back(&train[order[i]]);
        max_len = std::max(max_len, train[order[i]].size());
      }
      std::vector<std::vector<Matrix>> states;
      for (const auto& shard : shards) states.push_back(detail::zero_state(model, shard.size()));

      for (std::size_t t0 = 0; t0 + 1 < max_len; t0 += cfg.unroll_len) {
        const std::size_t t1 = std::min(max_len - 1, t0 + cfg.unroll_len);
        std::vector<Gradients> shard_grads(shards.size());
        std::vector<detail::WindowLoss> shard_loss(shards.size());
        parallel::for_each_task(shards.size(), [&](std::size_t s) {
          shard_grads[s] = zero_gradients(model);
          shard_loss[s] = detail::run_window(model, shards[s], t0, t1, states[s], &shard_grads[s]);
        });
        Gradients grads = std::move(shard_grads[0]);
        long double loss = shard_loss[0].neg_log_prob;
        std::size_t targets = shard_loss[0].targets;
        for (std::size_t s = 1; s < shards.size(); ++s) {
          for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += shard_grads[s][k];
          loss += shard_loss[s].neg_log_prob;
          targets += shard_loss[s].targets;
        }
        if (targets == 0) continue;
        const double inv = 1.0 / static_cast<double>(targets);
        for (auto& g : grads) g *= inv;
        const double norm = gradient_norm(grads);
        const double scale = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
        for (std::size_t k = 0; k < grads.size(); ++k) {
          model.tensors()[k] -= (cfg.learning_rate * scale) * grads[k];
        }
        step_losses.push_back(static_cast<double>(loss));
        epoch_targets += targets;
      }
    }
    const double train_loss = epoch_targets == 0
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : parallel::pairwise_sum(step_losses) / static_cast<double>(epoch_targets);
    result.train_loss.push_back(train_loss);
    const double val_loss = validation.empty() ? mean_loss(model, train) : mean_loss(model, validation);
    result.validation_loss.push_back(val_loss);
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = model;
      result.best_epoch = epoch;
    }
  }
  result.model = std::move(best);
  return result;
}

inline RnnLm train_rnn(const seqio::ReadSet& corpus, const TrainConfig& cfg) {
  return train_rnn_detailed(corpus, cfg).model;
}

/// exp(mean per-character cross-entropy) over a uniform sample of sample_n
/// reads. Characters following position 0 are predicted; 'N' targets are
/// skipped and tallied.
inline PerplexityReport perplexity_rnn(const RnnLm& model, const seqio::ReadSet& reads,
                                       std::size_t sample_n, std::uint64_t seed) {
  if (sample_n == 0) throw ArgumentError("sample size must be at least 1");
  const seqio::ReadSet sample = seqio::sample_reads(reads, sample_n, seed);
  std::vector<long double> sums(sample.size(), 0.0L);
  std::vector<std::size_t> counts(sample.size(), 0), skipped(sample.size(), 0);
  const std::size_t tasks = parallel::chunk_count(sample.size(), detail::kReadsPerTask);
  parallel::for_each_task(tasks, [&](std::size_t t) {
    const std::size_t lo = t * detail::kReadsPerTask;
    const std::size_t hi = std::min(sample.size(), lo + detail::kReadsPerTask);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto r = sequence_loss(model, encode(sample[i].sequence));
      sums[i] = r.neg_log_prob;
      counts[i] = r.targets;
      skipped[i] = r.skipped;
    }
  });
  return make_report(parallel::pairwise_sum(sums),
                     std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}),
                     std::accumulate(skipped.begin(), skipped.end(), std::uint64_t{0}));
}

/// Largest relative discrepancy between backpropagated gradients of the
/// summed sequence loss and central finite differences, over every
/// parameter. Relative error is |a - n| / max(|a| + |n|, 1e-7).
inline double gradient_check(const RnnLm& model, std::string_view sequence, double epsilon) {
  if (sequence.size() < 2 || sequence.size() > 20) {
    throw ArgumentError("gradient check sequence length must be in [2, 20]");
  }
  if (epsilon < 1e-6 || epsilon > 1e-4) throw ArgumentError("epsilon must be in [1e-6, 1e-4]");
  const Symbols symbols = encode(sequence);
  std::vector<const Symbols*> batch{&symbols};

  Gradients analytic = zero_gradients(model);
  {
    auto state = detail::zero_state(model, 1);
    detail::run_window(model, batch, 0, symbols.size(), state, &analytic);
  }
  RnnLm probe = model;
  auto loss_at = [&] { return static_cast<double>(sequence_loss(probe, symbols).neg_log_prob); };
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.tensors().size(); ++k) {
    Matrix& t = probe.tensors()[k];
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double saved = t(i);
      t(i) = saved + epsilon;
      const double up = loss_at();
      t(i) = saved - epsilon;
      const double down = loss_at();
      t(i) = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[k](i);
      const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-7);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// Model file, little-endian:
//   "ATHR" | u32 version | u32 layers | u32 hidden | u32 vocab
//   | each tensor (U_0, W_0, b_0, ..., V, c) as row-major f64
//   | u32 CRC-32 of all preceding bytes
inline constexpr std::string_view kModelMagic = "ATHR";
inline constexpr std::uint32_t kModelVersion = 1;

inline void save_model(const RnnLm& model, std::ostream& out) {
  binary::Writer w;
  w.bytes(kModelMagic);
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.layers()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.hidden()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kVocab));
  for (const auto& t : model.tensors()) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) w.put<double>(t(r, c));
    }
  }
  w.finish(out);
}

inline RnnLm load_model(std::istream& in) {
  binary::Reader r(in, kModelMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelVersion) throw ModelFormatError("unsupported rnn model version " + std::to_string(version));
  const auto layers = r.get<std::uint32_t>();
  const auto hidden = r.get<std::uint32_t>();
  const auto vocab = r.get<std::uint32_t>();
  if (vocab != kVocab || layers == 0 || hidden == 0 || layers > 64 || hidden > 65536) {
    throw ModelFormatError("invalid rnn architecture header");
  }
  RnnLm model(layers, hidden);
  for (auto& t : model.tensors()) {
    for (Eigen::Index row = 0; row < t.rows(); ++row) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(row, c) = r.get<double>();
    }
  }
  if (!r.at_end()) throw ModelFormatError("trailing bytes in model file");
  return model;
}

}  // namespace athena::charrnn

#include "dglstm/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "dglstm/errors.hpp"
#include "dglstm/grad.hpp"
#include "dglstm/rng.hpp"

namespace dglstm {

void TrainConfig::validate() const {
  spec.validate();
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw UsageError("TrainConfig: lr must be positive and finite");
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm))
    throw UsageError("TrainConfig: clip_norm must be positive and finite");
  if (epochs < 0) throw UsageError("TrainConfig: epochs must be non-negative");
  if (bptt_len < 1) throw UsageError("TrainConfig: bptt_len must be at least 1");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0))
    throw UsageError("TrainConfig: lr_decay must lie in (0, 1]");
  if (decay_patience < 1) throw UsageError("TrainConfig: decay_patience must be at least 1");
  if (eval_every < 0) throw UsageError("TrainConfig: eval_every must be non-negative");
}

double global_norm(const GradientSet& g) {
  double total = 0.0;
  g.for_each_param(
      [&](const std::string&, const Tensor& t) { total += sum_squares(t); });
  return std::sqrt(total);
}

void clip_gradients(GradientSet& g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw UsageError("clip_gradients: clip_norm must be positive");
  const double norm = global_norm(g);
  if (norm <= clip_norm) return;
  const double scale = clip_norm / norm;
  g.for_each_param([&](const std::string&, Tensor& t) {
    for (long k = 0; k < t.size(); ++k) t[k] *= scale;
  });
}

void sgd_step(ModelParams& params, const GradientSet& g, double lr) {
  if (!(lr > 0.0)) throw UsageError("sgd_step: lr must be positive");
  auto p_ptrs = named_tensors(params);
  auto g_ptrs = named_tensors(g);
  if (p_ptrs.size() != g_ptrs.size())
    throw UsageError("sgd_step: parameter and gradient tensor counts differ");
  for (size_t i = 0; i < p_ptrs.size(); ++i) {
    Tensor& p = *p_ptrs[i].second;
    const Tensor& gt = *g_ptrs[i].second;
    if (!p.same_shape(gt)) {
      std::ostringstream os;
      os << "sgd_step: " << p_ptrs[i].first << " " << p.shape_str() << " vs gradient "
         << gt.shape_str();
      throw UsageError(os.str());
    }
    axpy(-lr, gt, p);
  }
}

double evaluate_nll(const ModelParams& params, const NetworkSpec& spec,
                    const Corpus& corpus, int bptt_len) {
  if (bptt_len < 0) throw UsageError("evaluate_nll: bptt_len must be non-negative");
  if (corpus.sequences.empty()) throw UsageError("evaluate_nll: empty corpus");
  double total = 0.0;
  long count = 0;
  for (const auto& seq : corpus.sequences) {
    const long n = static_cast<long>(seq.size()) - 1;
    if (n <= 0) continue;
    auto states = zero_states(params);
    const long chunk = bptt_len == 0 ? n : bptt_len;
    for (long start = 0; start < n; start += chunk) {
      const long len = std::min<long>(chunk, n - start);
      std::vector<int> inputs(seq.begin() + start, seq.begin() + start + len);
      std::vector<int> targets(seq.begin() + start + 1, seq.begin() + start + 1 + len);
      total += sequence_nll_sum(params, spec, inputs, targets, &states);
      count += len;
    }
  }
  if (count == 0) throw UsageError("evaluate_nll: corpus has no predicted tokens");
  return total / count;
}

double evaluate_perplexity(const ModelParams& params, const NetworkSpec& spec,
                           const Corpus& corpus, int bptt_len) {
  return std::exp(evaluate_nll(params, spec, corpus, bptt_len));
}

std::string format_train_report(const TrainReport& report) {
  std::string out;
  char buf[64];
  auto put = [&](const std::string& key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += key;
    out += '=';
    out += buf;
    out += '\n';
  };
  out += "epochs=" + std::to_string(report.epochs.size()) + "\n";
  put("first_train_nll", report.first_train_nll);
  put("final_train_nll", report.final_train_nll);
  put("final_valid_nll", report.final_valid_nll);
  put("final_valid_ppl", report.final_valid_ppl);
  if (report.has_test) {
    put("test_nll", report.test_nll);
    put("test_ppl", report.test_ppl);
  }
  for (const auto& e : report.epochs) {
    const std::string prefix = "epoch" + std::to_string(e.epoch) + ".";
    put(prefix + "train_nll", e.train_nll);
    put(prefix + "valid_nll", e.valid_nll);
    put(prefix + "valid_ppl", e.valid_ppl);
    put(prefix + "lr", e.lr);
    put(prefix + "wall_sec", e.wall_sec);
  }
  return out;
}

std::pair<ModelParams, TrainReport> train(const TrainConfig& config,
                                          const Corpus& train_corpus,
                                          const Corpus& valid_corpus,
                                          const Corpus* test_corpus,
                                          const EpochCallback& on_epoch) {
  config.validate();
  if (train_corpus.sequences.empty()) throw UsageError("train: empty training corpus");
  if (valid_corpus.sequences.empty()) throw UsageError("train: empty validation corpus");

  ModelParams params = init_params(config.spec, config.seed);
  TrainReport report;
  report.first_train_nll = std::numeric_limits<double>::quiet_NaN();
  report.final_train_nll = std::numeric_limits<double>::quiet_NaN();

  double lr = config.lr;
  double best_ppl = std::numeric_limits<double>::infinity();
  int stale = 0;
  long step = 0;
  bool first_seen = false;

  auto consider = [&](double valid_ppl) {
    if (valid_ppl < best_ppl) {
      best_ppl = valid_ppl;
      stale = 0;
    } else if (++stale >= config.decay_patience) {
      lr *= config.lr_decay;
      stale = 0;
    }
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto wall_start = std::chrono::steady_clock::now();
    const double epoch_lr = lr;
    auto batches =
        make_batches(train_corpus, config.bptt_len, mix_seed(config.seed, epoch));
    double nll_sum = 0.0;
    long tokens = 0;
    std::vector<LayerState> states;
    for (auto& batch : batches) {
      ++step;
      if (!batch.continues_previous) states = zero_states(params);
      UnrolledTape tape = forward(params, config.spec, batch.inputs, states);
      const double loss = sequence_loss(tape, batch.targets);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "training diverged at step " << step << " (epoch " << epoch
           << "): loss is not finite";
        throw DivergenceError(os.str());
      }
      if (!first_seen) {
        report.first_train_nll = loss;
        first_seen = true;
      }
      GradientSet grads = backward(params, config.spec, tape, batch.targets);
      clip_gradients(grads, config.clip_norm);
      sgd_step(params, grads, lr);
      states = std::move(tape.final_states);
      nll_sum += loss * static_cast<double>(batch.targets.size());
      tokens += static_cast<long>(batch.targets.size());
      if (config.eval_every > 0 && step % config.eval_every == 0)
        consider(evaluate_perplexity(params, config.spec, valid_corpus));
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = epoch_lr;
    stats.train_nll =
        tokens > 0 ? nll_sum / tokens : std::numeric_limits<double>::quiet_NaN();
    stats.valid_nll = evaluate_nll(params, config.spec, valid_corpus);
    stats.valid_ppl = std::exp(stats.valid_nll);
    stats.wall_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();
    consider(stats.valid_ppl);
    report.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }

  if (!report.epochs.empty()) {
    const EpochStats& last = report.epochs.back();
    report.final_train_nll = last.train_nll;
    report.final_valid_nll = last.valid_nll;
    report.final_valid_ppl = last.valid_ppl;
  } else {
    report.final_valid_nll = evaluate_nll(params, config.spec, valid_corpus);
    report.final_valid_ppl = std::exp(report.final_valid_nll);
  }
  if (test_corpus) {
    report.has_test = true;
    report.test_nll = evaluate_nll(params, config.spec, *test_corpus);
    report.test_ppl = std::exp(report.test_nll);
  }
  return {std::move(params), std::move(report)};
}

}  // namespace dglstm

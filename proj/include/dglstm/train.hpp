#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dglstm/data.hpp"
#include "dglstm/network.hpp"

namespace dglstm {

struct TrainConfig {
  NetworkSpec spec;
  double lr = 1.0;
  double clip_norm = 5.0;
  int epochs = 1;
  int bptt_len = 35;
  double lr_decay = 0.5;    // factor applied when validation stops improving
  int decay_patience = 1;   // evaluations without improvement before decaying
  uint64_t seed = 1;
  int eval_every = 0;       // extra validations every N batches (0 = epoch end only)

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_nll = 0.0;
  double valid_nll = 0.0;
  double valid_ppl = 0.0;
  double lr = 0.0;        // rate the epoch trained with
  double wall_sec = 0.0;  // timing only; excluded from determinism guarantees
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double first_train_nll = 0.0;  // loss of the very first batch, pre-update
  double final_train_nll = 0.0;
  double final_valid_nll = 0.0;
  double final_valid_ppl = 0.0;
  bool has_test = false;
  double test_nll = 0.0;
  double test_ppl = 0.0;
};

double global_norm(const GradientSet& g);
// Rescales all tensors by clip_norm/norm when the global L2 norm exceeds
// clip_norm; direction is preserved.
void clip_gradients(GradientSet& g, double clip_norm);
// theta -= lr * g for every tensor.
void sgd_step(ModelParams& params, const GradientSet& g, double lr);

// Mean per-token negative log-likelihood over the corpus. State is carried
// across chunks of bptt_len steps within a sequence (0 = whole sequences) and
// reset between sequences.
double evaluate_nll(const ModelParams& params, const NetworkSpec& spec,
                    const Corpus& corpus, int bptt_len = 0);
double evaluate_perplexity(const ModelParams& params, const NetworkSpec& spec,
                           const Corpus& corpus, int bptt_len = 0);

// key=value summary, one entry per line: run totals first, then per-epoch
// entries prefixed epochN.
std::string format_train_report(const TrainReport& report);

using EpochCallback = std::function<void(const EpochStats&)>;

// Deterministic SGD training: shuffled chunked BPTT per epoch, global-norm
// clipping, plateau learning-rate decay. Aborts with DivergenceError (naming
// the step) when the loss stops being finite. test_corpus, when given, is
// scored once at the end.
std::pair<ModelParams, TrainReport> train(const TrainConfig& config,
                                          const Corpus& train_corpus,
                                          const Corpus& valid_corpus,
                                          const Corpus* test_corpus = nullptr,
                                          const EpochCallback& on_epoch = nullptr);

}  // namespace dglstm

// Command-line front end: train / eval / gradcheck / sample.
#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dglstm/checkpoint.hpp"
#include "dglstm/data.hpp"
#include "dglstm/errors.hpp"
#include "dglstm/grad.hpp"
#include "dglstm/rng.hpp"
#include "dglstm/sample.hpp"
#include "dglstm/train.hpp"

namespace {

using namespace dglstm;

// Architecture flags shared by train and gradcheck.
struct ModelFlags {
  std::string cell = "dglstm";
  int depth = 2;
  std::string hidden = "32";
  int embed = 16;
  std::string tie_forget = "true";
  std::string peephole = "diag";
  bool untie_first_layer_proj = false;
  std::string first_layer_gate = "true";
  bool interlayer_affine = false;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--cell", f.cell, "cell kind: rnn|gru|lstm|dglstm")
      ->capture_default_str();
  cmd->add_option("--depth", f.depth, "number of stacked layers")->capture_default_str();
  cmd->add_option("--hidden", f.hidden,
                  "hidden width, or comma list with one width per layer")
      ->capture_default_str();
  cmd->add_option("--embed", f.embed, "embedding width")->capture_default_str();
  cmd->add_option("--tie-forget", f.tie_forget, "true|false: forget gate = 1 - input gate")
      ->capture_default_str();
  cmd->add_option("--peephole", f.peephole, "diag|full|none")->capture_default_str();
  cmd->add_flag("--untie-first-layer-proj", f.untie_first_layer_proj,
                "separate matrix for the first layer's gated input path");
  cmd->add_option("--first-layer-gate", f.first_layer_gate,
                  "true|false: gate a projection of the input at layer 0 (dglstm)")
      ->capture_default_str();
  cmd->add_flag("--interlayer-affine", f.interlayer_affine,
                "insert affine maps between layers even when widths match");
}

bool parse_bool_flag(const std::string& v, const char* flag) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError(std::string(flag) + " expects true or false, got '" + v + "'");
}

std::vector<int> parse_hidden(const std::string& v, int depth) {
  std::vector<int> dims;
  std::string part;
  std::istringstream in(v);
  while (std::getline(in, part, ',')) {
    try {
      size_t used = 0;
      dims.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("--hidden expects integers, got '" + part + "'");
    }
  }
  if (dims.size() == 1) dims.assign(static_cast<size_t>(depth > 0 ? depth : 1), dims[0]);
  if (static_cast<int>(dims.size()) != depth)
    throw UsageError("--hidden lists " + std::to_string(dims.size()) +
                     " widths for depth " + std::to_string(depth));
  return dims;
}

NetworkSpec build_spec(const ModelFlags& f, int vocab_size) {
  NetworkSpec spec;
  spec.cell = parse_cell_kind(f.cell);
  spec.depth = f.depth;
  if (f.depth < 1) throw UsageError("--depth must be at least 1");
  spec.hidden_dims = parse_hidden(f.hidden, f.depth);
  spec.embed_dim = f.embed;
  spec.vocab_size = vocab_size;
  spec.tie_forget = parse_bool_flag(f.tie_forget, "--tie-forget");
  spec.peephole = parse_peephole_mode(f.peephole);
  spec.untie_first_proj = f.untie_first_layer_proj;
  spec.first_layer_gate = parse_bool_flag(f.first_layer_gate, "--first-layer-gate");
  spec.interlayer_affine = f.interlayer_affine;
  spec.validate();
  return spec;
}

// Expands a `--config FILE` of plain `key=value` lines (with `#` comments)
// into --key=value tokens placed ahead of the explicit flags, so with the
// take-last option policy the precedence is defaults < file < command line.
std::vector<std::string> with_config_defaults(const CLI::App& app,
                                              std::vector<std::string> args) {
  if (args.empty() || args[0].empty() || args[0][0] == '-') return args;
  const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;

  std::string config_path;
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  };

  std::vector<std::string> merged{args[0]};
  for (const std::string& raw : read_lines(config_path)) {
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config")
      throw UsageError("config: nested config files are not allowed");
    if (sub->get_option_no_throw("--" + key) == nullptr)
      throw UsageError("config: unknown key '" + key + "' for subcommand '" +
                       args[0] + "'");
    merged.push_back("--" + key + "=" + value);
  }
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

std::string default_vocab_path(const std::string& ckpt_path) {
  const std::string suffix = ".ckpt";
  if (ckpt_path.size() > suffix.size() &&
      ckpt_path.compare(ckpt_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return ckpt_path.substr(0, ckpt_path.size() - suffix.size()) + ".vocab";
  return ckpt_path + ".vocab";
}

struct TrainFlags {
  ModelFlags model;
  std::string config;
  std::string train_path, valid_path, test_path, out_prefix = "model";
  std::string level = "char";
  double lr = 1.0, clip = 5.0, lr_decay = 0.5;
  int epochs = 5, bptt = 35, patience = 1, eval_every = 0;
  int min_count = 1, max_vocab = 0;
  uint64_t seed = 1;
};

int run_train(const TrainFlags& f) {
  const Level level = parse_level(f.level);
  auto train_lines = read_lines(f.train_path);
  auto valid_lines = read_lines(f.valid_path);
  Vocabulary vocab = build_vocab(train_lines, level, f.min_count, f.max_vocab);
  Corpus train_corpus = make_corpus(train_lines, vocab, level);
  Corpus valid_corpus = make_corpus(valid_lines, vocab, level);
  std::optional<Corpus> test_corpus;
  if (!f.test_path.empty())
    test_corpus = make_corpus(read_lines(f.test_path), vocab, level);

  TrainConfig config;
  config.spec = build_spec(f.model, vocab.size());
  config.lr = f.lr;
  config.clip_norm = f.clip;
  config.epochs = f.epochs;
  config.bptt_len = f.bptt;
  config.lr_decay = f.lr_decay;
  config.decay_patience = f.patience;
  config.seed = f.seed;
  config.eval_every = f.eval_every;
  config.validate();

  auto [params, report] =
      train(config, train_corpus, valid_corpus,
            test_corpus ? &*test_corpus : nullptr, [](const EpochStats& s) {
              std::printf("epoch=%d train_nll=%.6g valid_ppl=%.6g lr=%.6g\n", s.epoch,
                          s.train_nll, s.valid_ppl, s.lr);
              std::fflush(stdout);
            });

  save_checkpoint(f.out_prefix + ".ckpt", config.spec, level, params);
  save_vocab(f.out_prefix + ".vocab", vocab);
  write_file_atomic(f.out_prefix + ".report", format_train_report(report));
  if (report.has_test) std::printf("test_ppl=%#.6g\n", report.test_ppl);
  return 0;
}

struct EvalFlags {
  std::string config;
  std::string ckpt_path, data_path, vocab_path;
  int bptt = 0;  // 0 = whole sequences
};

int run_eval(const EvalFlags& f) {
  Checkpoint ckpt = load_checkpoint(f.ckpt_path);
  const std::string vocab_path =
      f.vocab_path.empty() ? default_vocab_path(f.ckpt_path) : f.vocab_path;
  Vocabulary vocab = load_vocab(vocab_path);
  if (vocab.size() != ckpt.spec.vocab_size)
    throw UsageError("vocab has " + std::to_string(vocab.size()) +
                     " tokens but the checkpoint was trained with " +
                     std::to_string(ckpt.spec.vocab_size));
  Corpus corpus = make_corpus(read_lines(f.data_path), vocab, ckpt.level);
  const double ppl = evaluate_perplexity(ckpt.params, ckpt.spec, corpus, f.bptt);
  std::printf("ppl=%#.6g\n", ppl);
  return 0;
}

struct GradcheckFlags {
  ModelFlags model;
  std::string config;
  int vocab = 11, seq = 5;
  uint64_t seed = 1;
  double tol = 1e-4, eps = 1e-5;
};

int run_gradcheck(const GradcheckFlags& f) {
  if (f.vocab < 4) throw UsageError("--vocab must be at least 4");
  if (f.seq < 1) throw UsageError("--seq must be at least 1");
  NetworkSpec spec = build_spec(f.model, f.vocab);
  ModelParams params = init_params(spec, f.seed);
  const long n_params = params.param_count();
  if (n_params > 20000)
    throw UsageError("model has " + std::to_string(n_params) +
                     " parameters; the numeric oracle is capped at 20000 — "
                     "use smaller --hidden/--embed/--depth");
  Rng rng(mix_seed(f.seed, 0x6f7261636c65ULL));
  std::vector<int> tokens(f.seq), targets(f.seq);
  for (int& t : tokens) t = rng.uniform_int(f.vocab);
  for (int& t : targets) t = rng.uniform_int(f.vocab);
  GradCheckReport report = grad_check(params, spec, tokens, targets, f.tol, f.eps);
  std::fputs(format_report(report).c_str(), stdout);
  return report.pass ? 0 : 1;
}

struct SampleFlags {
  std::string config;
  std::string ckpt_path, vocab_path;
  int length = 200;
  uint64_t seed = 1;
  double temperature = 1.0;
};

int run_sample(const SampleFlags& f) {
  Checkpoint ckpt = load_checkpoint(f.ckpt_path);
  const std::string vocab_path =
      f.vocab_path.empty() ? default_vocab_path(f.ckpt_path) : f.vocab_path;
  Vocabulary vocab = load_vocab(vocab_path);
  if (vocab.size() != ckpt.spec.vocab_size)
    throw UsageError("vocab has " + std::to_string(vocab.size()) +
                     " tokens but the checkpoint was trained with " +
                     std::to_string(ckpt.spec.vocab_size));
  auto ids = sample_tokens(ckpt.params, ckpt.spec, f.length, f.seed, f.temperature);
  std::string text = render_tokens(vocab, ids, ckpt.level);
  if (text.empty() || text.back() != '\n') text += '\n';
  std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recurrent language models with depth-gated memory cells"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoint files");
  train_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  train_cmd->add_option("--config", tf.config, "key=value defaults; command-line flags win");
  add_model_flags(train_cmd, tf.model);
  train_cmd->add_option("--train", tf.train_path, "training corpus, one sequence per line")
      ->required();
  train_cmd->add_option("--valid", tf.valid_path, "validation corpus")->required();
  train_cmd->add_option("--test", tf.test_path, "optional test corpus scored at the end");
  train_cmd->add_option("--out", tf.out_prefix, "output prefix for .ckpt/.vocab/.report")
      ->capture_default_str();
  train_cmd->add_option("--level", tf.level, "char|word tokenization")->capture_default_str();
  train_cmd->add_option("--lr", tf.lr, "learning rate")->capture_default_str();
  train_cmd->add_option("--clip", tf.clip, "global gradient-norm clip")->capture_default_str();
  train_cmd->add_option("--epochs", tf.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--bptt", tf.bptt, "truncation length for backprop chunks")
      ->capture_default_str();
  train_cmd->add_option("--lr-decay", tf.lr_decay, "factor applied on validation plateau")
      ->capture_default_str();
  train_cmd->add_option("--patience", tf.patience,
                        "evaluations without improvement before decaying")
      ->capture_default_str();
  train_cmd->add_option("--eval-every", tf.eval_every,
                        "extra validations every N batches (0 = epoch end only)")
      ->capture_default_str();
  train_cmd->add_option("--min-count", tf.min_count, "minimum token frequency")
      ->capture_default_str();
  train_cmd->add_option("--max-vocab", tf.max_vocab, "vocabulary cap, 0 = unlimited")
      ->capture_default_str();
  train_cmd->add_option("--seed", tf.seed, "random seed")->capture_default_str();

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "perplexity of a checkpoint on a corpus");
  eval_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  eval_cmd->add_option("--config", ef.config, "key=value defaults; command-line flags win");
  eval_cmd->add_option("--ckpt", ef.ckpt_path, "checkpoint path")->required();
  eval_cmd->add_option("--data", ef.data_path, "corpus to score")->required();
  eval_cmd->add_option("--vocab", ef.vocab_path,
                       "vocab path (default: derived from the checkpoint path)");
  eval_cmd->add_option("--bptt", ef.bptt, "evaluation chunk length, 0 = whole sequences")
      ->capture_default_str();

  GradcheckFlags gf;
  auto* grad_cmd = app.add_subcommand(
      "gradcheck", "compare analytic gradients against central differences");
  grad_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  grad_cmd->add_option("--config", gf.config, "key=value defaults; command-line flags win");
  add_model_flags(grad_cmd, gf.model);
  grad_cmd->add_option("--vocab", gf.vocab, "vocabulary size of the random model")
      ->capture_default_str();
  grad_cmd->add_option("--seq", gf.seq, "sequence length")->capture_default_str();
  grad_cmd->add_option("--seed", gf.seed, "random seed")->capture_default_str();
  grad_cmd->add_option("--tol", gf.tol, "relative-error tolerance")->capture_default_str();
  grad_cmd->add_option("--eps", gf.eps, "finite-difference step")->capture_default_str();

  SampleFlags sf;
  auto* sample_cmd = app.add_subcommand("sample", "draw text from a checkpoint");
  sample_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  sample_cmd->add_option("--config", sf.config, "key=value defaults; command-line flags win");
  sample_cmd->add_option("--ckpt", sf.ckpt_path, "checkpoint path")->required();
  sample_cmd->add_option("--vocab", sf.vocab_path,
                         "vocab path (default: derived from the checkpoint path)");
  sample_cmd->add_option("--length", sf.length, "tokens to draw")->capture_default_str();
  sample_cmd->add_option("--seed", sf.seed, "random seed")->capture_default_str();
  sample_cmd->add_option("--temperature", sf.temperature, "softmax temperature, 0 = argmax")
      ->capture_default_str();

  int rc = 0;
  train_cmd->callback([&] { rc = run_train(tf); });
  eval_cmd->callback([&] { rc = run_eval(ef); });
  grad_cmd->callback([&] { rc = run_gradcheck(gf); });
  sample_cmd->callback([&] { rc = run_sample(sf); });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = with_config_defaults(app, std::move(args));
    std::reverse(args.begin(), args.end());  // parse() consumes back to front
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const dglstm::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    // UsageError, DimensionError, IndexError, bad input files
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}

#include "dglstm/network.hpp"

#include <cmath>
#include <sstream>

#include "dglstm/errors.hpp"
#include "dglstm/rng.hpp"

namespace dglstm {

void NetworkSpec::validate() const {
  if (depth < 1) throw UsageError("NetworkSpec: depth must be at least 1");
  if (static_cast<int>(hidden_dims.size()) != depth) {
    std::ostringstream os;
    os << "NetworkSpec: " << hidden_dims.size() << " hidden widths for depth " << depth;
    throw UsageError(os.str());
  }
  for (int h : hidden_dims)
    if (h < 1) throw UsageError("NetworkSpec: hidden widths must be at least 1");
  if (embed_dim < 1) throw UsageError("NetworkSpec: embed_dim must be at least 1");
  if (vocab_size < 1) throw UsageError("NetworkSpec: vocab_size must be at least 1");
}

namespace {

CellKind layer_kind(const NetworkSpec& spec, int layer) {
  if (spec.cell == CellKind::DGLSTM && layer == 0 && !spec.first_layer_gate)
    return CellKind::LSTM;
  return spec.cell;
}

}  // namespace

ModelParams make_model(const NetworkSpec& spec) {
  spec.validate();
  ModelParams m;
  m.embed = Tensor(spec.vocab_size, spec.embed_dim);
  m.layers.reserve(spec.depth);
  for (int l = 0; l < spec.depth; ++l) {
    CellOptions opts;
    opts.tie_forget = spec.tie_forget;
    opts.peephole = spec.peephole;
    opts.first_layer = (l == 0);
    opts.untie_first_proj = spec.untie_first_proj;
    if (l > 0) opts.lower_dim = spec.hidden_dims[l - 1];
    m.layers.push_back(
        make_cell(layer_kind(spec, l), spec.layer_input_dim(l), spec.hidden_dims[l], opts));
  }
  m.inter.resize(spec.depth > 0 ? spec.depth - 1 : 0);
  for (int l = 0; l + 1 < spec.depth; ++l) {
    if (spec.affine_at(l)) {
      m.inter[l].W = Tensor(spec.hidden_dims[l + 1], spec.hidden_dims[l]);
      m.inter[l].b = Tensor(spec.hidden_dims[l + 1], 1);
    }
  }
  m.W_out = Tensor(spec.vocab_size, spec.hidden_dims.back());
  m.b_out = Tensor(spec.vocab_size, 1);
  return m;
}

namespace {

bool is_bias(const std::string& name) {
  const auto dot = name.rfind('.');
  const size_t leaf = dot == std::string::npos ? 0 : dot + 1;
  return name[leaf] == 'b';
}

}  // namespace

ModelParams init_params(const NetworkSpec& spec, uint64_t seed) {
  ModelParams m = make_model(spec);
  Rng rng(seed);
  m.for_each_param([&](const std::string& name, Tensor& t) {
    if (is_bias(name)) return;  // biases start at zero
    const double s = 1.0 / std::sqrt(static_cast<double>(t.cols()));
    for (long k = 0; k < t.size(); ++k) t[k] = rng.uniform(-s, s);
  });
  return m;
}

long ModelParams::param_count() const {
  long total = 0;
  for_each_param([&](const std::string&, const Tensor& t) { total += t.size(); });
  return total;
}

std::vector<std::pair<std::string, Tensor*>> named_tensors(ModelParams& m) {
  std::vector<std::pair<std::string, Tensor*>> out;
  m.for_each_param([&](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> named_tensors(const ModelParams& m) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  m.for_each_param(
      [&](const std::string& name, const Tensor& t) { out.emplace_back(name, &t); });
  return out;
}

std::vector<LayerState> zero_states(const ModelParams& params) {
  std::vector<LayerState> states;
  states.reserve(params.layers.size());
  for (const auto& layer : params.layers) states.push_back(zero_state(layer));
  return states;
}

Tensor embed_row(const Tensor& embed, int id) {
  if (id < 0 || id >= embed.rows()) {
    std::ostringstream os;
    os << "embed_row: token id " << id << " outside vocabulary of " << embed.rows();
    throw IndexError(os.str());
  }
  Tensor x(embed.cols(), 1);
  for (int j = 0; j < embed.cols(); ++j) x[j] = embed(id, j);
  return x;
}

namespace {

// One time step through the stack. `caches` may be null for loss-only passes.
Tensor stack_step(const ModelParams& params, const NetworkSpec& spec, int token,
                  std::vector<LayerState>& states, std::vector<StepCache>* caches) {
  Tensor x = embed_row(params.embed, token);
  const Tensor* lower_c = nullptr;
  Tensor lower_c_val;  // keeps the lower cell alive after states[l] is replaced
  for (int l = 0; l < spec.depth; ++l) {
    StepCache* cache = caches ? &(*caches)[l] : nullptr;
    LayerState next =
        cell_step(params.layers[l], x, states[l], lower_c, cache);
    if (l + 1 < spec.depth) {
      if (params.inter[l].present()) {
        Tensor y = matvec(params.inter[l].W, next.h);
        add_in_place(y, params.inter[l].b);
        x = std::move(y);
      } else {
        x = next.h;
      }
      if (params.layers[l + 1].kind == CellKind::DGLSTM && next.c) {
        lower_c_val = *next.c;
        lower_c = &lower_c_val;
      } else {
        lower_c = nullptr;
      }
    }
    states[l] = std::move(next);
  }
  Tensor logits = matvec(params.W_out, states[spec.depth - 1].h);
  add_in_place(logits, params.b_out);
  return logits;
}

}  // namespace

Tensor step_logits(const ModelParams& params, const NetworkSpec& spec, int token,
                   std::vector<LayerState>& states) {
  if (static_cast<int>(states.size()) != spec.depth) {
    std::ostringstream os;
    os << "step_logits: " << states.size() << " states for depth " << spec.depth;
    throw UsageError(os.str());
  }
  return stack_step(params, spec, token, states, nullptr);
}

UnrolledTape forward(const ModelParams& params, const NetworkSpec& spec,
                     const std::vector<int>& tokens,
                     const std::vector<LayerState>& init_states) {
  spec.validate();
  if (tokens.empty()) throw UsageError("forward: no tokens to unroll");
  if (static_cast<int>(init_states.size()) != spec.depth) {
    std::ostringstream os;
    os << "forward: " << init_states.size() << " initial states for depth " << spec.depth;
    throw UsageError(os.str());
  }
  UnrolledTape tape;
  tape.tokens = tokens;
  tape.caches.resize(tokens.size());
  tape.logits.reserve(tokens.size());
  std::vector<LayerState> states = init_states;
  for (size_t t = 0; t < tokens.size(); ++t) {
    tape.caches[t].resize(spec.depth);
    tape.logits.push_back(stack_step(params, spec, tokens[t], states, &tape.caches[t]));
  }
  tape.final_states = std::move(states);
  return tape;
}

double sequence_loss(const UnrolledTape& tape, const std::vector<int>& targets) {
  if (tape.steps() == 0) throw UsageError("sequence_loss: empty tape");
  if (static_cast<int>(targets.size()) != tape.steps()) {
    std::ostringstream os;
    os << "sequence_loss: " << targets.size() << " targets for " << tape.steps()
       << " steps";
    throw UsageError(os.str());
  }
  double total = 0.0;
  for (int t = 0; t < tape.steps(); ++t) total += softmax_xent(tape.logits[t], targets[t]);
  return total / tape.steps();
}

double sequence_nll_sum(const ModelParams& params, const NetworkSpec& spec,
                        const std::vector<int>& tokens, const std::vector<int>& targets,
                        std::vector<LayerState>* states) {
  if (tokens.size() != targets.size()) {
    std::ostringstream os;
    os << "sequence_nll_sum: " << targets.size() << " targets for " << tokens.size()
       << " tokens";
    throw UsageError(os.str());
  }
  std::vector<LayerState> local;
  if (!states) {
    local = zero_states(params);
    states = &local;
  }
  double total = 0.0;
  for (size_t t = 0; t < tokens.size(); ++t) {
    Tensor logits = stack_step(params, spec, tokens[t], *states, nullptr);
    total += softmax_xent(logits, targets[t]);
  }
  return total;
}

}  // namespace dglstm

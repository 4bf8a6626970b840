#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dglstm/cells.hpp"
#include "dglstm/tensor.hpp"

namespace dglstm {

// Architecture description. Everything needed to rebuild the parameter
// skeleton lives here; checkpoints serialize it alongside the weights.
struct NetworkSpec {
  CellKind cell = CellKind::DGLSTM;
  int depth = 1;
  int embed_dim = 16;
  std::vector<int> hidden_dims;
  int vocab_size = 0;
  bool interlayer_affine = false;
  bool tie_forget = true;
  PeepholeMode peephole = PeepholeMode::Diag;
  bool untie_first_proj = false;
  // DGLSTM only: when off, the first layer is a plain LSTM and depth gating
  // starts at layer 1.
  bool first_layer_gate = true;

  void validate() const;

  // An affine map sits in gap l (between layer l and l+1) when requested or
  // when the widths disagree.
  bool affine_at(int gap) const {
    return interlayer_affine || hidden_dims[gap] != hidden_dims[gap + 1];
  }
  // Width of the input each layer consumes.
  int layer_input_dim(int layer) const {
    if (layer == 0) return embed_dim;
    return affine_at(layer - 1) ? hidden_dims[layer] : hidden_dims[layer - 1];
  }

  bool operator==(const NetworkSpec& other) const = default;
};

struct AffineParams {
  Tensor W, b;
  bool present() const { return !W.empty(); }
};

// Full parameter set: embedding, one CellParams per layer, optional affine
// maps between layers, output projection. Also reused as the container for
// accumulated gradients (identical shapes).
struct ModelParams {
  Tensor embed;  // [vocab x embed_dim], row per token
  std::vector<CellParams> layers;
  std::vector<AffineParams> inter;  // size depth-1; empty where identity
  Tensor W_out, b_out;

  template <typename F>
  void for_each_param(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_param(F&& f) const {
    visit(*this, f);
  }

  long param_count() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f(std::string("embed"), self.embed);
    for (size_t l = 0; l < self.layers.size(); ++l) {
      const std::string prefix = "layer" + std::to_string(l) + ".";
      self.layers[l].for_each_param(
          [&](const char* name, auto& t) { f(prefix + name, t); });
      if (l + 1 < self.layers.size() && self.inter[l].present()) {
        const std::string gap = "inter" + std::to_string(l) + ".";
        f(gap + "W", self.inter[l].W);
        f(gap + "b", self.inter[l].b);
      }
    }
    f(std::string("W_out"), self.W_out);
    f(std::string("b_out"), self.b_out);
  }
};

using GradientSet = ModelParams;

// Flat views over the canonical parameter order, for code that needs to zip
// two parameter sets or address tensors by position.
std::vector<std::pair<std::string, Tensor*>> named_tensors(ModelParams& m);
std::vector<std::pair<std::string, const Tensor*>> named_tensors(const ModelParams& m);

// Zeroed parameters with the shapes dictated by the spec.
ModelParams make_model(const NetworkSpec& spec);
// Deterministic init: each weight tensor drawn uniform in [-s, s] with
// s = 1/sqrt(fan-in); biases stay zero.
ModelParams init_params(const NetworkSpec& spec, uint64_t seed);

std::vector<LayerState> zero_states(const ModelParams& params);

// Row `id` of the embedding table as a column vector.
Tensor embed_row(const Tensor& embed, int id);

// Forward activations for a whole unrolled sequence, kept for BPTT.
struct UnrolledTape {
  std::vector<std::vector<StepCache>> caches;  // [step][layer]
  std::vector<Tensor> logits;                  // [step]
  std::vector<int> tokens;                     // inputs, one per step
  std::vector<LayerState> final_states;        // carry into the next chunk
  int steps() const { return static_cast<int>(logits.size()); }
};

UnrolledTape forward(const ModelParams& params, const NetworkSpec& spec,
                     const std::vector<int>& tokens,
                     const std::vector<LayerState>& init_states);

// One token through the stack: updates states in place, returns the logits.
Tensor step_logits(const ModelParams& params, const NetworkSpec& spec, int token,
                   std::vector<LayerState>& states);

// Mean cross-entropy of the tape's logits against next-token targets.
double sequence_loss(const UnrolledTape& tape, const std::vector<int>& targets);

// Sum of per-step cross-entropies without recording a tape. `states` (when
// non-null) supplies the initial states and receives the carried ones, so
// chunked evaluation is exact.
double sequence_nll_sum(const ModelParams& params, const NetworkSpec& spec,
                        const std::vector<int>& tokens, const std::vector<int>& targets,
                        std::vector<LayerState>* states = nullptr);

}  // namespace dglstm

#pragma once

#include <optional>
#include <string>

#include "dglstm/tensor.hpp"

namespace dglstm {

enum class CellKind { SimpleRNN, GRU, LSTM, DGLSTM };
enum class PeepholeMode { Diag, Full, None };

const char* cell_kind_name(CellKind kind);
const char* peephole_mode_name(PeepholeMode mode);
CellKind parse_cell_kind(const std::string& name);         // "rnn" | "gru" | "lstm" | "dglstm"
PeepholeMode parse_peephole_mode(const std::string& name); // "diag" | "full" | "none"

// Parameters for one recurrent layer. Only the tensors required by `kind`
// (and the flags) are non-empty; make_cell() allocates exactly that set.
struct CellParams {
  CellKind kind = CellKind::LSTM;
  int input_dim = 0;
  int hidden_dim = 0;
  int lower_dim = 0;  // DGLSTM layers above the first: width of the cell below
  bool first_layer = false;      // DGLSTM: gate a projection of x instead of a lower cell
  bool tie_forget = true;        // forget gate computed as 1 - input gate
  PeepholeMode peephole = PeepholeMode::Diag;
  bool untie_first_proj = false; // DGLSTM first layer: separate matrix for the gated path

  // SimpleRNN
  Tensor W_xh, W_hh, b_h;

  // GRU
  Tensor W_xz, W_hz, b_z;
  Tensor W_xr, W_hr, b_r;
  Tensor W_xn, W_hn, b_n;

  // LSTM / DGLSTM. Peephole tensors are [hidden x 1] in diag mode and
  // [hidden x hidden] in full mode; empty in none mode. With tie_forget the
  // forget-gate tensors are absent.
  Tensor W_xi, W_hi, b_i;
  Tensor W_xf, W_hf, b_f;
  Tensor w_ci, w_cf, w_co;
  Tensor W_xc, W_hc, b_c;
  Tensor W_xo, W_ho, b_o;

  // DGLSTM depth gate
  Tensor b_d, W_xd, w_cd;
  Tensor w_ld;       // upper layers when lower_dim == hidden_dim
  Tensor W_ld;       // upper layers when lower_dim != hidden_dim
  Tensor W_xd_path;  // first layer with untie_first_proj

  // Visits every present tensor in a fixed canonical order with its name.
  // The order defines initialization draws, checkpoint layout, and the
  // coordinate order used by numeric gradient checks.
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
    const bool full = self.peephole == PeepholeMode::Full;
    switch (self.kind) {
      case CellKind::SimpleRNN:
        f("W_xh", self.W_xh);
        f("W_hh", self.W_hh);
        f("b_h", self.b_h);
        return;
      case CellKind::GRU:
        f("W_xz", self.W_xz);
        f("W_hz", self.W_hz);
        f("b_z", self.b_z);
        f("W_xr", self.W_xr);
        f("W_hr", self.W_hr);
        f("b_r", self.b_r);
        f("W_xn", self.W_xn);
        f("W_hn", self.W_hn);
        f("b_n", self.b_n);
        return;
      case CellKind::DGLSTM:
      case CellKind::LSTM:
        f("W_xi", self.W_xi);
        f("W_hi", self.W_hi);
        if (self.peephole != PeepholeMode::None) f(full ? "W_ci" : "w_ci", self.w_ci);
        f("b_i", self.b_i);
        if (!self.tie_forget) {
          f("W_xf", self.W_xf);
          f("W_hf", self.W_hf);
          if (self.peephole != PeepholeMode::None) f(full ? "W_cf" : "w_cf", self.w_cf);
          f("b_f", self.b_f);
        }
        f("W_xc", self.W_xc);
        f("W_hc", self.W_hc);
        f("b_c", self.b_c);
        f("W_xo", self.W_xo);
        f("W_ho", self.W_ho);
        if (self.peephole != PeepholeMode::None) f(full ? "W_co" : "w_co", self.w_co);
        f("b_o", self.b_o);
        if (self.kind == CellKind::DGLSTM) {
          f("b_d", self.b_d);
          f("W_xd", self.W_xd);
          f("w_cd", self.w_cd);
          if (!self.first_layer) {
            if (self.lower_dim == self.hidden_dim)
              f("w_ld", self.w_ld);
            else
              f("W_ld", self.W_ld);
          } else if (self.untie_first_proj) {
            f("W_xd_path", self.W_xd_path);
          }
        }
        return;
    }
  }
};

struct CellOptions {
  bool tie_forget = true;
  PeepholeMode peephole = PeepholeMode::Diag;
  bool first_layer = false;
  int lower_dim = 0;  // ignored unless DGLSTM and not first_layer
  bool untie_first_proj = false;
};

// Allocates zeroed tensors of the shapes required by (kind, dims, options).
CellParams make_cell(CellKind kind, int input_dim, int hidden_dim,
                     const CellOptions& options = {});

// Recurrent state of one layer. The memory cell is present only for
// LSTM/DGLSTM.
struct LayerState {
  Tensor h;
  std::optional<Tensor> c;

  bool operator==(const LayerState& other) const = default;
};

LayerState zero_state(const CellParams& p);

// Everything a single step computed, recorded for backpropagation.
// Fields not used by the cell kind stay empty.
struct StepCache {
  Tensor x, h_prev, c_prev;
  // LSTM / DGLSTM
  Tensor a_i, i, a_f, f, a_g, g, a_o, o, c, tanh_c;
  // DGLSTM: `path` is the tensor the depth gate multiplies in the cell
  // update; lower_c is the raw cell from the layer below (upper layers only).
  Tensor a_d, d, path, lower_c;
  // GRU
  Tensor a_z, z, a_r, r, a_n, n, rh;
  // SimpleRNN
  Tensor a_h;
  Tensor h;
};

LayerState rnn_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                    StepCache* cache = nullptr);
LayerState gru_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                    StepCache* cache = nullptr);
LayerState lstm_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                     StepCache* cache = nullptr);
// lower_c must be null for first-layer cells and non-null above them.
LayerState dglstm_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                       const Tensor* lower_c, StepCache* cache = nullptr);

// Dispatches on p.kind.
LayerState cell_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                     const Tensor* lower_c = nullptr, StepCache* cache = nullptr);

}  // namespace dglstm

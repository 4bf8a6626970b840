#include "dglstm/cells.hpp"

#include <utility>

#include "dglstm/errors.hpp"

namespace dglstm {

const char* cell_kind_name(CellKind kind) {
  switch (kind) {
    case CellKind::SimpleRNN: return "rnn";
    case CellKind::GRU: return "gru";
    case CellKind::LSTM: return "lstm";
    case CellKind::DGLSTM: return "dglstm";
  }
  return "?";
}

const char* peephole_mode_name(PeepholeMode mode) {
  switch (mode) {
    case PeepholeMode::Diag: return "diag";
    case PeepholeMode::Full: return "full";
    case PeepholeMode::None: return "none";
  }
  return "?";
}

CellKind parse_cell_kind(const std::string& name) {
  if (name == "rnn") return CellKind::SimpleRNN;
  if (name == "gru") return CellKind::GRU;
  if (name == "lstm") return CellKind::LSTM;
  if (name == "dglstm") return CellKind::DGLSTM;
  throw UsageError("cell must be one of rnn|gru|lstm|dglstm, got '" + name + "'");
}

PeepholeMode parse_peephole_mode(const std::string& name) {
  if (name == "diag") return PeepholeMode::Diag;
  if (name == "full") return PeepholeMode::Full;
  if (name == "none") return PeepholeMode::None;
  throw UsageError("peephole must be one of diag|full|none, got '" + name + "'");
}

long CellParams::param_count() const {
  long total = 0;
  for_each_param([&](const char*, const Tensor& t) { total += t.size(); });
  return total;
}

CellParams make_cell(CellKind kind, int input_dim, int hidden_dim,
                     const CellOptions& options) {
  if (input_dim < 1 || hidden_dim < 1)
    throw UsageError("make_cell: dimensions must be at least 1");
  CellParams p;
  p.kind = kind;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.tie_forget = options.tie_forget;
  p.peephole = options.peephole;
  const int h = hidden_dim;
  const int x = input_dim;
  switch (kind) {
    case CellKind::SimpleRNN:
      p.W_xh = Tensor(h, x);
      p.W_hh = Tensor(h, h);
      p.b_h = Tensor(h, 1);
      break;
    case CellKind::GRU:
      p.W_xz = Tensor(h, x); p.W_hz = Tensor(h, h); p.b_z = Tensor(h, 1);
      p.W_xr = Tensor(h, x); p.W_hr = Tensor(h, h); p.b_r = Tensor(h, 1);
      p.W_xn = Tensor(h, x); p.W_hn = Tensor(h, h); p.b_n = Tensor(h, 1);
      break;
    case CellKind::DGLSTM:
    case CellKind::LSTM: {
      const int pc = options.peephole == PeepholeMode::Full ? h : 1;
      p.W_xi = Tensor(h, x); p.W_hi = Tensor(h, h); p.b_i = Tensor(h, 1);
      if (!options.tie_forget) {
        p.W_xf = Tensor(h, x); p.W_hf = Tensor(h, h); p.b_f = Tensor(h, 1);
      }
      p.W_xc = Tensor(h, x); p.W_hc = Tensor(h, h); p.b_c = Tensor(h, 1);
      p.W_xo = Tensor(h, x); p.W_ho = Tensor(h, h); p.b_o = Tensor(h, 1);
      if (options.peephole != PeepholeMode::None) {
        p.w_ci = Tensor(h, pc);
        if (!options.tie_forget) p.w_cf = Tensor(h, pc);
        p.w_co = Tensor(h, pc);
      }
      if (kind == CellKind::DGLSTM) {
        p.first_layer = options.first_layer;
        p.b_d = Tensor(h, 1);
        p.W_xd = Tensor(h, x);
        p.w_cd = Tensor(h, 1);
        if (options.first_layer) {
          p.untie_first_proj = options.untie_first_proj;
          if (options.untie_first_proj) p.W_xd_path = Tensor(h, x);
        } else {
          if (options.lower_dim < 1)
            throw UsageError("make_cell: depth-gated layer above the first needs lower_dim");
          p.lower_dim = options.lower_dim;
          if (options.lower_dim == h)
            p.w_ld = Tensor(h, 1);
          else
            p.W_ld = Tensor(h, options.lower_dim);
        }
      }
      break;
    }
  }
  return p;
}

LayerState zero_state(const CellParams& p) {
  LayerState s;
  s.h = Tensor(p.hidden_dim, 1);
  if (p.kind == CellKind::LSTM || p.kind == CellKind::DGLSTM)
    s.c = Tensor(p.hidden_dim, 1);
  return s;
}

namespace {

// a += peephole contribution from c: elementwise for vectors, a full matvec
// for square peepholes.
void peep_acc(PeepholeMode mode, const Tensor& peep, const Tensor& c, Tensor& a) {
  switch (mode) {
    case PeepholeMode::Diag: hadamard_acc(peep, c, a); break;
    case PeepholeMode::Full: matvec_acc(peep, c, a); break;
    case PeepholeMode::None: break;
  }
}

// Shared LSTM/DGLSTM step; the depth-gate block is the only divergence.
LayerState gated_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                      const Tensor* lower_c, StepCache* cache) {
  if (!prev.c)
    throw UsageError("step: previous state carries no memory cell");
  const Tensor& c_prev = *prev.c;

  Tensor a_i = matvec(p.W_xi, x);
  matvec_acc(p.W_hi, prev.h, a_i);
  peep_acc(p.peephole, p.w_ci, c_prev, a_i);
  add_in_place(a_i, p.b_i);
  Tensor i = sigmoid(a_i);

  Tensor a_f, f;
  if (p.tie_forget) {
    f = one_minus(i);
  } else {
    a_f = matvec(p.W_xf, x);
    matvec_acc(p.W_hf, prev.h, a_f);
    peep_acc(p.peephole, p.w_cf, c_prev, a_f);
    add_in_place(a_f, p.b_f);
    f = sigmoid(a_f);
  }

  Tensor a_g = matvec(p.W_xc, x);
  matvec_acc(p.W_hc, prev.h, a_g);
  add_in_place(a_g, p.b_c);
  Tensor g = tanh_ew(a_g);

  Tensor c = hadamard(f, c_prev);
  hadamard_acc(i, g, c);

  Tensor a_d, d, path;
  if (p.kind == CellKind::DGLSTM) {
    a_d = matvec(p.W_xd, x);
    hadamard_acc(p.w_cd, c_prev, a_d);
    add_in_place(a_d, p.b_d);
    if (p.first_layer) {
      if (lower_c)
        throw UsageError("dglstm_step: lower cell supplied to the first layer");
      path = p.untie_first_proj ? matvec(p.W_xd_path, x) : matvec(p.W_xd, x);
    } else {
      if (!lower_c)
        throw UsageError("dglstm_step: layer above the first requires the lower cell");
      if (p.lower_dim == p.hidden_dim) {
        hadamard_acc(p.w_ld, *lower_c, a_d);
        path = *lower_c;
      } else {
        // Project the lower cell once; the projection feeds the gate and is
        // also the quantity being gated.
        path = matvec(p.W_ld, *lower_c);
        add_in_place(a_d, path);
      }
    }
    d = sigmoid(a_d);
    hadamard_acc(d, path, c);
  } else if (lower_c) {
    throw UsageError("step: lower cell supplied to a cell without a depth gate");
  }

  Tensor a_o = matvec(p.W_xo, x);
  matvec_acc(p.W_ho, prev.h, a_o);
  peep_acc(p.peephole, p.w_co, c, a_o);  // peephole on the updated cell
  add_in_place(a_o, p.b_o);
  Tensor o = sigmoid(a_o);

  Tensor tanh_c = tanh_ew(c);
  Tensor h = hadamard(o, tanh_c);

  if (cache) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->c_prev = c_prev;
    cache->a_i = std::move(a_i);
    cache->i = std::move(i);
    cache->a_f = std::move(a_f);
    cache->f = std::move(f);
    cache->a_g = std::move(a_g);
    cache->g = std::move(g);
    cache->a_o = std::move(a_o);
    cache->o = o;
    cache->c = c;
    cache->tanh_c = std::move(tanh_c);
    cache->a_d = std::move(a_d);
    cache->d = std::move(d);
    cache->path = std::move(path);
    if (lower_c) cache->lower_c = *lower_c;
    cache->h = h;
  }
  LayerState out;
  out.h = std::move(h);
  out.c = std::move(c);
  return out;
}

}  // namespace

LayerState rnn_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                    StepCache* cache) {
  if (p.kind != CellKind::SimpleRNN)
    throw UsageError("rnn_step: parameters are not for a simple RNN");
  Tensor a = matvec(p.W_xh, x);
  matvec_acc(p.W_hh, prev.h, a);
  add_in_place(a, p.b_h);
  Tensor h = tanh_ew(a);
  if (cache) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->a_h = std::move(a);
    cache->h = h;
  }
  LayerState out;
  out.h = std::move(h);
  return out;
}

LayerState gru_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                    StepCache* cache) {
  if (p.kind != CellKind::GRU)
    throw UsageError("gru_step: parameters are not for a GRU");
  Tensor a_z = matvec(p.W_xz, x);
  matvec_acc(p.W_hz, prev.h, a_z);
  add_in_place(a_z, p.b_z);
  Tensor z = sigmoid(a_z);

  Tensor a_r = matvec(p.W_xr, x);
  matvec_acc(p.W_hr, prev.h, a_r);
  add_in_place(a_r, p.b_r);
  Tensor r = sigmoid(a_r);

  Tensor rh = hadamard(r, prev.h);
  Tensor a_n = matvec(p.W_xn, x);
  matvec_acc(p.W_hn, rh, a_n);
  add_in_place(a_n, p.b_n);
  Tensor n = tanh_ew(a_n);

  // h' = (1-z) .* h_prev + z .* n
  Tensor h = hadamard(one_minus(z), prev.h);
  hadamard_acc(z, n, h);

  if (cache) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->a_z = std::move(a_z);
    cache->z = std::move(z);
    cache->a_r = std::move(a_r);
    cache->r = std::move(r);
    cache->rh = std::move(rh);
    cache->a_n = std::move(a_n);
    cache->n = std::move(n);
    cache->h = h;
  }
  LayerState out;
  out.h = std::move(h);
  return out;
}

LayerState lstm_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                     StepCache* cache) {
  if (p.kind != CellKind::LSTM)
    throw UsageError("lstm_step: parameters are not for an LSTM");
  return gated_step(p, x, prev, nullptr, cache);
}

LayerState dglstm_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                       const Tensor* lower_c, StepCache* cache) {
  if (p.kind != CellKind::DGLSTM)
    throw UsageError("dglstm_step: parameters are not for a depth-gated LSTM");
  return gated_step(p, x, prev, lower_c, cache);
}

LayerState cell_step(const CellParams& p, const Tensor& x, const LayerState& prev,
                     const Tensor* lower_c, StepCache* cache) {
  switch (p.kind) {
    case CellKind::SimpleRNN:
      if (lower_c) throw UsageError("cell_step: lower cell supplied to a simple RNN");
      return rnn_step(p, x, prev, cache);
    case CellKind::GRU:
      if (lower_c) throw UsageError("cell_step: lower cell supplied to a GRU");
      return gru_step(p, x, prev, cache);
    case CellKind::LSTM:
      if (lower_c) throw UsageError("cell_step: lower cell supplied to an LSTM");
      return lstm_step(p, x, prev, cache);
    case CellKind::DGLSTM:
      return dglstm_step(p, x, prev, lower_c, cache);
  }
  throw UsageError("cell_step: unknown cell kind");
}

}  // namespace dglstm

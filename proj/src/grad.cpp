#include "dglstm/grad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dglstm/errors.hpp"

namespace dglstm {

namespace {

// Derivatives expressed through the stored activations.
Tensor sigmoid_grad(const Tensor& act) { return hadamard(act, one_minus(act)); }
Tensor tanh_grad(const Tensor& act) { return one_minus(hadamard(act, act)); }

struct StepGrads {
  Tensor dx;        // into this layer's input
  Tensor dh_prev;   // into the previous step's output
  Tensor dc_prev;   // into the previous step's cell (empty for RNN/GRU)
  Tensor dlower_c;  // into the lower layer's cell at the same step (depth gate)
};

StepGrads rnn_backward(const CellParams& p, const StepCache& s, const Tensor& dh,
                       CellParams& g) {
  Tensor da = hadamard(dh, tanh_grad(s.h));
  StepGrads out;
  out.dx = Tensor(p.input_dim, 1);
  matvec_t_acc(p.W_xh, da, out.dx);
  out.dh_prev = Tensor(p.hidden_dim, 1);
  matvec_t_acc(p.W_hh, da, out.dh_prev);
  outer_acc(g.W_xh, da, s.x);
  outer_acc(g.W_hh, da, s.h_prev);
  add_in_place(g.b_h, da);
  return out;
}

StepGrads gru_backward(const CellParams& p, const StepCache& s, const Tensor& dh,
                       CellParams& g) {
  // h = (1-z).*h_prev + z.*n
  Tensor dz = hadamard(dh, s.n - s.h_prev);
  Tensor dn = hadamard(dh, s.z);
  Tensor da_n = hadamard(dn, tanh_grad(s.n));
  Tensor da_z = hadamard(dz, sigmoid_grad(s.z));
  Tensor drh(p.hidden_dim, 1);
  matvec_t_acc(p.W_hn, da_n, drh);
  Tensor dr = hadamard(drh, s.h_prev);
  Tensor da_r = hadamard(dr, sigmoid_grad(s.r));

  StepGrads out;
  out.dh_prev = hadamard(dh, one_minus(s.z));
  hadamard_acc(drh, s.r, out.dh_prev);
  matvec_t_acc(p.W_hz, da_z, out.dh_prev);
  matvec_t_acc(p.W_hr, da_r, out.dh_prev);
  out.dx = Tensor(p.input_dim, 1);
  matvec_t_acc(p.W_xz, da_z, out.dx);
  matvec_t_acc(p.W_xr, da_r, out.dx);
  matvec_t_acc(p.W_xn, da_n, out.dx);

  outer_acc(g.W_xz, da_z, s.x);
  outer_acc(g.W_hz, da_z, s.h_prev);
  add_in_place(g.b_z, da_z);
  outer_acc(g.W_xr, da_r, s.x);
  outer_acc(g.W_hr, da_r, s.h_prev);
  add_in_place(g.b_r, da_r);
  outer_acc(g.W_xn, da_n, s.x);
  outer_acc(g.W_hn, da_n, s.rh);
  add_in_place(g.b_n, da_n);
  return out;
}

// Transposed peephole contribution: a += peep^T applied to da.
void peep_t_acc(PeepholeMode mode, const Tensor& peep, const Tensor& da, Tensor& a) {
  switch (mode) {
    case PeepholeMode::Diag: hadamard_acc(peep, da, a); break;
    case PeepholeMode::Full: matvec_t_acc(peep, da, a); break;
    case PeepholeMode::None: break;
  }
}

// Peephole parameter gradient from gate error and the cell it reads.
void peep_grad_acc(PeepholeMode mode, const Tensor& da, const Tensor& c, Tensor& gpeep) {
  switch (mode) {
    case PeepholeMode::Diag: hadamard_acc(da, c, gpeep); break;
    case PeepholeMode::Full: outer_acc(gpeep, da, c); break;
    case PeepholeMode::None: break;
  }
}

StepGrads gated_backward(const CellParams& p, const StepCache& s, const Tensor& dh,
                         const Tensor& dc_in, CellParams& g) {
  // h = o .* tanh(c); the output gate reads the updated cell, so its error
  // joins dc before anything that fed c is differentiated.
  Tensor do_gate = hadamard(dh, s.tanh_c);
  Tensor da_o = hadamard(do_gate, sigmoid_grad(s.o));

  Tensor dc = dc_in.empty() ? Tensor(p.hidden_dim, 1) : dc_in;
  hadamard_acc(dh, hadamard(s.o, tanh_grad(s.tanh_c)), dc);
  peep_t_acc(p.peephole, p.w_co, da_o, dc);

  Tensor da_d, dpath;
  if (p.kind == CellKind::DGLSTM) {
    Tensor dd = hadamard(dc, s.path);
    da_d = hadamard(dd, sigmoid_grad(s.d));
    dpath = hadamard(dc, s.d);
  }

  Tensor di = hadamard(dc, s.g);
  Tensor df = hadamard(dc, s.c_prev);
  Tensor dg = hadamard(dc, s.i);
  Tensor da_g = hadamard(dg, tanh_grad(s.g));
  Tensor da_i, da_f;
  if (p.tie_forget) {
    // f = 1 - i: the forget error folds into the input gate with a sign flip.
    da_i = hadamard(di - df, sigmoid_grad(s.i));
  } else {
    da_i = hadamard(di, sigmoid_grad(s.i));
    da_f = hadamard(df, sigmoid_grad(s.f));
  }

  StepGrads out;
  out.dc_prev = hadamard(dc, s.f);
  peep_t_acc(p.peephole, p.w_ci, da_i, out.dc_prev);
  if (!p.tie_forget) peep_t_acc(p.peephole, p.w_cf, da_f, out.dc_prev);

  out.dh_prev = Tensor(p.hidden_dim, 1);
  matvec_t_acc(p.W_hi, da_i, out.dh_prev);
  if (!p.tie_forget) matvec_t_acc(p.W_hf, da_f, out.dh_prev);
  matvec_t_acc(p.W_hc, da_g, out.dh_prev);
  matvec_t_acc(p.W_ho, da_o, out.dh_prev);

  out.dx = Tensor(p.input_dim, 1);
  matvec_t_acc(p.W_xi, da_i, out.dx);
  if (!p.tie_forget) matvec_t_acc(p.W_xf, da_f, out.dx);
  matvec_t_acc(p.W_xc, da_g, out.dx);
  matvec_t_acc(p.W_xo, da_o, out.dx);

  outer_acc(g.W_xi, da_i, s.x);
  outer_acc(g.W_hi, da_i, s.h_prev);
  peep_grad_acc(p.peephole, da_i, s.c_prev, g.w_ci);
  add_in_place(g.b_i, da_i);
  if (!p.tie_forget) {
    outer_acc(g.W_xf, da_f, s.x);
    outer_acc(g.W_hf, da_f, s.h_prev);
    peep_grad_acc(p.peephole, da_f, s.c_prev, g.w_cf);
    add_in_place(g.b_f, da_f);
  }
  outer_acc(g.W_xc, da_g, s.x);
  outer_acc(g.W_hc, da_g, s.h_prev);
  add_in_place(g.b_c, da_g);
  outer_acc(g.W_xo, da_o, s.x);
  outer_acc(g.W_ho, da_o, s.h_prev);
  peep_grad_acc(p.peephole, da_o, s.c, g.w_co);  // reads the updated cell
  add_in_place(g.b_o, da_o);

  if (p.kind == CellKind::DGLSTM) {
    add_in_place(g.b_d, da_d);
    hadamard_acc(da_d, s.c_prev, g.w_cd);
    hadamard_acc(p.w_cd, da_d, out.dc_prev);
    if (p.first_layer) {
      if (p.untie_first_proj) {
        outer_acc(g.W_xd, da_d, s.x);
        matvec_t_acc(p.W_xd, da_d, out.dx);
        outer_acc(g.W_xd_path, dpath, s.x);
        matvec_t_acc(p.W_xd_path, dpath, out.dx);
      } else {
        // One matrix feeds both the gate and the gated projection.
        Tensor dv = da_d + dpath;
        outer_acc(g.W_xd, dv, s.x);
        matvec_t_acc(p.W_xd, dv, out.dx);
      }
    } else {
      outer_acc(g.W_xd, da_d, s.x);
      matvec_t_acc(p.W_xd, da_d, out.dx);
      if (p.lower_dim == p.hidden_dim) {
        hadamard_acc(da_d, s.lower_c, g.w_ld);
        out.dlower_c = hadamard(p.w_ld, da_d);
        add_in_place(out.dlower_c, dpath);
      } else {
        // The projected lower cell feeds both the gate and the gated path.
        Tensor du = da_d + dpath;
        outer_acc(g.W_ld, du, s.lower_c);
        out.dlower_c = Tensor(p.lower_dim, 1);
        matvec_t_acc(p.W_ld, du, out.dlower_c);
      }
    }
  }
  return out;
}

StepGrads step_backward(const CellParams& p, const StepCache& s, const Tensor& dh,
                        const Tensor& dc_in, CellParams& g) {
  switch (p.kind) {
    case CellKind::SimpleRNN: return rnn_backward(p, s, dh, g);
    case CellKind::GRU: return gru_backward(p, s, dh, g);
    case CellKind::LSTM:
    case CellKind::DGLSTM: return gated_backward(p, s, dh, dc_in, g);
  }
  throw UsageError("step_backward: unknown cell kind");
}

}  // namespace

GradientSet backward(const ModelParams& params, const NetworkSpec& spec,
                     const UnrolledTape& tape, const std::vector<int>& targets) {
  spec.validate();
  const int T = tape.steps();
  if (T == 0) throw UsageError("backward: empty tape");
  if (static_cast<int>(targets.size()) != T) {
    std::ostringstream os;
    os << "backward: " << targets.size() << " targets for " << T << " steps";
    throw UsageError(os.str());
  }
  const int D = spec.depth;
  if (tape.caches.size() != static_cast<size_t>(T) ||
      static_cast<int>(tape.caches[0].size()) != D ||
      static_cast<int>(params.layers.size()) != D) {
    throw UsageError("backward: tape does not match the model");
  }

  GradientSet g = make_model(spec);
  const double inv_T = 1.0 / T;

  // Errors flowing from step t+1 into (h_t, c_t) per layer.
  std::vector<Tensor> dh_next(D), dc_next(D);
  for (int l = 0; l < D; ++l) {
    dh_next[l] = Tensor(spec.hidden_dims[l], 1);
    dc_next[l] = Tensor(spec.hidden_dims[l], 1);
  }

  std::vector<Tensor> dh_cur(D), dc_cur(D);
  for (int t = T - 1; t >= 0; --t) {
    Tensor dlogits;
    softmax_xent(tape.logits[t], targets[t], &dlogits);
    dlogits[targets[t]] -= 1.0;
    for (long k = 0; k < dlogits.size(); ++k) dlogits[k] *= inv_T;

    for (int l = 0; l < D; ++l) {
      dh_cur[l] = dh_next[l];
      dc_cur[l] = dc_next[l];
    }
    outer_acc(g.W_out, dlogits, tape.caches[t][D - 1].h);
    add_in_place(g.b_out, dlogits);
    matvec_t_acc(params.W_out, dlogits, dh_cur[D - 1]);

    for (int l = D - 1; l >= 0; --l) {
      StepGrads sg =
          step_backward(params.layers[l], tape.caches[t][l], dh_cur[l], dc_cur[l],
                        g.layers[l]);
      dh_next[l] = std::move(sg.dh_prev);
      dc_next[l] = std::move(sg.dc_prev);
      if (l > 0) {
        if (params.inter[l - 1].present()) {
          outer_acc(g.inter[l - 1].W, sg.dx, tape.caches[t][l - 1].h);
          add_in_place(g.inter[l - 1].b, sg.dx);
          matvec_t_acc(params.inter[l - 1].W, sg.dx, dh_cur[l - 1]);
        } else {
          add_in_place(dh_cur[l - 1], sg.dx);
        }
        if (!sg.dlower_c.empty()) add_in_place(dc_cur[l - 1], sg.dlower_c);
      } else {
        const int token = tape.tokens[t];
        for (int j = 0; j < g.embed.cols(); ++j) g.embed(token, j) += sg.dx[j];
      }
    }
  }
  return g;
}

GradientSet fd_gradient(const ModelParams& params, const NetworkSpec& spec,
                        const std::vector<int>& tokens, const std::vector<int>& targets,
                        double eps) {
  if (eps <= 0.0) throw UsageError("fd_gradient: eps must be positive");
  if (tokens.empty()) throw UsageError("fd_gradient: empty sequence");
  GradientSet grads = make_model(spec);
  auto grad_ptrs = named_tensors(grads);

  // Flat coordinate list so the loop can be split across threads; each thread
  // perturbs its own copy of the parameters.
  std::vector<std::pair<int, long>> coords;
  for (size_t ti = 0; ti < grad_ptrs.size(); ++ti)
    for (long k = 0; k < grad_ptrs[ti].second->size(); ++k)
      coords.emplace_back(static_cast<int>(ti), k);
  const long n = static_cast<long>(coords.size());
  const double denom = static_cast<double>(tokens.size());

#pragma omp parallel
  {
    ModelParams work = params;
    auto work_ptrs = named_tensors(work);
#pragma omp for schedule(dynamic, 16)
    for (long k = 0; k < n; ++k) {
      const auto [ti, ei] = coords[k];
      Tensor& t = *work_ptrs[ti].second;
      const double orig = t[ei];
      const double d = central_diff(
          [&](double v) {
            t[ei] = v;
            return sequence_nll_sum(work, spec, tokens, targets) / denom;
          },
          orig, eps);
      t[ei] = orig;
      (*grad_ptrs[ti].second)[ei] = d;
    }
  }
  return grads;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

GradCheckReport compare_gradients(const GradientSet& analytic, const GradientSet& numeric,
                                  double tol) {
  if (tol <= 0.0) throw UsageError("compare_gradients: tol must be positive");
  auto a_ptrs = named_tensors(analytic);
  auto n_ptrs = named_tensors(numeric);
  if (a_ptrs.size() != n_ptrs.size())
    throw UsageError("compare_gradients: gradient sets have different tensor counts");
  GradCheckReport report;
  for (size_t ti = 0; ti < a_ptrs.size(); ++ti) {
    const Tensor& at = *a_ptrs[ti].second;
    const Tensor& nt = *n_ptrs[ti].second;
    if (!at.same_shape(nt)) {
      std::ostringstream os;
      os << "compare_gradients: " << a_ptrs[ti].first << " " << at.shape_str() << " vs "
         << nt.shape_str();
      throw UsageError(os.str());
    }
    for (long k = 0; k < at.size(); ++k) {
      const double e = rel_err(at[k], nt[k]);
      ++report.coords_checked;
      if (e > report.max_rel_err) {
        report.max_rel_err = e;
        report.worst_name = a_ptrs[ti].first;
        report.worst_index = k;
        report.worst_analytic = at[k];
        report.worst_numeric = nt[k];
      }
      if (e > tol)
        report.failures.push_back({a_ptrs[ti].first, k, at[k], nt[k], e});
    }
  }
  report.pass = report.failures.empty();
  return report;
}

GradCheckReport grad_check(const ModelParams& params, const NetworkSpec& spec,
                           const std::vector<int>& tokens, const std::vector<int>& targets,
                           double tol, double eps) {
  UnrolledTape tape = forward(params, spec, tokens, zero_states(params));
  GradientSet analytic = backward(params, spec, tape, targets);
  GradientSet numeric = fd_gradient(params, spec, tokens, targets, eps);
  return compare_gradients(analytic, numeric, tol);
}

std::string format_report(const GradCheckReport& report) {
  std::string out;
  char line[256];
  for (const auto& f : report.failures) {
    std::snprintf(line, sizeof(line), "%s[%ld] analytic=%.9e numeric=%.9e rel_err=%.3e\n",
                  f.name.c_str(), f.index, f.analytic, f.numeric, f.rel_err);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%s max_rel_err=%.3e\n",
                report.pass ? "PASS" : "FAIL", report.max_rel_err);
  out += line;
  return out;
}

}  // namespace dglstm

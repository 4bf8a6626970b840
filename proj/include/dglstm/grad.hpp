#pragma once

#include <string>
#include <vector>

#include "dglstm/network.hpp"

namespace dglstm {

// Exact gradient of sequence_loss(tape, targets) with respect to every model
// parameter, by reverse traversal of the tape. For depth-gated cells the
// error reaching a memory cell is the sum of the contribution from its own
// layer's future step and the one arriving through the layer above's depth
// gate.
GradientSet backward(const ModelParams& params, const NetworkSpec& spec,
                     const UnrolledTape& tape, const std::vector<int>& targets);

// (f(x+eps) - f(x-eps)) / (2 eps)
template <typename F>
double central_diff(F&& f, double x, double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

// Numeric gradient of the mean sequence loss: every coordinate perturbed both
// ways with a fresh forward pass each time. Coordinates are evaluated
// independently (and possibly concurrently), so the result does not depend on
// evaluation order.
GradientSet fd_gradient(const ModelParams& params, const NetworkSpec& spec,
                        const std::vector<int>& tokens, const std::vector<int>& targets,
                        double eps = 1e-5);

// |a-b| / max(|a|, |b|, 1e-6). The floor keeps near-zero coordinates from
// blowing up the ratio: a central difference of a loss of size L carries
// rounding noise of about eps_machine*L/epsilon (~2e-11 at epsilon=1e-5), so
// coordinates below the floor cannot be resolved more tightly than
// noise/floor ~ 2e-5 anyway.
double rel_err(double a, double b);

struct GradCheckFailure {
  std::string name;
  long index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  bool pass = true;
  double max_rel_err = 0.0;
  std::string worst_name;
  long worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  long coords_checked = 0;
  std::vector<GradCheckFailure> failures;
};

// Coordinate-wise comparison of two shape-congruent gradient sets.
GradCheckReport compare_gradients(const GradientSet& analytic, const GradientSet& numeric,
                                  double tol);

// backward vs fd_gradient on one sequence, starting from zero states.
GradCheckReport grad_check(const ModelParams& params, const NetworkSpec& spec,
                           const std::vector<int>& tokens, const std::vector<int>& targets,
                           double tol = 1e-4, double eps = 1e-5);

// One line per failing coordinate, then `PASS`/`FAIL max_rel_err=...`.
std::string format_report(const GradCheckReport& report);

}  // namespace dglstm

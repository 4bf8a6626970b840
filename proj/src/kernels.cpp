#include "dglstm/kernels.hpp"

namespace dglstm::kernels {

namespace {

// Shared per-element loops. Both the serial and the OpenMP kernels run these
// exact loops per output element; parallelism only changes which thread owns
// which element, never the accumulation order inside one element.

inline double row_dot(const double* w_row, const double* x, int n) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += w_row[j] * x[j];
  return acc;
}

inline double col_dot(const double* W, const double* x, int m, int n, int j) {
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += W[static_cast<size_t>(i) * n + j] * x[i];
  return acc;
}

}  // namespace

namespace serial {

void matvec(const double* W, const double* x, double* y, int m, int n) {
  for (int i = 0; i < m; ++i) y[i] = row_dot(W + static_cast<size_t>(i) * n, x, n);
}

void matvec_acc(const double* W, const double* x, double* y, int m, int n) {
  for (int i = 0; i < m; ++i) y[i] += row_dot(W + static_cast<size_t>(i) * n, x, n);
}

void matvec_t_acc(const double* W, const double* x, double* y, int m, int n) {
  for (int j = 0; j < n; ++j) y[j] += col_dot(W, x, m, n, j);
}

void outer_acc(double* G, const double* u, const double* v, int m, int n) {
  for (int i = 0; i < m; ++i) {
    double* g_row = G + static_cast<size_t>(i) * n;
    const double ui = u[i];
    for (int j = 0; j < n; ++j) g_row[j] += ui * v[j];
  }
}

}  // namespace serial

namespace par {

void matvec(const double* W, const double* x, double* y, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) y[i] = row_dot(W + static_cast<size_t>(i) * n, x, n);
}

void matvec_acc(const double* W, const double* x, double* y, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) y[i] += row_dot(W + static_cast<size_t>(i) * n, x, n);
}

void matvec_t_acc(const double* W, const double* x, double* y, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) y[j] += col_dot(W, x, m, n, j);
}

void outer_acc(double* G, const double* u, const double* v, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* g_row = G + static_cast<size_t>(i) * n;
    const double ui = u[i];
    for (int j = 0; j < n; ++j) g_row[j] += ui * v[j];
  }
}

}  // namespace par

void matvec(const double* W, const double* x, double* y, int m, int n) {
  if (static_cast<long>(m) * n >= kParallelCutoff)
    par::matvec(W, x, y, m, n);
  else
    serial::matvec(W, x, y, m, n);
}

void matvec_acc(const double* W, const double* x, double* y, int m, int n) {
  if (static_cast<long>(m) * n >= kParallelCutoff)
    par::matvec_acc(W, x, y, m, n);
  else
    serial::matvec_acc(W, x, y, m, n);
}

void matvec_t_acc(const double* W, const double* x, double* y, int m, int n) {
  if (static_cast<long>(m) * n >= kParallelCutoff)
    par::matvec_t_acc(W, x, y, m, n);
  else
    serial::matvec_t_acc(W, x, y, m, n);
}

void outer_acc(double* G, const double* u, const double* v, int m, int n) {
  if (static_cast<long>(m) * n >= kParallelCutoff)
    par::outer_acc(G, u, v, m, n);
  else
    serial::outer_acc(G, u, v, m, n);
}

}  // namespace dglstm::kernels

#pragma once

#include <cstddef>

// Low-level dense kernels behind the tensor ops. Every kernel exists twice:
// a serial reference implementation and an OpenMP version that parallelizes
// over output rows/columns. Each output element is accumulated in the same
// serial order in both, so the two produce bit-identical results for all
// inputs and thread counts; tests assert this and the benchmark compares
// their throughput.
namespace dglstm::kernels {

// below this many multiply-adds the dispatchers stay serial
inline constexpr long kParallelCutoff = 1L << 15;

namespace serial {
void matvec(const double* W, const double* x, double* y, int m, int n);       // y = W x
void matvec_acc(const double* W, const double* x, double* y, int m, int n);   // y += W x
void matvec_t_acc(const double* W, const double* x, double* y, int m, int n); // y += W^T x
void outer_acc(double* G, const double* u, const double* v, int m, int n);    // G += u v^T
}  // namespace serial

namespace par {
void matvec(const double* W, const double* x, double* y, int m, int n);
void matvec_acc(const double* W, const double* x, double* y, int m, int n);
void matvec_t_acc(const double* W, const double* x, double* y, int m, int n);
void outer_acc(double* G, const double* u, const double* v, int m, int n);
}  // namespace par

// dispatchers used by the tensor layer: parallel above the cutoff
void matvec(const double* W, const double* x, double* y, int m, int n);
void matvec_acc(const double* W, const double* x, double* y, int m, int n);
void matvec_t_acc(const double* W, const double* x, double* y, int m, int n);
void outer_acc(double* G, const double* u, const double* v, int m, int n);

}  // namespace dglstm::kernels

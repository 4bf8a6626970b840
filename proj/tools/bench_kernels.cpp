// Times the serial reference kernels against the OpenMP versions on a range
// of shapes and confirms the outputs are bit-identical. Exits nonzero on any
// mismatch, so it doubles as a standalone consistency check.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dglstm/kernels.hpp"
#include "dglstm/rng.hpp"

namespace {

using dglstm::Rng;
namespace kn = dglstm::kernels;

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, long reps) {
  const auto start = Clock::now();
  for (long r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count() / reps;
}

std::vector<double> random_vec(Rng& rng, long n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

bool bytes_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads=%d\n", omp_get_max_threads());
#else
  std::printf("threads=1 (built without OpenMP)\n");
#endif
  std::printf("%-12s %6s %6s %12s %12s %8s %6s\n", "op", "m", "n", "serial_ms",
              "parallel_ms", "speedup", "match");

  Rng rng(42);
  bool all_match = true;
  const int shapes[][2] = {{64, 64},     {256, 256},   {1024, 1024},
                           {4096, 1024}, {1024, 4096}, {4096, 4096}};
  for (const auto& shape : shapes) {
    const int m = shape[0], n = shape[1];
    const long reps = std::max<long>(1, 40'000'000 / (static_cast<long>(m) * n));
    auto W = random_vec(rng, static_cast<long>(m) * n);
    auto x = random_vec(rng, n);
    auto u = random_vec(rng, m);
    std::vector<double> ys(m), yp(m), ts(n), tp(n);
    std::vector<double> Gs(W), Gp(W);

    // y = W x
    const double s1 = time_ms([&] { kn::serial::matvec(W.data(), x.data(), ys.data(), m, n); }, reps);
    const double p1 = time_ms([&] { kn::par::matvec(W.data(), x.data(), yp.data(), m, n); }, reps);
    bool ok = bytes_equal(ys, yp);
    all_match = all_match && ok;
    std::printf("%-12s %6d %6d %12.4f %12.4f %7.2fx %6s\n", "matvec", m, n, s1, p1,
                s1 / p1, ok ? "yes" : "NO");

    // t += W^T u
    std::fill(ts.begin(), ts.end(), 0.0);
    std::fill(tp.begin(), tp.end(), 0.0);
    const double s2 =
        time_ms([&] { kn::serial::matvec_t_acc(W.data(), u.data(), ts.data(), m, n); }, reps);
    const double p2 =
        time_ms([&] { kn::par::matvec_t_acc(W.data(), u.data(), tp.data(), m, n); }, reps);
    ok = bytes_equal(ts, tp);
    all_match = all_match && ok;
    std::printf("%-12s %6d %6d %12.4f %12.4f %7.2fx %6s\n", "matvec_t_acc", m, n, s2, p2,
                s2 / p2, ok ? "yes" : "NO");

    // G += u x^T
    const double s3 =
        time_ms([&] { kn::serial::outer_acc(Gs.data(), u.data(), x.data(), m, n); }, reps);
    const double p3 =
        time_ms([&] { kn::par::outer_acc(Gp.data(), u.data(), x.data(), m, n); }, reps);
    // both sides ran the same number of accumulations on the same start state
    ok = bytes_equal(Gs, Gp);
    all_match = all_match && ok;
    std::printf("%-12s %6d %6d %12.4f %12.4f %7.2fx %6s\n", "outer_acc", m, n, s3, p3,
                s3 / p3, ok ? "yes" : "NO");
  }

  if (!all_match) {
    std::fprintf(stderr, "serial and parallel kernels disagree\n");
    return 1;
  }
  return 0;
}

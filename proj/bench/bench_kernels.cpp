// Compares the OpenMP compute kernels against the serial reference
// implementation: verifies bitwise-identical results, then times both.
//
// Usage: bench_kernels [size] [repeats]

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "elemstruct/kdtree.hpp"
#include "elemstruct/kernels.hpp"
#include "elemstruct/metrics.hpp"

using namespace es;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
double time_best_of(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    fn();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 256;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  std::cout << "threads=" << kernels::thread_count() << " size=" << n << " repeats=" << repeats
            << "\n\n";

  Rng rng(1234);
  std::vector<double> a(static_cast<std::size_t>(n) * n), b(a.size()), c_ref(a.size()),
      c_par(a.size());
  for (auto& v : a) v = rng.uniform(-1, 1);
  for (auto& v : b) v = rng.uniform(-1, 1);

  kernels::matmul_ref(a.data(), b.data(), c_ref.data(), n, n, n);
  kernels::matmul(a.data(), b.data(), c_par.data(), n, n, n);
  if (c_ref != c_par) {
    std::cerr << "FAIL: parallel matmul differs from the serial reference\n";
    return 1;
  }
  std::cout << "matmul outputs: bitwise identical\n";

  const double t_ref = time_best_of(
      repeats, [&] { kernels::matmul_ref(a.data(), b.data(), c_ref.data(), n, n, n); });
  const double t_par =
      time_best_of(repeats, [&] { kernels::matmul(a.data(), b.data(), c_par.data(), n, n, n); });
  const double flops = 2.0 * n * double(n) * n;
  std::cout << "matmul serial:   " << t_ref * 1e3 << " ms  (" << flops / t_ref / 1e9
            << " GFLOP/s)\n";
  std::cout << "matmul parallel: " << t_par * 1e3 << " ms  (" << flops / t_par / 1e9
            << " GFLOP/s)  speedup x" << t_ref / t_par << "\n\n";

  // Chamfer: kd-tree versus brute force on random clouds
  const std::size_t pts = static_cast<std::size_t>(n) * 8;
  PointCloud pa(3, pts), pb(3, pts);
  for (auto& v : pa.coords) v = rng.uniform(-1, 1);
  for (auto& v : pb.coords) v = rng.uniform(-1, 1);
  const double chamfer_tree = chamfer_symmetric(pa, pb);
  const double chamfer_brute = chamfer_symmetric_brute(pa, pb);
  if (std::abs(chamfer_tree - chamfer_brute) >
      1e-9 * std::max(1.0, std::abs(chamfer_brute))) {
    std::cerr << "FAIL: tree chamfer " << chamfer_tree << " vs brute " << chamfer_brute << "\n";
    return 1;
  }
  std::cout << "chamfer values: tree == brute force (" << pts << " points)\n";
  const double t_tree = time_best_of(repeats, [&] { (void)chamfer_symmetric(pa, pb); });
  const double t_brute = time_best_of(repeats, [&] { (void)chamfer_symmetric_brute(pa, pb); });
  std::cout << "chamfer kd-tree: " << t_tree * 1e3 << " ms\n";
  std::cout << "chamfer brute:   " << t_brute * 1e3 << " ms  speedup x" << t_brute / t_tree
            << "\n";
  return 0;
}

// Timing harness for the jet convolution kernel: the OpenMP dense gather
// against the serial sparse reference, plus a full forward-run timing.
#include <chrono>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stokesdtn/scenario.hpp"
#include "stokesdtn/symbol_calculus.hpp"

using namespace stokesdtn;
using clk = std::chrono::steady_clock;

static double ms_since(clk::time_point t0) {
  return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

int main(int argc, char** argv) {
  int vars = 5, order = 10, reps = 200;
  if (argc > 1) vars = std::atoi(argv[1]);
  if (argc > 2) order = std::atoi(argv[2]);
  if (argc > 3) reps = std::atoi(argv[3]);

#ifdef _OPENMP
  std::cout << "threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "threads: 1 (built without OpenMP)\n";
#endif
  std::cout << "jet space: " << vars << " vars, order " << order << "\n";

  const auto sp = JetSpace::make(vars, 0, order, std::vector<double>(static_cast<size_t>(vars), 0.0));
  std::cout << "monomials: " << sp->monomials().size()
            << ", product pairs: " << sp->pair_count_through(order) << "\n";

  Rng rng(42);
  const Jet a = random_jet(sp, &rng, 1.0);
  const Jet b = random_jet(sp, &rng, 1.0);

  // warmup + correctness cross-check
  const Jet fast = a * b;
  const Jet slow = mul_reference(a, b);
  const double delta = max_abs_diff(fast, slow, order);
  const double scale = std::max(1.0, fast.max_abs(order));
  std::cout << "kernel agreement: max |gather - reference| / scale = " << delta / scale << "\n";

  auto t0 = clk::now();
  for (int i = 0; i < reps; ++i) {
    volatile double sink = (a * b).max_abs(0);
    (void)sink;
  }
  const double gather_ms = ms_since(t0) / reps;

  t0 = clk::now();
  for (int i = 0; i < reps; ++i) {
    volatile double sink = mul_reference(a, b).max_abs(0);
    (void)sink;
  }
  const double ref_ms = ms_since(t0) / reps;

  std::cout << "gather kernel: " << gather_ms << " ms/mul\n";
  std::cout << "reference:     " << ref_ms << " ms/mul\n";
  std::cout << "speedup:       " << ref_ms / gather_ms << "x\n";

  // end-to-end: one symbol recursion, the engine's dominant workload
  const RandomScenario sc = make_random_scenario(3, 6, 7);
  t0 = clk::now();
  const SystemMatrices mats = assemble(sc.metric);
  const double asm_ms = ms_since(t0);
  t0 = clk::now();
  for (const auto& dir : sc.directions) {
    const SymbolSequence seq = compute_symbol_sequence(mats, dir, 4);
    volatile double sink = seq.q(-3).entries.max_abs(0);
    (void)sink;
  }
  const double fwd_ms = ms_since(t0);
  std::cout << "forward n=3 K=6: assemble " << asm_ms << " ms, recursion depth 4 x "
            << sc.directions.size() << " directions " << fwd_ms << " ms\n";
  return delta / scale < 1e-13 ? 0 : 1;
}

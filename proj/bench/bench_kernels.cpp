// Serial versus parallel timing of the data-parallel kernels.
// Usage: bench_kernels [repeats]   (threads: OMP_NUM_THREADS / CYLBILL_THREADS)

#include "cylbill/diagnostics.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>

using namespace cylbill;

namespace {

double seconds(const std::function<void()>& f, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, double serial, double parallel, bool same) {
  fmt::print("{:<28} {:>10.4f} {:>10.4f} {:>8.2f}x  {}\n", name, serial, parallel, serial / parallel,
             same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  fmt::print("threads: {}; best of {} runs\n", thread_budget(), repeats);
  fmt::print("{:<28} {:>10} {:>10} {:>9}\n", "kernel", "serial s", "parallel s", "speedup");

  {
    const auto hb = hard_ball_system(HardBallParams{5, 2, {1, 2, 3, 4, 5}, 0.05}).system;
    TransverseResult a, b;
    const double s = seconds([&] { a = is_transverse(hb, Exec::serial); }, repeats);
    const double p = seconds([&] { b = is_transverse(hb, Exec::parallel); }, repeats);
    row("is_transverse (N=5 balls)", s, p, a.transverse == b.transverse && a.distinct_spans == b.distinct_spans);
  }
  {
    const auto hb = hard_ball_system(HardBallParams{3, 2, {1, 2, 3}, 0.08}).system;
    const SymbolicSequence sigma{0, 1, 2, 0, 1, 2};
    SamplingOptions opt;
    DeltaResult a, b;
    opt.exec = Exec::serial;
    const double s = seconds([&] { a = delta_sigma(hb, sigma, 400, 7, opt); }, repeats);
    opt.exec = Exec::parallel;
    const double p = seconds([&] { b = delta_sigma(hb, sigma, 400, 7, opt); }, repeats);
    row("delta_sigma (400 samples)", s, p, a.per_sample == b.per_sample);
  }
  {
    HardBallParams params;
    params.n = 3;
    params.masses = {1, 1, 1};
    params.r = 0.24;
    const auto build = hard_ball_system(params);
    ScanOptions opt;
    opt.orbits = 400;
    opt.checkpoints = {20, 200};
    opt.flow.horizon = 1e4;
    const PhaseSampler sampler = [&](Rng& rng) { return near_splitting_hard_ball_phase(build, rng); };
    ScanResult a, b;
    opt.exec = Exec::serial;
    const double s = seconds([&] { a = splitting_scan(build.system, sampler, opt); }, repeats);
    opt.exec = Exec::parallel;
    const double p = seconds([&] { b = splitting_scan(build.system, sampler, opt); }, repeats);
    row("splitting_scan (400 orbits)", s, p, a.split == b.split && a.valid == b.valid);
  }
  return 0;
}

// Serial vs OpenMP probe runs over the CIU stack family of one consistent
// pair (every probe runs to completion, nothing short-circuits).

#include <benchmark/benchmark.h>
#include <omp.h>

#include "mlq/equivalence.hpp"
#include "mlq/surface.hpp"

using namespace mlq;

namespace {

std::vector<Probe> probes(std::size_t samples) {
  Expr lhs = to_core(parse_expr(
      "letrec sum/1(L) = case L of [H|T] then H + apply sum/1(T) else 0 in apply sum/1([1|[2|[3|[4|[5|[]]]]]])"));
  Expr rhs = to_core(parse_expr("let X = 10 in X + 5"));
  Budget b;
  b.samples = samples;
  std::vector<Probe> out;
  for (bool flipped : {false, true}) {
    for (const auto& k : ciu_stacks(lhs, rhs, b)) {
      Probe p;
      p.stack = k;
      p.lhs = flipped ? rhs : lhs;
      p.rhs = flipped ? lhs : rhs;
      p.flipped = flipped;
      out.push_back(p);
    }
  }
  return out;
}

void BM_serial(benchmark::State& st) {
  auto ps = probes(static_cast<std::size_t>(st.range(0)));
  Budget b;
  for (auto _ : st) benchmark::DoNotOptimize(run_probes_serial(ps, ProbeCheck::Termination, b));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * ps.size()));
}

void BM_parallel(benchmark::State& st) {
  auto ps = probes(static_cast<std::size_t>(st.range(0)));
  omp_set_num_threads(static_cast<int>(st.range(1)));
  Budget b;
  for (auto _ : st) benchmark::DoNotOptimize(run_probes_parallel(ps, ProbeCheck::Termination, b));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * ps.size()));
}

}  // namespace

BENCHMARK(BM_serial)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel)->ArgsProduct({{100, 500}, {1, 2, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

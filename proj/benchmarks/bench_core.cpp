#include "nanorod/crack.hpp"
#include "nanorod/elastic_limit.hpp"
#include "nanorod/energy.hpp"
#include "nanorod/generators.hpp"

#include <benchmark/benchmark.h>

using namespace nanorod;

namespace {

CellEnergyModel trunc_model() { return CellEnergyModel::pair(PairPotentialModel{TruncHarmonic{1.0, 0.3, 0.3}}); }

CrossSection block2x2() { return build_cross_section({{0, 0}, {1, 0}, {0, 1}, {1, 1}}); }

Deformation bend(int k) {
  FrameCurve fc = build_frame_curve({{SegmentSpec::Kind::Arc, 2.0, 0.2}}, {});
  return smooth_frame_config(RecoveryAnsatz{fc, k, {}, {}}, block2x2());
}

void BM_TotalEnergy(benchmark::State& st) {
  const CellEnergyModel m = trunc_model();
  const Deformation d = bend(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(total_energy(m, d).energy);
  st.counters["cells"] = static_cast<double>(d.lattice->cells().size());
}
BENCHMARK(BM_TotalEnergy)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_EnergyGradient(benchmark::State& st) {
  const CellEnergyModel m = trunc_model();
  const Deformation d = bend(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(energy_gradient(m, d).data());
}
BENCHMARK(BM_EnergyGradient)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_HessianForms(benchmark::State& st) {
  const CellEnergyModel m = trunc_model();
  const CrossSection cs = block2x2();
  for (auto _ : st) benchmark::DoNotOptimize(hessian_forms(m, cs));
}
BENCHMARK(BM_HessianForms)->Unit(benchmark::kMicrosecond);

void BM_Q3relMatrix(benchmark::State& st) {
  const CrossSection cs = block2x2();
  const QuadraticFormTable Q = hessian_forms(trunc_model(), cs);
  for (auto _ : st) benchmark::DoNotOptimize(q3rel_matrix(cs, Q));
}
BENCHMARK(BM_Q3relMatrix)->Unit(benchmark::kMicrosecond);

void BM_PhiExplicit(benchmark::State& st) {
  const CellEnergyModel m = trunc_model();
  const CrossSection cs = block2x2();
  const Vec3 u(0.5, 0.1, 0.0);
  for (auto _ : st) benchmark::DoNotOptimize(phi_explicit_masspring(u, m, cs));
}
BENCHMARK(BM_PhiExplicit)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

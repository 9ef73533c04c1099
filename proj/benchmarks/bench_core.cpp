#include <benchmark/benchmark.h>

#include "anisotens/classifier.hpp"
#include "anisotens/maxent.hpp"
#include "anisotens/point_groups.hpp"
#include "anisotens/traceless_bases.hpp"

using namespace anisotens;

static void BM_OrthogonalBasis(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    // Construct members directly so the memo table stays out of the timing.
    for (int m = 0; m <= 2 * order; ++m) {
      benchmark::DoNotOptimize(bases::orthogonal_member_poly(order, m).tensor());
    }
  }
}
BENCHMARK(BM_OrthogonalBasis)->Arg(4)->Arg(6)->Arg(8);

static void BM_Rotate(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const tensors::TensorD u = tensors::to_double(bases::monomial_traceless(order, 0, 0));
  const so3::Rotation r = so3::v5();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tensors::rotate(r, u));
  }
}
BENCHMARK(BM_Rotate)->Arg(2)->Arg(4)->Arg(6);

static void BM_HaarIntegrate(benchmark::State& state) {
  const so3::QuadratureGrid grid = so3::haar_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const double v = so3::integrate([](const so3::Rotation& p) { return p(0, 0) * p(0, 0); }, grid);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_HaarIntegrate)->Arg(6)->Arg(12);

static void BM_ReynoldsIcosahedral(benchmark::State& state) {
  const groups::PointGroup icosa = groups::build_group(groups::GroupKind::Icosahedral);
  const tensors::TensorD u = tensors::to_double(bases::monomial_traceless(6, 0, 0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(groups::reynolds_average(u, icosa));
  }
}
BENCHMARK(BM_ReynoldsIcosahedral);

static void BM_MaxEntSolve(benchmark::State& state) {
  maxent::MomentTargets targets;
  const tensors::TensorD base = tensors::to_double(bases::monomial_traceless(2, 0, 0));
  targets.entries.push_back({base, 0.3 * base});
  for (auto _ : state) {
    benchmark::DoNotOptimize(maxent::solve_maxent(targets));
  }
}
BENCHMARK(BM_MaxEntSolve)->Unit(benchmark::kMillisecond);

static void BM_FrameAlign(benchmark::State& state) {
  // A biaxial value off every invariant variety: the search runs the full
  // multistart schedule instead of exiting on the first exact fit.
  classifier::OrderParameterSet set;
  const auto& basis = bases::orthogonal_basis(2);
  set.tensors[classifier::OrderParam::Q2] =
      tensors::rotate(so3::v5(), 0.4 * basis.basis[0] + 0.15 * basis.basis[2] + 0.1 * basis.basis[1]);
  const groups::PointGroup dinf = groups::build_group(groups::GroupKind::Dinf);
  for (auto _ : state) {
    benchmark::DoNotOptimize(classifier::frame_align(set, dinf));
  }
}
BENCHMARK(BM_FrameAlign)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

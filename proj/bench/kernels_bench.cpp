// Serial reference kernels against the OpenMP kernels on the same field.

#include <benchmark/benchmark.h>

#include <vector>

#include "suflow/flow.hpp"
#include "suflow/initial_maps.hpp"
#include "suflow/kernels.hpp"

namespace {

using namespace suflow;

struct Fixture {
  MapField u;
  kernels::View v;
  std::vector<double> e, w, rhs, u_new;
  explicit Fixture(int n)
      : u(make_fourier_perturbed(TorusGrid::make(n, 1.0), 3, 7, 0.2)),
        v(view_of(u)),
        e(v.nodes()),
        w(v.nodes()),
        rhs(u.values.size()),
        u_new(u.values.size()) {
    kernels::serial::density(v, u.values.data(), 1.1, 1.0, e.data(), w.data());
    kernels::serial::alpha_rhs(v, u.values.data(), w.data(), rhs.data());
  }
};

template <bool Omp>
void BM_Density(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto s = Omp ? kernels::omp::density(f.v, f.u.values.data(), 1.1, 1.0, f.e.data(), f.w.data())
                 : kernels::serial::density(f.v, f.u.values.data(), 1.1, 1.0, f.e.data(), f.w.data());
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.v.nodes()));
}

template <bool Omp>
void BM_AlphaRhs(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double s = Omp ? kernels::omp::alpha_rhs(f.v, f.u.values.data(), f.w.data(), f.rhs.data())
                   : kernels::serial::alpha_rhs(f.v, f.u.values.data(), f.w.data(), f.rhs.data());
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.v.nodes()));
}

template <bool Omp>
void BM_Update(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto s = Omp ? kernels::omp::update(f.v, f.u.values.data(), f.rhs.data(), 1e-6, f.w.data(),
                                        f.u_new.data())
                 : kernels::serial::update(f.v, f.u.values.data(), f.rhs.data(), 1e-6, f.w.data(),
                                           f.u_new.data());
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.v.nodes()));
}

template <bool Omp>
void BM_Step(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  FlowParams p;
  FlowState s;
  s.field = f.u;
  const double dt = stable_dt(s.field, p);
  for (auto _ : state) {
    if (Omp) {
      kernels::omp::density(f.v, s.field.values.data(), p.alpha, 1.0, f.e.data(), f.w.data());
      kernels::omp::alpha_rhs(f.v, s.field.values.data(), f.w.data(), f.rhs.data());
      kernels::omp::update(f.v, s.field.values.data(), f.rhs.data(), dt, f.w.data(), f.u_new.data());
    } else {
      kernels::serial::density(f.v, s.field.values.data(), p.alpha, 1.0, f.e.data(), f.w.data());
      kernels::serial::alpha_rhs(f.v, s.field.values.data(), f.w.data(), f.rhs.data());
      kernels::serial::update(f.v, s.field.values.data(), f.rhs.data(), dt, f.w.data(),
                              f.u_new.data());
    }
    s.field.values.swap(f.u_new);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.v.nodes()));
}

}  // namespace

BENCHMARK(BM_Density<false>)->Name("density/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Density<true>)->Name("density/omp")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_AlphaRhs<false>)->Name("alpha_rhs/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_AlphaRhs<true>)->Name("alpha_rhs/omp")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Update<false>)->Name("update/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Update<true>)->Name("update/omp")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Step<false>)->Name("euler_step/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Step<true>)->Name("euler_step/omp")->Arg(64)->Arg(128)->Arg(256);

BENCHMARK_MAIN();

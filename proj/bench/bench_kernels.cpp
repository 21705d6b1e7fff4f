// Serial reference against OpenMP kernels, plus whole solver steps.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "qtime/curve_flow.hpp"
#include "qtime/eulerian.hpp"
#include "qtime/kernels.hpp"

namespace {

namespace k = qtime::kernels;

std::vector<double> noise(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

template <bool Omp>
void BM_TransportFlux(benchmark::State& st) {
    const int d = 2;
    const std::size_t N = static_cast<std::size_t>(st.range(0)) * st.range(0);
    const auto B = noise(d * N, 1), grad = noise(d * d * N, 2);
    std::vector<double> inv(N, 1.0), out(N);
    for (auto _ : st) {
        if constexpr (Omp) {
            k::omp::transport_flux(d, N, B, grad, inv, out);
        } else {
            k::serial::transport_flux(d, N, B, grad, inv, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(N));
}
BENCHMARK(BM_TransportFlux<false>)->Arg(128)->Arg(512);
BENCHMARK(BM_TransportFlux<true>)->Arg(128)->Arg(512);

template <bool Omp>
void BM_NormFloor(benchmark::State& st) {
    const int d = 3;
    const std::size_t N = static_cast<std::size_t>(st.range(0)) * st.range(0) * st.range(0);
    const auto B = noise(d * N, 3);
    std::vector<double> rho(N), inv(N);
    for (auto _ : st) {
        if constexpr (Omp) {
            k::omp::norm_floor(d, N, B, {}, 1e-8, rho, inv);
        } else {
            k::serial::norm_floor(d, N, B, {}, 1e-8, rho, inv);
        }
        benchmark::DoNotOptimize(inv.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(N));
}
BENCHMARK(BM_NormFloor<false>)->Arg(64);
BENCHMARK(BM_NormFloor<true>)->Arg(64);

void BM_EulerianShortStep(benchmark::State& st) {
    const double centre[2] = {0.5, 0.5};
    const int n = static_cast<int>(st.range(0));
    auto s = qtime::eulerian::lift_curve(qtime::curve::make_circle(8 * n, 0.25, centre), n);
    const double dth = qtime::eulerian::admissible_dtheta_short(s);
    for (auto _ : st) {
        auto next = qtime::eulerian::step_eulerian_short(s, dth);
        benchmark::DoNotOptimize(next.B.data());
    }
}
BENCHMARK(BM_EulerianShortStep)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CurveShorteningStep(benchmark::State& st) {
    const double centre[2] = {0.5, 0.5};
    auto c = qtime::curve::make_circle(static_cast<int>(st.range(0)), 0.25, centre);
    for (auto _ : st) {
        auto next = qtime::curve::step_curve_shortening(c, 1e-6);
        benchmark::DoNotOptimize(next.x.data());
    }
}
BENCHMARK(BM_CurveShorteningStep)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();

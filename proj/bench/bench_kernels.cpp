#include <benchmark/benchmark.h>

#include <random>

#include "dilution/kernels.hpp"

using namespace dl::kernels;

namespace {

std::vector<cplx> random_matrix(int n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    std::vector<cplx> m(std::size_t{1} << (2 * n));
    for (auto& v : m) v = {g(rng), g(rng)};
    return m;
}

LocalLayer step_layer(int n, std::vector<cplx>& diag) {
    LocalLayer l;
    Super4 s = compose(pauli_channel_super4(1 - 0.00075, 0.00025, 0.00025, 0.00025), unitary_super4(rx(0.1)));
    l.ops.assign(n, s);
    l.active.assign(n, 1);
    diag.resize(std::size_t{1} << n);
    for (std::size_t a = 0; a < diag.size(); ++a) diag[a] = std::polar(1.0, 0.1 * static_cast<double>(__builtin_popcountll(a)));
    l.pre_diag = diag.data();
    return l;
}

void BM_LayerParallel(benchmark::State& st) {
    int n = static_cast<int>(st.range(0));
    auto m = random_matrix(n);
    std::vector<cplx> diag;
    auto l = step_layer(n, diag);
    for (auto _ : st) {
        apply_layer(m.data(), n, l);
        benchmark::DoNotOptimize(m.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(m.size()));
}

void BM_LayerReference(benchmark::State& st) {
    int n = static_cast<int>(st.range(0));
    auto m = random_matrix(n);
    std::vector<cplx> diag;
    auto l = step_layer(n, diag);
    for (auto _ : st) {
        reference::apply_layer(m.data(), n, l);
        benchmark::DoNotOptimize(m.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(m.size()));
}

void BM_AccumulateParallel(benchmark::State& st) {
    int n = static_cast<int>(st.range(0));
    auto m = random_matrix(n);
    auto out = random_matrix(n);
    std::vector<cplx> diag;
    auto l = step_layer(n, diag);
    for (auto _ : st) {
        accumulate_layer(m.data(), out.data(), n, l);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_AccumulateReference(benchmark::State& st) {
    int n = static_cast<int>(st.range(0));
    auto m = random_matrix(n);
    auto out = random_matrix(n);
    std::vector<cplx> diag;
    auto l = step_layer(n, diag);
    for (auto _ : st) {
        reference::accumulate_layer(m.data(), out.data(), n, l);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_SvRxParallel(benchmark::State& st) {
    int n = static_cast<int>(st.range(0));
    std::vector<cplx> psi(std::size_t{1} << n, cplx(1.0));
    std::vector<double> ang(n, 0.1);
    for (auto _ : st) {
        sv_apply_rx_layer(psi.data(), n, ang);
        benchmark::DoNotOptimize(psi.data());
    }
}

void BM_SvRxReference(benchmark::State& st) {
    int n = static_cast<int>(st.range(0));
    std::vector<cplx> psi(std::size_t{1} << n, cplx(1.0));
    std::vector<double> ang(n, 0.1);
    for (auto _ : st) {
        reference::sv_apply_rx_layer(psi.data(), n, ang);
        benchmark::DoNotOptimize(psi.data());
    }
}

}  // namespace

BENCHMARK(BM_LayerParallel)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LayerReference)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccumulateParallel)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccumulateReference)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SvRxParallel)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SvRxReference)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

// Serial reference against the OpenMP variant for each kernel, plus one full nonlinear term.
// Run with OMP_NUM_THREADS set to the cores you want compared.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "forcerecon/kernels/kernels.hpp"
#include "forcerecon/spectral/operators.hpp"
#include "forcerecon/spectral/random.hpp"

using namespace forcerecon;
using kernels::Backend;

namespace {

Backend backend(const benchmark::State& state) { return state.range(0) == 0 ? Backend::serial : Backend::parallel; }

std::vector<kernels::Complex> random_buffer(std::size_t n) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    std::vector<kernels::Complex> v(n);
    for (auto& x : v) x = {d(rng), d(rng)};
    return v;
}

void BM_fft(benchmark::State& state) {
    const int m = int(state.range(1)), dim = 2;
    auto data = random_buffer(std::size_t(m) * m);
    for (auto _ : state) {
        kernels::fft(backend(state), data.data(), dim, m, -1);
        kernels::fft(backend(state), data.data(), dim, m, +1);
        benchmark::DoNotOptimize(data.data());
    }
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_scatter_gather(benchmark::State& state) {
    const int m = int(state.range(1)), K = m / 2 - 1;
    const std::size_t side = 2 * K + 1, n = side * side, size = std::size_t(m) * m;
    std::vector<std::size_t> map(n);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) map[i * side + j] = ((i + m - K) % m) * m + (j + m - K) % m;
    const auto a = random_buffer(n), b = random_buffer(n);
    std::vector<kernels::Complex> buffer(size), oa(n), ob(n);
    for (auto _ : state) {
        kernels::scatter(backend(state), a.data(), b.data(), map.data(), n, buffer.data(), size);
        kernels::gather(backend(state), buffer.data(), map.data(), n, 1.0, oa.data(), ob.data());
        benchmark::DoNotOptimize(oa.data());
    }
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_dot(benchmark::State& state) {
    const std::size_t n = std::size_t(state.range(1)) * std::size_t(state.range(1));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u;
    std::vector<std::vector<double>> a(2, std::vector<double>(n)), c(2, std::vector<double>(n));
    for (int j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < n; ++i) a[j][i] = u(rng), c[j][i] = u(rng);
    const double* pa[] = {a[0].data(), a[1].data()};
    const double* pc[] = {c[0].data(), c[1].data()};
    std::vector<double> out(n);
    for (auto _ : state) {
        kernels::dot(backend(state), pa, pc, 2, n, out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

// B(u, u) for a random divergence-free field: the dominant cost of an NSE step.
void BM_nse_bilinear(benchmark::State& state) {
    const WaveGrid g(2, int(state.range(1)) / 2 - 1);
    std::mt19937_64 rng(3);
    const auto u = random_solenoidal(g, rng, 1.0);
    const Backend before = kernels::active_backend();
    kernels::set_active_backend(backend(state));
    for (auto _ : state) benchmark::DoNotOptimize(nse_bilinear(u, u));
    kernels::set_active_backend(before);
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void sizes(benchmark::internal::Benchmark* b) {
    for (int backend : {0, 1})
        for (int m : {48, 64, 128, 256}) b->Args({backend, m});
}

}  // namespace

BENCHMARK(BM_fft)->Apply(sizes);
BENCHMARK(BM_scatter_gather)->Apply(sizes);
BENCHMARK(BM_dot)->Apply(sizes);
BENCHMARK(BM_nse_bilinear)->Apply(sizes);

BENCHMARK_MAIN();

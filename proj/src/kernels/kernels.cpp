#include "forcerecon/kernels/kernels.hpp"

#include <fftw3.h>

#include <atomic>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace forcerecon::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::parallel};

struct PlanCache {
    std::mutex mu;
    std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    // One plan per (length, stride, sign); executed on arbitrary lines through the new-array
    // interface, which is thread-safe once the plan exists.
    fftw_plan get(int m, std::size_t stride, int sign) {
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_tuple(m, stride, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        const std::size_t span = stride * static_cast<std::size_t>(m - 1) + 1;
        auto* scratch = fftw_alloc_complex(span);
        int n = m;
        fftw_plan p = fftw_plan_many_dft(1, &n, 1, scratch, nullptr, static_cast<int>(stride), 0, scratch, nullptr,
                                         static_cast<int>(stride), 0, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        if (!p) throw std::runtime_error("FFTW failed to create a plan");
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

inline fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Backend active_backend() { return g_backend.load(); }
void set_active_backend(Backend b) { g_backend.store(b); }

void fft(Backend b, Complex* data, int dim, int m, int sign) {
    const std::size_t mm = static_cast<std::size_t>(m);
    const std::size_t total = dim == 2 ? mm * mm : mm * mm * mm;
    const std::size_t lines = total / mm;
    for (int axis = 0; axis < dim; ++axis) {
        std::size_t stride = 1;
        for (int a = axis + 1; a < dim; ++a) stride *= mm;
        fftw_plan plan = cache().get(m, stride, sign);
        // Line l: `outer` indexes the axes before `axis`, `inner` the ones after it.
        auto run = [&](std::size_t l) {
            const std::size_t outer = l / stride;
            const std::size_t inner = l % stride;
            Complex* start = data + outer * stride * mm + inner;
            fftw_execute_dft(plan, as_fftw(start), as_fftw(start));
        };
        const long long nl = static_cast<long long>(lines);
        if (b == Backend::parallel) {
#pragma omp parallel for schedule(static)
            for (long long l = 0; l < nl; ++l) run(static_cast<std::size_t>(l));
        } else {
            for (long long l = 0; l < nl; ++l) run(static_cast<std::size_t>(l));
        }
    }
}

void scatter(Backend b, const Complex* coeff_a, const Complex* coeff_b, const std::size_t* map, std::size_t n,
             Complex* buffer, std::size_t buffer_size) {
    const long long nb = static_cast<long long>(buffer_size);
    const long long nn = static_cast<long long>(n);
    const Complex I(0.0, 1.0);
    if (b == Backend::parallel) {
#pragma omp parallel
        {
#pragma omp for schedule(static)
            for (long long i = 0; i < nb; ++i) buffer[i] = 0.0;
#pragma omp for schedule(static)
            for (long long i = 0; i < nn; ++i) buffer[map[i]] = coeff_b ? coeff_a[i] + I * coeff_b[i] : coeff_a[i];
        }
    } else {
        for (long long i = 0; i < nb; ++i) buffer[i] = 0.0;
        for (long long i = 0; i < nn; ++i) buffer[map[i]] = coeff_b ? coeff_a[i] + I * coeff_b[i] : coeff_a[i];
    }
}

void gather(Backend b, const Complex* buffer, const std::size_t* map, std::size_t n, double scale, Complex* out_a,
            Complex* out_b) {
    const long long nn = static_cast<long long>(n);
    auto body = [&](long long i) {
        const Complex c = buffer[map[i]];
        const Complex cc = std::conj(buffer[map[n - 1 - static_cast<std::size_t>(i)]]);
        if (out_b) {
            out_a[i] = 0.5 * scale * (c + cc);
            out_b[i] = Complex(0.0, -0.5) * scale * (c - cc);
        } else {
            out_a[i] = 0.5 * scale * (c + cc);
        }
    };
    if (b == Backend::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < nn; ++i) body(i);
    } else {
        for (long long i = 0; i < nn; ++i) body(i);
    }
}

void dot(Backend b, const double* const* a, const double* const* c, int count, std::size_t n, double* out) {
    const long long nn = static_cast<long long>(n);
    auto body = [&](long long i) {
        double s = 0.0;
        for (int j = 0; j < count; ++j) s += a[j][i] * c[j][i];
        out[i] = s;
    };
    if (b == Backend::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < nn; ++i) body(i);
    } else {
        for (long long i = 0; i < nn; ++i) body(i);
    }
}

void split(Backend b, const Complex* buffer, std::size_t n, double* re, double* im) {
    const long long nn = static_cast<long long>(n);
    auto body = [&](long long i) {
        re[i] = buffer[i].real();
        if (im) im[i] = buffer[i].imag();
    };
    if (b == Backend::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < nn; ++i) body(i);
    } else {
        for (long long i = 0; i < nn; ++i) body(i);
    }
}

void pack(Backend b, const double* re, const double* im, std::size_t n, Complex* buffer) {
    const long long nn = static_cast<long long>(n);
    auto body = [&](long long i) { buffer[i] = Complex(re[i], im ? im[i] : 0.0); };
    if (b == Backend::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < nn; ++i) body(i);
    } else {
        for (long long i = 0; i < nn; ++i) body(i);
    }
}

}  // namespace forcerecon::kernels

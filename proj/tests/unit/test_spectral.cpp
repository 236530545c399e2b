#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "forcerecon/kernels/kernels.hpp"
#include "forcerecon/spectral/mode_set.hpp"
#include "forcerecon/spectral/operators.hpp"
#include "forcerecon/spectral/random.hpp"
#include "forcerecon/spectral/snapshot_io.hpp"
#include "forcerecon/spectral/transform.hpp"

using namespace forcerecon;
using std::numbers::pi;

namespace {

// Direct evaluation of sum_k c_k e^{i k.x}, independent of the FFT path.
double naive_eval(const ScalarField& f, const std::array<double, 3>& x) {
    const WaveGrid& g = f.grid();
    Complex s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (f[i] == Complex(0.0, 0.0)) continue;
        const auto k = g.wavevector(i);
        s += f[i] * std::exp(Complex(0.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]));
    }
    return s.real();
}

double naive_grad(const ScalarField& f, int axis, const std::array<double, 3>& x) {
    const WaveGrid& g = f.grid();
    Complex s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (f[i] == Complex(0.0, 0.0)) continue;
        const auto k = g.wavevector(i);
        s += Complex(0.0, k[axis]) * f[i] * std::exp(Complex(0.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]));
    }
    return s.real();
}

// b(u, phi, psi) by quadrature on an m^2 grid, exact for trigonometric polynomials of degree < m.
double quadrature_b(const VectorField& u, const ScalarField& phi, const ScalarField& psi, int m) {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const std::array<double, 3> x{2 * pi * i / m, 2 * pi * j / m, 0.0};
            double adv = 0.0;
            for (int a = 0; a < 2; ++a) adv += naive_eval(u[a], x) * naive_grad(phi, a, x);
            s += adv * naive_eval(psi, x);
        }
    return s * 4 * pi * pi / (m * m);
}

double rel(double a, double scale) { return std::abs(a) / std::max(scale, 1e-300); }

}  // namespace

TEST_CASE("inverse transform matches the naive trigonometric sum") {
    std::mt19937_64 rng(7);
    for (int dim : {2, 3}) {
        const WaveGrid g(dim, 4);
        const auto f = random_scalar(g, rng);
        const auto p = to_physical(f);
        for (std::size_t i = 0; i < p.size(); i += 7) CHECK(std::abs(p[i] - naive_eval(f, grid_point(g, i))) < 1e-12);
        const auto back = from_physical(g, p);
        CHECK((back - f).max_abs() < 1e-14);
    }
}

TEST_CASE("paired transforms separate two real signals") {
    std::mt19937_64 rng(8);
    const WaveGrid g(2, 6);
    const auto a = random_scalar(g, rng);
    const auto b = random_scalar(g, rng);
    const auto c = random_scalar(g, rng);
    const auto ps = to_physical({&a, &b, &c});
    CHECK(ps.size() == 3);
    const auto pa = to_physical(a);
    const auto pc = to_physical(c);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(std::abs(ps[0][i] - pa[i]) < 1e-13);
        CHECK(std::abs(ps[2][i] - pc[i]) < 1e-13);
    }
    const auto back = from_physical(g, std::vector<const PhysicalField*>{&ps[0], &ps[1]});
    CHECK((back[0] - a).max_abs() < 1e-14);
    CHECK((back[1] - b).max_abs() < 1e-14);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
    std::mt19937_64 rng(9);
    const WaveGrid g(2, 12);
    const auto v = random_solenoidal(g, rng);
    const auto phi = random_scalar(g, rng);
    kernels::set_active_backend(kernels::Backend::serial);
    const auto s = advect(v, phi);
    kernels::set_active_backend(kernels::Backend::parallel);
    const auto p = advect(v, phi);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(s[i] == p[i]);
}

TEST_CASE("seminorm of a single mode") {
    const WaveGrid g(2, 4);
    ScalarField f(g);
    f.set_mode({1, 0, 0}, 1.0);
    CHECK(seminorm(f, 0.0) == doctest::Approx(2 * pi * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(seminorm(ScalarField(g), -1.0) == 0.0);
    ScalarField h(g);
    h.set_mode({3, 0, 0}, Complex(0.3, 0.4));
    for (double a : {-1.0, 0.5, 1.0, 2.0})
        CHECK(seminorm(h, a) == doctest::Approx(std::pow(3.0, a) * seminorm(h, 0.0)).epsilon(1e-13));
}

TEST_CASE("projections split a field exactly") {
    const WaveGrid g(2, 6);
    ScalarField f(g);
    f.set_mode({1, 0, 0}, 1.0);
    f.set_mode({3, 0, 0}, 2.0);
    const auto lo = project(f, 2, Part::low);
    CHECK(lo.mode({1, 0, 0}) == Complex(1.0, 0.0));
    CHECK(lo.mode({3, 0, 0}) == Complex(0.0, 0.0));

    ScalarField five(g);
    five.set_mode({3, 4, 0}, Complex(0.2, -0.1));
    const auto q = project(five, 4, Part::high);
    CHECK(seminorm(q, 0) == doctest::Approx(seminorm(q, 1) / 5).epsilon(1e-14));

    std::mt19937_64 rng(1);
    const auto r = random_scalar(g, rng);
    for (double N : {0.0, 1.0, 2.5, 4.0, 100.0}) {
        const auto sum = project(r, N, Part::low) + project(r, N, Part::high);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(sum[i] == r[i]);
    }
}

TEST_CASE("Leray projection") {
    const WaveGrid g(2, 6);
    VectorField v(g);
    v[0].set_mode({1, 0, 0}, 1.0);
    v[1].set_mode({1, 0, 0}, 1.0);
    const auto p = leray_project(v);
    CHECK(std::abs(p[0].mode({1, 0, 0})) < 1e-15);
    CHECK(std::abs(p[1].mode({1, 0, 0}) - 1.0) < 1e-15);
    CHECK(p.divergence_free_flag());

    std::mt19937_64 rng(3);
    const auto phi = random_scalar(g, rng);
    CHECK(leray_project(gradient(phi)).max_abs() < 1e-15);
    const auto s = random_solenoidal(g, rng);
    CHECK((leray_project(s) - s).max_abs() < 1e-14);
    CHECK(relative_divergence(s) < 1e-14);
}

TEST_CASE("advection of sin x by (sin y, 0)") {
    const WaveGrid g(2, 8);
    VectorField v(g);
    v[0].set_mode({0, 1, 0}, Complex(0.0, -0.5));
    ScalarField phi(g);
    phi.set_mode({1, 0, 0}, Complex(0.0, -0.5));
    const auto a = advect(v, phi);
    // cos x sin y = (sin(x + y) - sin(x - y)) / 2
    ScalarField expect(g);
    expect.set_mode({1, 1, 0}, Complex(0.0, -0.25));
    expect.set_mode({1, -1, 0}, Complex(0.0, 0.25));
    CHECK((a - expect).max_abs() < 1e-15);
    CHECK(advect(VectorField(g), phi).is_zero());
    CHECK(advect(v, ScalarField(g)).max_abs() == 0.0);
}

TEST_CASE("Taylor-Green self-advection is a pure gradient") {
    const WaveGrid g(2, 8);
    const auto u = sample(g, [](const std::array<double, 3>& x) {
        return std::array<double, 3>{std::sin(x[0]) * std::cos(x[1]), -std::cos(x[0]) * std::sin(x[1]), 0.0};
    });
    const auto adv = advect(u, u);
    // u.grad u = (sin 2x, sin 2y)/2
    CHECK(std::abs(adv[0].mode({2, 0, 0}) - Complex(0.0, -0.25)) < 1e-14);
    CHECK(std::abs(adv[1].mode({0, 2, 0}) - Complex(0.0, -0.25)) < 1e-14);
    ScalarField rest = adv[0];
    rest.set_mode({2, 0, 0}, 0.0);
    CHECK(rest.max_abs() < 1e-14);
    CHECK(nse_bilinear(u, u).max_abs() < 1e-14);
}

TEST_CASE("trilinear form against physical quadrature") {
    const WaveGrid g(2, 8);
    std::mt19937_64 rng(11);
    const int c = g.dealias_cutoff();
    auto boxed = [&](ScalarField f) { return dealias(f); };
    VectorField u = dealias(random_solenoidal(g, rng, 1.0, c));
    const auto phi = boxed(random_scalar(g, rng));
    const auto psi = boxed(random_scalar(g, rng));
    const double b1 = trilinear_b(u, phi, psi);
    const double q1 = quadrature_b(u, phi, psi, 3 * c + 1);
    const double q2 = quadrature_b(u, psi, phi, 3 * c + 1);
    const double scale = seminorm(u, 0) * seminorm(phi, 1) * seminorm(psi, 0);
    CHECK(rel(b1 - q1, scale) < 1e-11);
    CHECK(rel(b1 + q2, scale) < 1e-11);
    CHECK(rel(trilinear_b(u, phi, phi), scale) < 1e-12);
}

TEST_CASE("enstrophy cancellation in two dimensions") {
    const WaveGrid g(2, 12);
    std::mt19937_64 rng(12);
    const auto u = random_solenoidal(g, rng, 1.5);
    const auto B = nse_bilinear(u, u);
    const double scale = seminorm(u, 0.5) * seminorm(u, 1) * seminorm(u, 2);
    CHECK(std::abs(inner(B, laplacian(u))) / scale < 1e-11);
    CHECK(relative_divergence(B) < 1e-13);
}

TEST_CASE("Bernstein and Poincare inequalities on random fields") {
    const WaveGrid g(2, 10);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto f = random_scalar(g, rng, 0.5);
        for (double N : {1.0, 3.0, 6.5}) {
            const auto lo = low(f, N);
            const auto hi = high(f, N);
            for (double a : {-1.0, 0.0}) {
                for (double b : {0.0, 1.0, 2.0}) {
                    if (b < a) continue;
                    CHECK(seminorm(lo, b) <= std::pow(N, b - a) * seminorm(lo, a) * (1 + 1e-13));
                    CHECK(seminorm(hi, a) <= std::pow(N, a - b) * seminorm(hi, b) * (1 + 1e-13));
                }
            }
        }
    }
}

TEST_CASE("snapshots round-trip and reject corrupt input") {
    const auto dir = std::filesystem::temp_directory_path() / "forcerecon_snap_test";
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(2);
    const WaveGrid g(2, 5);
    const auto f = random_scalar(g, rng);
    write_snapshot(dir / "s.spf", f);
    CHECK((read_scalar_snapshot(dir / "s.spf") - f).max_abs() == 0.0);
    const auto v = random_solenoidal(WaveGrid(3, 3), rng);
    write_snapshot(dir / "v.spf", v);
    const auto w = read_vector_snapshot(dir / "v.spf");
    CHECK((w - v).max_abs() == 0.0);
    CHECK_THROWS_AS(read_scalar_snapshot(dir / "v.spf"), SnapshotError);
    write_file_atomically(dir / "bad.spf", "SPF2xxxxxxxxx");
    CHECK_THROWS_AS(read_snapshot(dir / "bad.spf"), SnapshotError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("mode sets pack low modes densely") {
    std::mt19937_64 rng(4);
    const WaveGrid g(2, 6);
    const ModeSet m(g, 2.0);
    CHECK(m.size() == 12);
    const auto f = random_scalar(g, rng);
    CHECK((m.unpack_scalar(m.pack(f)) - low(f, 2.0)).max_abs() == 0.0);
    const auto v = random_vector(g, rng);
    CHECK((m.unpack_vector(m.pack(v)) - low(v, 2.0)).max_abs() == 0.0);
}

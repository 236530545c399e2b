#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "forcerecon/conditions/conditions.hpp"
#include "forcerecon/spectral/transform.hpp"

using namespace forcerecon;

namespace {

constexpr double kPi = std::numbers::pi;

VelocityFunctionals flat(double V, double W = 0.0, double U = 0.0) {
    VelocityFunctionals f;
    f.eps = {0.0, 0.5};
    f.V = {V, V};
    f.W = {W, W};
    f.U = U;
    return f;
}

EnslavingMap one_entry(MapOrder order, double gain = 0.5) {
    FourierwiseTable t;
    t.linear.push_back({{3, 0, 0}, {1, 0, 0}, Complex(gain, 0.0)});
    return EnslavingMap::fourierwise(2, t, order);
}

// largest eigenvalue of [[a, c/2], [c/2, b]]
double eig_max(double a, double b, double c) {
    const double m = 0.5 * (a + b), d = 0.5 * (a - b);
    return m + std::sqrt(d * d + 0.25 * c * c);
}

}  // namespace

TEST_CASE("velocity functionals vanish for v = 0") {
    const WaveGrid g(2, 8);
    const auto f = velocity_functionals(VelocityProvider(g), 1.0, 0.1, {}, ConstantsTable());
    for (double v : f.V) CHECK(v == 0.0);
    for (double w : f.W) CHECK(w == 0.0);
    CHECK(f.U == 0.0);
}

TEST_CASE("shear flow functionals match the exact integrals") {
    const WaveGrid g(2, 13);  // 28 points per axis, so y = pi/2 is a node
    const auto v = sample(g, [](const std::array<double, 3>& x) { return std::array<double, 3>{std::sin(x[1]), 0.0, 0.0}; });
    ConstantsTable c;
    c.set("bernstein", 2.5);
    const auto f = velocity_functionals(VelocityProvider::constant(v), 2.0, 0.1, {0.3}, c);
    CHECK(f.eps.front() == 0.0);
    CHECK(f.eps.back() == doctest::Approx(1.0));
    CHECK(f.sup_L2 == doctest::Approx(std::sqrt(2.0) * kPi).epsilon(1e-12));
    CHECK(f.V.back() == doctest::Approx(2.5 * std::sqrt(2.0) * kPi).epsilon(1e-12));
    CHECK(f.V.front() == doctest::Approx(1.0).epsilon(1e-12));
    // |v|_{L^4}^4 = 2 pi * int sin^4 = 3 pi^2 / 2
    CHECK(f.W_at(0.5) == doctest::Approx(std::pow(1.5 * kPi * kPi, 0.25)).epsilon(1e-12));
    // time-independent: W is the norm itself
    CHECK(f.W_at(0.3) * f.W_at(0.3) == doctest::Approx(std::pow(f.V[2], 2)).epsilon(1e-12));
    // |grad v|_{L^2} = sqrt(2) pi > |v|_inf = 1
    CHECK(f.U == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(f.W_at(0.7));
}

TEST_CASE("time-averaged W follows the amplitude") {
    const WaveGrid g(2, 8);
    const auto base = taylor_green(g, 1.0);
    auto vp = VelocityProvider::analytic([base](double t) { return (1.0 + t) * base; }, g, 1.0);
    const auto f = velocity_functionals(vp, 1.0, 1e-3, {}, ConstantsTable());
    const double n0 = f.W_at(0.5) / std::sqrt(7.0 / 3.0);  // mean of (1+t)^2 over [0,1] is 7/3
    const auto f0 = velocity_functionals(VelocityProvider::constant(base), 1.0, 0.1, {}, ConstantsTable());
    CHECK(n0 == doctest::Approx(f0.W_at(0.5)).epsilon(1e-6));
    CHECK(f.V[0] == doctest::Approx(2.0 * f0.V[0]).epsilon(1e-12));
}

TEST_CASE("weak sieve interval by hand") {
    const auto r = sieve_td_mu_interval(flat(1.0), EnslavingMap::zero(2), 10, 1.0);
    CHECK(r.feasible);
    CHECK(*r.mu_lower == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*r.mu_upper == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(*r.mu > *r.mu_lower);
    CHECK(*r.mu <= *r.mu_upper);

    const auto z = sieve_td_mu_interval(flat(0.0), EnslavingMap::zero(1), 1, 3.0);
    CHECK(z.feasible);
    CHECK(*z.mu_lower == 0.0);
}

TEST_CASE("sieve relaxation time is the smallest dt multiple under the margin") {
    const double kappa = 0.5, dt = 0.01;
    const auto map = one_entry(kWeakOrder);
    const double L = *map.declared_lipschitz();
    SieveTDOptions o;
    o.dt = dt;
    const auto r = sieve_td_mu_interval(flat(0.2), map, 8, kappa, o);
    REQUIRE(r.feasible);
    REQUIRE(r.t_star);
    const double mu = *r.mu;
    const double X = (1 + L) * (1 + L) * std::pow(0.2 / kappa, 2);
    auto expr = [&](double t) { return std::exp(-mu * t) + kappa / mu * X; };
    CHECK(expr(*r.t_star) <= 0.9 + 1e-12);
    CHECK(expr(*r.t_star - dt) > 0.9);
    CHECK(std::abs(*r.t_star / dt - std::round(*r.t_star / dt)) < 1e-9);
    CHECK(*r.lambda_star < 1.0);
    CHECK(*r.lambda_star * *r.lambda_star == doctest::Approx(expr(*r.t_star)).epsilon(1e-12));
}

TEST_CASE("strong sieve interval with the U term dominating") {
    const auto r = sieve_td_mu_interval(flat(0.1, 0.0, 6.0), EnslavingMap::zero(2, kStrongOrder), 12, 2.0,
                                        SieveTDOptions{.strong = true});
    CHECK(*r.mu_lower == doctest::Approx(9.0 * 2.0).epsilon(1e-12));
    CHECK(*r.mu_upper == doctest::Approx(144.0 * 2.0 / 4.0).epsilon(1e-12));
    CHECK(r.feasible);
}

TEST_CASE("sieve interval rejects the wrong map order and reports minimal N") {
    CHECK_THROWS_AS(sieve_td_mu_interval(flat(1.0), EnslavingMap::zero(2, kStrongOrder), 4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sieve_td_mu_interval(flat(1.0), EnslavingMap::zero(8), 4, 1.0), std::invalid_argument);
    // eps = 0 only: lower = V^2 / kappa, upper N^2 kappa / 2, so N > sqrt(2) V / kappa
    VelocityFunctionals f;
    f.eps = {0.0};
    f.V = {10.0};
    f.W = {0.0};
    const auto r = sieve_td_mu_interval(f, EnslavingMap::zero(2), 5, 1.0);
    CHECK_FALSE(r.feasible);
    REQUIRE(r.minimal_N);
    CHECK(*r.minimal_N == 15);
}

TEST_CASE("weak sieve bounds are monotone") {
    for (double V : {0.1, 0.5, 1.0, 4.0})
        for (double gain : {0.1, 0.5, 2.0}) {
            const auto a = sieve_td_mu_interval(flat(V), one_entry(kWeakOrder, gain), 6, 1.0);
            const auto b = sieve_td_mu_interval(flat(V), one_entry(kWeakOrder, 2 * gain), 6, 1.0);
            const auto c = sieve_td_mu_interval(flat(2 * V), one_entry(kWeakOrder, gain), 6, 1.0);
            const auto d = sieve_td_mu_interval(flat(V), one_entry(kWeakOrder, gain), 7, 1.0);
            CHECK(*b.mu_lower >= *a.mu_lower);
            CHECK(*c.mu_lower >= *a.mu_lower);
            CHECK(*d.mu_upper > *a.mu_upper);
        }
}

TEST_CASE("gronwall rate") {
    CHECK(gronwall_rate(-1, -1, 0, 0.1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(gronwall_rate(-2, -4, 2, 1e-14) == doctest::Approx(-3.0 + std::sqrt(2.0)).epsilon(1e-12));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng), e = 0.5 * (u(rng) + 5.0) + 1e-3;
        CHECK(gronwall_rate(a, b, c, e) == doctest::Approx(eig_max(a, b, std::sqrt(1 + e) * c)).epsilon(1e-12));
    }
    CHECK_THROWS(gronwall_rate(1, 1, 1, 0.0));
}

TEST_CASE("nudging roots") {
    const auto [l1, l2] = roots_from_mu(3.0, 2.0);
    CHECK(l1 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(l2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS(roots_from_mu(1.0, 1.0));
}

TEST_CASE("nudging TD parameters") {
    ConstantsTable c;
    SUBCASE("band-limited force is feasible for every N") {
        const auto r = nudging_td_params(flat(1.0, 3.0), EnslavingMap::zero(1), 1, 1.0, c);
        CHECK(r.feasible);
    }
    SUBCASE("minimal N for unit data is 3") {
        const auto map = one_entry(kWeakOrder);
        const double L = *map.declared_lipschitz();
        const auto bad = nudging_td_params(flat(1.0, 1.0 / L), map, 2, 1.0, c);
        CHECK_FALSE(bad.feasible);
        REQUIRE(bad.minimal_N);
        CHECK(*bad.minimal_N == 3);
        const auto ok = nudging_td_params(flat(1.0, 1.0 / L), map, 3, 1.0, c);
        REQUIRE(ok.feasible);
        // mu1, mu2 give back lambda1, lambda2
        const auto [l1, l2] = roots_from_mu(*ok.mu1, *ok.mu2);
        CHECK(l1 == doctest::Approx(*ok.lambda1).epsilon(1e-14));
        CHECK(l2 == doctest::Approx(*ok.lambda2).epsilon(1e-14));
        CHECK(*ok.lambda2 == doctest::Approx(1.0 * *ok.alpha / (4 * L * L)).epsilon(1e-14));
        CHECK(*ok.rho < 0.0);
    }
    SUBCASE("rate matches the quadratic-form oracle") {
        const auto map = one_entry(kWeakOrder, 0.3);
        const double L = *map.declared_lipschitz(), kappa = 0.7, W = 0.4;
        const int N = 6;
        NudgingTDOptions o;
        o.gronwall_eps = 0.05;
        const auto r = nudging_td_params(flat(1.0, W), map, N, kappa, c, o);
        REQUIRE(r.feasible);
        const double a = -kappa * N * N;
        const double b = -(*r.lambda2 - 2 * *r.lambda2 * *r.lambda2 * L * L / (*r.alpha * kappa));
        const double cb = std::sqrt(*r.alpha) * W * std::sqrt(double(N));
        CHECK(*r.rho == doctest::Approx(eig_max(a, b, std::sqrt(1.05) * cb)).epsilon(1e-12));
        CHECK(*r.rho < 0.0);
    }
    CHECK_THROWS(nudging_td_params(flat(1.0), EnslavingMap::zero(1), 2, 1.0, c, NudgingTDOptions{.eps = 1.0}));
}

TEST_CASE("grashof report") {
    const WaveGrid g(2, 8);
    ConstantsTable c;
    c.set("c2", 2.0);
    const auto zero = grashof_report({VectorField(g)}, 0.5, 1.0, c);
    CHECK(zero.G == 0.0);
    CHECK(zero.shape == 0.0);
    CHECK(zero.R2 == 0.0);

    for (int k : {1, 3}) {
        VectorField f(g);
        f[1].set_mode({k, 0, 0}, Complex(0.0, 0.7));
        const double nu = 0.2;
        const auto r = grashof_report({f}, nu, 1.0, c);
        CHECK(r.shape == doctest::Approx(double(k)).epsilon(1e-12));
        CHECK(r.G_star == doctest::Approx(r.G / k).epsilon(1e-12));
        CHECK(r.R == doctest::Approx(std::sqrt(2.0) * nu * r.G).epsilon(1e-15));
        CHECK(r.R2 == doctest::Approx(2.0 * (k + r.R / (std::sqrt(2.0) * nu)) * r.R / std::sqrt(2.0)).epsilon(1e-12));
        const VectorField small = 1e-3 * f;
        CHECK(grashof_report({f}, nu, 1.0, c, &small).T1 == 0.0);
    }
}

TEST_CASE("sieve NSE condition") {
    ConstantsTable c;
    SieveNSEAssumptions a;
    a.sigma = 0.0;
    a.M0 = 1.0;
    a.R = 1.0;
    const auto r = sieve_nse_mu_interval(a, EnslavingMap::zero(2, kStrongOrder), 8, 1.0, c);
    const double cf = std::sqrt(std::log(std::numbers::e + 1.0));
    CHECK(*r.C_F == doctest::Approx(cf).epsilon(1e-12));
    CHECK(*r.C_F == doctest::Approx(1.14598).epsilon(1e-5));
    CHECK(*r.mu_lower == doctest::Approx(cf * cf).epsilon(1e-12));
    CHECK(*r.mu_upper == doctest::Approx(16.0));
    CHECK(r.feasible);

    a.M0 = 0.0;
    a.R = 3.0;
    a.sigma = 2.0;
    c.set("C_abg", 4.0);
    const auto s = sieve_nse_mu_interval(a, EnslavingMap::zero(2, kStrongOrder), 2, 0.5, c);
    const double want = 2.0 / 0.5 * 3.0 * std::sqrt(std::log(std::numbers::e + 2.0 + 6.0));
    CHECK(*s.C_F == doctest::Approx(want).epsilon(1e-12));
    CHECK_FALSE(s.feasible);
    CHECK(*s.minimal_N == int(std::floor(2 * want)) + 1);
    CHECK_THROWS(sieve_nse_mu_interval(a, EnslavingMap::zero(2), 2, 0.5, c));
}

TEST_CASE("nudging NSE condition") {
    ConstantsTable c;
    CHECK(log_factor(std::exp(2.0)) == doctest::Approx(2.0 * (std::sqrt(2.0) + 1.0)).epsilon(1e-14));
    const auto r = nudging_nse_params(1.0, EnslavingMap::zero(2), 64, 1.0, c);
    CHECK(r.feasible);
    CHECK(*r.delta_N == 1.0);
    CHECK(r.diagnostics[1].second == doctest::Approx(32.0));
    const auto bad = nudging_nse_params(1.0, EnslavingMap::zero(2), 30, 1.0, c);
    CHECK_FALSE(bad.feasible);
    CHECK(*bad.minimal_N == 33);

    const auto map = one_entry(kWeakOrder, 0.05);
    const double L = *map.declared_lipschitz();
    const auto m = nudging_nse_params(0.5, map, 200, 1.0, c);
    REQUIRE(m.feasible);
    const double q = L * 0.5 * log_factor(200) / 200.0;
    CHECK(*m.delta_N == doctest::Approx(1.0 - 16 * q * q).epsilon(1e-12));
    CHECK(*m.lambda2 == doctest::Approx(*m.alpha / (4 * L * L)).epsilon(1e-12));
    CHECK(*m.decay_rate > 0.0);
    CHECK(*m.decay_rate <= 200.0 * 200.0 / 8.0 + 1e-9);
}

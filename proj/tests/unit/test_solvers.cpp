#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "forcerecon/solvers/truth.hpp"
#include "forcerecon/spectral/random.hpp"

using namespace forcerecon;

namespace {

ScalarField sin_x(const WaveGrid& g, double amp = 1.0) {
    ScalarField f(g);
    f.set_mode({1, 0, 0}, Complex(0.0, -0.5 * amp));
    return f;
}

TDConfig td_config(const WaveGrid& g, double kappa, double tg_amp) {
    return {kappa, tg_amp == 0.0 ? VelocityProvider(g) : VelocityProvider::constant(taylor_green(g, tg_amp))};
}

double rel(const ScalarField& a, const ScalarField& b) { return seminorm(a - b, 0.0) / seminorm(b, 0.0); }
double rel(const VectorField& a, const VectorField& b) { return seminorm(a - b, 0.0) / seminorm(b, 0.0); }

// Composite Simpson weights over an even number of intervals.
double simpson(const std::vector<double>& y, double h) {
    REQUIRE(y.size() % 2 == 1);
    double s = y.front() + y.back();
    for (std::size_t i = 1; i + 1 < y.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
    return s * h / 3.0;
}

// Runs phi' = ... from the manufactured solution e^{-t} sin x and returns the error at T = 1.
double manufactured_td_error(double dt) {
    const WaveGrid g(2, 8);
    const double kappa = 0.5;
    const TDSystem sys(td_config(g, kappa, 0.3));
    const ScalarField s = sin_x(g);
    const ScalarField adv = advect(sys.config().velocity.field(0.0), s);
    // g = d/dt phi* + v . grad phi* - kappa Lap phi*, all proportional to e^{-t}.
    const ScalarField shape = -1.0 * s + adv - kappa * laplacian(s);
    auto force = force_of_time<ScalarField>([shape](double t) { return std::exp(-t) * shape; });
    ScalarField phi = s;
    const auto steps = step_count(1.0, dt);
    for (std::int64_t n = 0; n < steps; ++n) phi = step_td(phi, sys, force, n * dt, dt, n);
    return rel(phi, std::exp(-1.0) * s);
}

VectorField shear(const WaveGrid& g) {
    VectorField v(g);
    v[0].set_mode({0, 2, 0}, Complex(0.0, -0.5));
    v.mark_divergence_free(true);
    return v;
}

double manufactured_nse_error(double dt) {
    const WaveGrid g(2, 10);
    const double nu = 0.3;
    const NSESystem sys({nu, g});
    const VectorField a = taylor_green(g, 1.0), b = shear(g);
    auto exact = [&](double t) { return std::exp(-t) * a + std::cos(t) * b; };
    auto force = force_of_time<VectorField>([&](double t) {
        const VectorField u = exact(t);
        VectorField du = -std::exp(-t) * a + (-std::sin(t)) * b;
        du += nse_bilinear(u, u);
        du -= nu * laplacian(u);
        return du;
    });
    VectorField u = exact(0.0);
    const auto steps = step_count(1.0, dt);
    for (std::int64_t n = 0; n < steps; ++n) u = step_nse(u, sys, force, n * dt, dt, n);
    return rel(u, exact(1.0));
}

}  // namespace

TEST_CASE("heat decay is exact under the integrating factor") {
    const WaveGrid g(2, 8);
    const TDSystem sys(td_config(g, 0.7, 0.0));
    ScalarField phi(g);
    phi.set_mode({2, 1, 0}, Complex(0.3, -0.1));
    const auto out = step_td(phi, sys, constant_force(ScalarField(g)), 0.0, 0.05);
    CHECK(std::abs(out.mode({2, 1, 0}) - std::exp(-0.7 * 5 * 0.05) * phi.mode({2, 1, 0})) < 1e-12);
}

TEST_CASE("manufactured transport-diffusion solution converges at fourth order") {
    const double e1 = manufactured_td_error(1e-1), e2 = manufactured_td_error(5e-2), e3 = manufactured_td_error(2.5e-2);
    CHECK(e1 / e2 > std::pow(2.0, 3.5));
    CHECK(e2 / e3 > std::pow(2.0, 3.5));
}

TEST_CASE("manufactured Navier-Stokes solution converges at fourth order") {
    const double e1 = manufactured_nse_error(1e-1), e2 = manufactured_nse_error(5e-2), e3 = manufactured_nse_error(2.5e-2);
    CHECK(e1 / e2 > std::pow(2.0, 3.5));
    CHECK(e2 / e3 > std::pow(2.0, 3.5));
}

TEST_CASE("Taylor-Green decays in closed form") {
    const WaveGrid g(2, 10);
    const double nu = 0.4;
    const NSESystem sys({nu, g});
    const VectorField u0 = taylor_green(g, 1.3);
    VectorField u = u0;
    const double dt = 0.01;
    for (int n = 0; n < 100; ++n) u = step_nse(u, sys, constant_force(zero_like(u0)), n * dt, dt, n);
    CHECK(rel(u, std::exp(-2 * nu * 1.0) * u0) < 1e-12);
    CHECK(relative_divergence(u) < 1e-12);
    const NSESystem same(NSEConfig{nu, g});
    VectorField z = zero_like(u0);
    CHECK(step_nse(z, same, constant_force(zero_like(u0)), 0.0, dt).is_zero());
}

TEST_CASE("transport-diffusion energy identity residual is fourth order") {
    auto residual = [](double dt) {
        const WaveGrid g(2, 12);
        const double kappa = 0.5;
        const TDSystem sys(td_config(g, kappa, 0.5));
        std::mt19937_64 rng(4);
        const ScalarField g0 = low(random_scalar(g, rng, 1.0), 3);
        const ScalarField phi0 = low(random_scalar(g, rng, 1.0), 4);
        auto force = force_of_time<ScalarField>([g0](double t) { return std::cos(2 * t) * g0; });
        const auto steps = step_count(1.0, dt);
        std::vector<double> diss, work;
        ScalarField phi = phi0;
        for (std::int64_t n = 0; n <= steps; ++n) {
            diss.push_back(std::pow(seminorm(phi, 1.0), 2));
            work.push_back(inner(force({n, 0, n * dt}), phi));
            if (n < steps) phi = step_td(phi, sys, force, n * dt, dt, n);
        }
        const double lhs = 0.5 * std::pow(seminorm(phi, 0.0), 2) + kappa * simpson(diss, dt);
        const double rhs = 0.5 * std::pow(seminorm(phi0, 0.0), 2) + simpson(work, dt);
        return std::abs(lhs - rhs) / rhs;
    };
    const double r1 = residual(0.05), r2 = residual(0.025);
    CHECK(r2 < 1e-4);
    CHECK(r1 / r2 > std::pow(2.0, 3.5));
}

TEST_CASE("Navier-Stokes enstrophy balance residual is fourth order") {
    auto residual = [](double dt) {
        const WaveGrid g(2, 12);
        const double nu = 0.5;
        const NSESystem sys({nu, g});
        std::mt19937_64 rng(8);
        const VectorField g0 = low(random_solenoidal(g, rng, 1.0), 3);
        const VectorField u0 = 0.5 * low(random_solenoidal(g, rng, 1.0), 4);
        auto force = constant_force(g0);
        const auto steps = step_count(0.4, dt);
        std::vector<double> diss, work;
        VectorField u = u0;
        for (std::int64_t n = 0; n <= steps; ++n) {
            diss.push_back(std::pow(seminorm(u, 2.0), 2));
            work.push_back(-inner(g0, laplacian(u)));
            if (n < steps) u = step_nse(u, sys, force, n * dt, dt, n);
        }
        const double lhs = 0.5 * std::pow(seminorm(u, 1.0), 2) + nu * simpson(diss, dt);
        const double rhs = 0.5 * std::pow(seminorm(u0, 1.0), 2) + simpson(work, dt);
        return std::abs(lhs - rhs) / rhs;
    };
    const double r1 = residual(0.02), r2 = residual(0.01);
    CHECK(r1 < 1e-4);
    CHECK(r1 / r2 > std::pow(2.0, 3.5));
}

TEST_CASE("nudged transport-diffusion against diagonal oracles") {
    const WaveGrid g(2, 8);
    const double kappa = 0.8, mu = 5.0, dt = 0.01;
    const int N = 3;
    const ScalarField zero(g);
    auto obs = [&](int) { return zero; };
    auto no_force = constant_force(zero);
    for (auto split : {FeedbackSplit::matched, FeedbackSplit::folded}) {
        const NudgedTDSystem sys(td_config(g, kappa, 0.0), mu, N, split);
        ScalarField lowmode(g), highmode(g);
        lowmode.set_mode({2, 1, 0}, 1.0);
        highmode.set_mode({4, 0, 0}, 1.0);
        const auto a = step_nudged_td(lowmode, sys, no_force, obs, 0.0, dt);
        const auto b = step_nudged_td(highmode, sys, no_force, obs, 0.0, dt);
        const double z = -mu * dt;
        const double r4 = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
        const double want = split == FeedbackSplit::folded ? std::exp(-(kappa * 5 + mu) * dt) : std::exp(-kappa * 5 * dt) * r4;
        CHECK(std::abs(a.mode({2, 1, 0}) - want) < 1e-13);
        CHECK(std::abs(b.mode({4, 0, 0}) - std::exp(-kappa * 16 * dt)) < 1e-13);
    }
}

TEST_CASE("nudged Navier-Stokes with frozen nonlinearity against the diagonal oracle") {
    const WaveGrid g(2, 8);
    const double nu = 0.5, mu = 4.0, dt = 0.01;
    const NudgedNSESystem sys({nu, g, true}, mu, 2, FeedbackSplit::folded);
    VectorField v(g);
    v[1].set_mode({1, 0, 0}, 1.0);
    const VectorField zero = zero_like(v);
    auto out = step_nudged_nse(v, sys, constant_force(zero), [&](int) { return zero; }, 0.0, dt);
    CHECK(std::abs(out[1].mode({1, 0, 0}) - std::exp(-(nu + mu) * dt)) < 1e-13);
}

TEST_CASE("lockstep assimilation of an exact state stays exact") {
    const WaveGrid g(2, 12);
    const int N = 4;
    const TDSystem truth_sys(td_config(g, 1.0, 0.4));
    std::mt19937_64 rng(3);
    const auto map = EnslavingMap::power_law_tail(N, PowerLawTail{});
    const ScalarForce force(low(random_scalar(g, rng), N), map);
    const ScalarField phi0 = low(random_scalar(g, rng), 8);
    TruthOptions opt;
    opt.T = 0.5;
    opt.dt = 0.01;
    opt.N_obs = N;
    opt.state_stride = 1;
    const auto truth = generate_truth_td(truth_sys, force, phi0, opt);
    const ScalarField gf = force.full();

    SUBCASE("nudged equation") {
        const NudgedTDSystem sys(td_config(g, 1.0, 0.4), 20.0, N);
        ScalarField psi = phi0;
        for (std::int64_t n = 0; n < 50; ++n)
            psi = step_nudged_td(psi, sys, constant_force(gf), truth.observations.slots(n), n * opt.dt, opt.dt, n);
        CHECK(rel(psi, truth.final_state) < 1e-13);
    }
    SUBCASE("nudging system") {
        const NudgingTDSystem sys(td_config(g, 1.0, 0.4), map, 20.0, 100.0, N);
        NudgingTDSystem::State x{phi0, low(gf, N)};
        for (std::int64_t n = 0; n < 50; ++n)
            x = step_nudging_td_system(x, sys, truth.observations.slots(n), n * opt.dt, opt.dt);
        CHECK(rel(x.first, truth.final_state) < 1e-13);
        CHECK(rel(x.second, low(gf, N)) < 1e-13);
    }
}

TEST_CASE("nudging Navier-Stokes system keeps an exact state") {
    const WaveGrid g(2, 12);
    const int N = 3;
    std::mt19937_64 rng(6);
    const auto map = EnslavingMap::power_law_tail(N, PowerLawTail{});
    const VectorForce force(low(random_solenoidal(g, rng), N), map);
    const NSESystem truth_sys({1.0, g});
    TruthOptions opt;
    opt.T = 0.2;
    opt.dt = 0.01;
    opt.N_obs = N;
    const VectorField u0 = low(random_solenoidal(g, rng), 6);
    const auto truth = generate_truth_nse(truth_sys, force, u0, opt);
    const VectorField gf = leray_project(force.full());
    const NudgingNSESystem sys({1.0, g}, map, 10.0, 20.0, N);
    NudgingNSESystem::State x{u0, low(gf, N)};
    for (std::int64_t n = 0; n < 20; ++n) x = step_nudging_nse_system(x, sys, truth.observations.slots(n), n * opt.dt, opt.dt);
    CHECK(rel(x.first, truth.final_state) < 1e-12);
    CHECK(rel(x.second, low(gf, N)) < 1e-12);
    CHECK(relative_divergence(x.first) < 1e-12);

    const NudgedNSESystem nudged({1.0, g}, 10.0, N);
    VectorField v = u0;
    for (std::int64_t n = 0; n < 20; ++n)
        v = step_nudged_nse(v, nudged, constant_force(gf), truth.observations.slots(n), n * opt.dt, opt.dt, n);
    CHECK(rel(v, truth.final_state) < 1e-12);
}

TEST_CASE("nudging system error dynamics follow the 2x2 matrix exponential") {
    // v = 0, zero map, zero truth, one low mode: p' = -mu1 p + e, e' = -mu2 p.
    const WaveGrid g(2, 6);
    const double mu1 = 3.0, mu2 = 2.0, dt = 1e-3;
    const int N = 2;
    for (auto split : {FeedbackSplit::matched, FeedbackSplit::folded}) {
        const NudgingTDSystem sys(td_config(g, 1.0, 0.0), EnslavingMap::zero(N), mu1, mu2, N, split);
        ScalarField psi(g), l(g);
        psi.set_mode({1, 1, 0}, Complex(0.4, 0.1));
        l.set_mode({1, 1, 0}, Complex(-0.2, 0.3));
        const Complex p0 = psi.mode({1, 1, 0}), e0 = l.mode({1, 1, 0});
        const ScalarField zero(g);
        NudgingTDSystem::State x{psi, l};
        for (int n = 0; n < 1000; ++n) x = step_nudging_td_system(x, sys, [&](int) { return zero; }, n * dt, dt);
        // Eigenvalues -1 and -2 (roots of s^2 + 3 s + 2); closed-form exp(tA) for A = [[-3, 1], [-2, 0]].
        const double t = 1.0, a = std::exp(-t), b = std::exp(-2 * t);
        const double m11 = -a + 2 * b, m12 = a - b, m21 = -2 * a + 2 * b, m22 = 2 * a - b;
        CHECK(std::abs(x.first.mode({1, 1, 0}) - (m11 * p0 + m12 * e0)) < 1e-8);
        CHECK(std::abs(x.second.mode({1, 1, 0}) - (m21 * p0 + m22 * e0)) < 1e-8);
    }
}

TEST_CASE("truth observations") {
    const WaveGrid g(2, 8);
    const double kappa = 0.6;
    const TDSystem sys(td_config(g, kappa, 0.0));
    TruthOptions opt;
    opt.T = 0.1;
    opt.dt = 0.01;
    opt.N_obs = 3;
    SUBCASE("zero truth") {
        const auto run = generate_truth_td(sys, ScalarForce(ScalarField(g), EnslavingMap::zero(3)), ScalarField(g), opt);
        CHECK(run.observations.samples() == 11);
        for (std::size_t n = 0; n < 11; ++n) CHECK(run.observations.low(n).is_zero());
    }
    SUBCASE("heat-only derivative record") {
        std::mt19937_64 rng(1);
        const auto run = generate_truth_td(sys, ScalarForce(ScalarField(g), EnslavingMap::zero(3)),
                                           random_scalar(g, rng), opt);
        CHECK(run.observations.has_stages());
        for (std::size_t n = 0; n < 10; ++n)
            for (int s = 0; s < 4; ++s) {
                const auto lo = run.observations.stage_low(n, s);
                const auto r = s == 0 ? run.observations.rhs(n) : run.observations.stage_rhs(n, s);
                CHECK(seminorm(r - kappa * laplacian(lo), 0.0) <= 1e-12 * seminorm(r, 0.0));
            }
    }
}

TEST_CASE("finite-difference derivatives and Hermite stages of a stored stream") {
    const WaveGrid g(2, 6);
    const double kappa = 1.0;
    auto run = [&](double dt) {
        const ScalarField mode = sin_x(g);
        ObservationStream<ScalarField> s(ModeSet(g, 2), 0.0, dt);
        for (int n = 0; n <= 20; ++n) s.push_sample(std::exp(-kappa * n * dt) * mode, nullptr);
        double worst = 0.0;
        for (std::size_t n = 0; n <= 20; ++n) {
            const ScalarField exact = -kappa * std::exp(-kappa * n * dt) * mode;
            worst = std::max(worst, rel(s.derivative(n), exact));
        }
        const double mid = rel(s.stage_low(3, 1), std::exp(-kappa * 3.5 * dt) * mode);
        return std::pair{worst, mid};
    };
    const auto [d1, m1] = run(0.02);
    const auto [d2, m2] = run(0.01);
    CHECK(d1 / d2 > std::pow(2.0, 3.5));
    CHECK(m1 / m2 > std::pow(2.0, 3.5));

    ObservationStream<ScalarField> constant(ModeSet(g, 2), 0.0, 0.1);
    for (int n = 0; n < 6; ++n) constant.push_sample(sin_x(g), nullptr);
    for (std::size_t n = 0; n < 6; ++n) CHECK(constant.derivative(n).max_abs() < 1e-12);
    ObservationStream<ScalarField> short_stream(ModeSet(g, 2), 0.0, 0.1);
    for (int n = 0; n < 4; ++n) short_stream.push_sample(sin_x(g), nullptr);
    CHECK_THROWS(short_stream.derivative(0));
    CHECK_THROWS_AS(short_stream.stage_low(3, 1), ObservationGap);
}

TEST_CASE("stationary truth with no advection inverts the Laplacian") {
    const WaveGrid g(2, 10);
    const double kappa = 0.7;
    const TDSystem sys(td_config(g, kappa, 0.0));
    std::mt19937_64 rng(12);
    const auto map = EnslavingMap::power_law_tail(2, PowerLawTail{});
    const ScalarForce force(low(random_scalar(g, rng), 2), map);
    const auto st = generate_truth_td_stationary(sys, force, ScalarField(g), 4);
    const ScalarField want = (1.0 / kappa) * inverse_negative_laplacian(force.full());
    CHECK(rel(st.observations.low(0), low(want, 4)) < 1e-10);
    CHECK(st.residual < 1e-10);
}

TEST_CASE("stationary truth with advection balances the equation") {
    const WaveGrid g(2, 12);
    const TDSystem sys(td_config(g, 1.0, 0.3));
    std::mt19937_64 rng(13);
    const ScalarForce force(low(random_scalar(g, rng), 2), EnslavingMap::power_law_tail(2, PowerLawTail{}));
    const auto st = generate_truth_td_stationary(sys, force, ScalarField(g), 4);
    const ScalarField r = sys.rhs(0.0, st.state, force.full());
    CHECK(seminorm(r, 0.0) < 1e-9 * seminorm(force.full(), 0.0));
}

TEST_CASE("blow-up and step checks") {
    const WaveGrid g(2, 6);
    const TDSystem sys(td_config(g, 1.0, 0.0));
    ScalarField phi(g);
    phi.set_mode({1, 0, 0}, 1e13);
    CHECK_THROWS_AS(step_td(phi, sys, constant_force(ScalarField(g)), 0.0, 0.01), IntegrationError);
    CHECK_THROWS(check_time_step(0.1, 10.0, g, 0.0, false));
    CHECK_NOTHROW(check_time_step(0.1, 10.0, g, 0.0, true));
    CHECK_THROWS(check_time_step(0.1, 0.0, g, 10.0, false));
    CHECK_NOTHROW(check_time_step(0.01, 1.0, g, 10.0, false));
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "forcerecon/conditions/conditions.hpp"
#include "forcerecon/sieve/sieve.hpp"
#include "forcerecon/spectral/random.hpp"

using namespace forcerecon;

namespace {

TDConfig td_config(const WaveGrid& g, double kappa, double tg_amp) {
    return {kappa, tg_amp == 0.0 ? VelocityProvider(g) : VelocityProvider::constant(taylor_green(g, tg_amp))};
}

double rel(const ScalarField& a, const ScalarField& b) { return seminorm(a - b, 0.0) / seminorm(b, 0.0); }
double rel(const VectorField& a, const VectorField& b) { return seminorm(a - b, 0.0) / seminorm(b, 0.0); }

// low modes a cos(w t) + b sin(w t) with a power-law tail
ScalarForce oscillating_force(const WaveGrid& g, std::mt19937_64& rng, int N0, double w) {
    const ScalarField a = low(random_scalar(g, rng, 0.0), N0);
    const ScalarField b = low(random_scalar(g, rng, 0.0), N0);
    return ScalarForce([a, b, w](double t) { return std::cos(w * t) * a + std::sin(w * t) * b; }, a,
                       EnslavingMap::power_law_tail(N0, PowerLawTail{}));
}

struct TDTwin {
    TruthRun<ScalarField> run;
    ScalarForce force;
};

TDTwin td_twin(const WaveGrid& g, const TDConfig& cfg, int N, double T, double dt, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto force = oscillating_force(g, rng, 2, 1.0);
    TruthOptions opt;
    opt.T = T;
    opt.dt = dt;
    opt.N_obs = N;
    opt.state_stride = 1;
    auto run = generate_truth_td(TDSystem(cfg), force, random_scalar(g, rng, 2.0), opt);
    return {std::move(run), std::move(force)};
}

}  // namespace

TEST_CASE("time shift ledger composes exactly") {
    TimeShiftLedger led(0.01);
    led.push_time(0.3);
    led.push(7);
    led.push_time(0.05);
    CHECK(led.shift_steps(0) == 0);
    CHECK(led.shift_steps(1) == 30);
    CHECK(led.shift_steps(3) == 42);
    for (std::size_t j = 1; j <= 3; ++j) CHECK(led.shift_steps(j - 1) + led.increment_steps(j) == led.shift_steps(j));
    CHECK(led.shift(2) == doctest::Approx(0.37));
    CHECK(led.to_local(2, led.to_absolute(2, 11)) == 11);
    CHECK(led.to_absolute(3, 0) == 42);
    CHECK_THROWS(led.push_time(0.015));
    CHECK_THROWS(led.push(0));
    CHECK_THROWS(led.increment_steps(0));
}

TEST_CASE("shifted comparison targets line up with absolute samples") {
    // a time-stamped signal: the sample at absolute step m carries the value m
    const WaveGrid g(2, 4);
    ObservationStream<ScalarField> s(ModeSet(g, 2), 0.0, 0.1);
    ScalarField unit(g);
    unit.set_mode({1, 0, 0}, Complex(1.0, 0.0));
    for (int m = 0; m <= 40; ++m) s.push_sample(double(m) * unit, nullptr);
    TimeShiftLedger led(0.1);
    for (int j = 0; j < 4; ++j) led.push(5 + j);
    for (std::size_t j = 0; j <= 4; ++j)
        for (std::int64_t n = 0; n < 5; ++n) {
            // sigma_j phi at local step n is phi at s_j + n
            const auto m = static_cast<std::size_t>(led.to_absolute(j, n));
            CHECK(s.low(m).mode({1, 0, 0}).real() == double(led.shift_steps(j) + n));
            CHECK(s.time(m) == doctest::Approx(led.shift(j) + 0.1 * double(n)));
        }
}

TEST_CASE("zero synchronization error recovers the true large scales") {
    const WaveGrid g(2, 15);
    const int N = 5;
    const auto cfg = td_config(g, 0.8, 0.6);
    const auto twin = td_twin(g, cfg, N, 0.2, 0.01, 11);
    for (std::size_t n : {0u, 3u, 10u, 20u}) {
        const double t = twin.run.observations.time(n);
        const auto& phi = twin.run.trajectory.at_step(std::int64_t(n));
        const auto l = recover_large_scale_td(twin.run.observations.low(n), obs_time_derivative(twin.run.observations, n),
                                              phi, cfg, t, N);
        CHECK(rel(l, low(twin.force.full(t), N)) < 1e-10);
    }
    // the trajectory form agrees
    std::vector<ScalarField> highs;
    for (std::int64_t n = 2; n < 6; ++n) highs.push_back(high(twin.run.trajectory.at_step(n), N));
    const auto ls = recover_large_scale_td(twin.run.observations, 2, highs, cfg);
    for (std::size_t i = 0; i < ls.size(); ++i)
        CHECK(rel(ls[i], low(twin.force.full(twin.run.observations.time(2 + i)), N)) < 1e-10);
}

TEST_CASE("recovery with v = 0 is a diagonal read-off") {
    const WaveGrid g(2, 10);
    std::mt19937_64 rng(2);
    const TDConfig cfg = td_config(g, 0.7, 0.0);
    const ScalarField o = low(random_scalar(g, rng), 4);
    const ScalarField d = low(random_scalar(g, rng), 4);
    const ScalarField psi = random_scalar(g, rng);
    const auto l = recover_large_scale_td(o, d, psi, cfg, 0.0, 4);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Complex want = g.k2(i) <= 16.0 ? d[i] + 0.7 * g.k2(i) * o[i] : Complex(0.0, 0.0);
        CHECK(std::abs(l[i] - want) <= 1e-13 * (1.0 + std::abs(want)));
    }
}

TEST_CASE("model error is bounded by the velocity sup norm times the sync error") {
    const WaveGrid g(2, 15);  // 32 points per axis: the Taylor-Green maxima are nodes
    const int N = 5;
    const auto cfg = td_config(g, 1.0, 0.9);
    const auto twin = td_twin(g, cfg, N, 0.2, 0.01, 4);
    std::mt19937_64 rng(9);
    const double vinf = sup_norm(cfg.velocity.physical(0.0));
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + trial;
        const double t = twin.run.observations.time(n);
        const ScalarField z = random_scalar(g, rng, double(trial % 3));
        const ScalarField psi = twin.run.trajectory.at_step(std::int64_t(n)) + z;
        const auto l = recover_large_scale_td(twin.run.observations.low(n), twin.run.observations.derivative(n), psi, cfg, t, N);
        const double lhs = seminorm(l - low(twin.force.full(t), N), -1.0);
        CHECK(lhs <= vinf * seminorm(high(z, N), 0.0) * (1 + 1e-12));
        CHECK(lhs > 0.0);
    }
}

TEST_CASE("navier-stokes recovery oracles") {
    const WaveGrid g(2, 12);
    const int N = 4;
    const NSEConfig cfg{0.5, g, false};
    std::mt19937_64 rng(8);
    const VectorForce force(low(random_solenoidal(g, rng, 0.0), 2), EnslavingMap::power_law_tail(2, PowerLawTail{}));
    TruthOptions opt;
    opt.T = 0.1;
    opt.dt = 0.005;
    opt.N_obs = N;
    opt.state_stride = 1;
    const auto run = generate_truth_nse(NSESystem(cfg), force, random_solenoidal(g, rng, 2.0), opt);
    for (std::size_t n : {0u, 7u, 20u}) {
        const auto l = recover_large_scale_nse(run.observations.low(n), run.observations.derivative(n),
                                               run.trajectory.at_step(std::int64_t(n)), cfg, N);
        CHECK(rel(l, low(leray_project(force.full()), N)) < 1e-10);
        CHECK(relative_divergence(l) < 1e-12);
    }
    const VectorField zero(g);
    CHECK(recover_large_scale_nse(zero, zero, zero, cfg, N).is_zero());
}

TEST_CASE("sieve with the exact force and state is a fixed point") {
    const WaveGrid g(2, 12);
    const int N = 4;
    const auto cfg = td_config(g, 1.0, 0.5);
    const double dt = 0.01;
    SieveOptions o;
    o.dt = dt;
    o.t_star = 0.1;
    o.stages = 3;
    const double T = 0.1 * 5;
    const auto twin = td_twin(g, cfg, N, T, dt, 5);
    const TwinTruth<ScalarField> truth{&twin.run.trajectory, [&](double t) { return twin.force.full(t); }};
    const ScalarForce& force = twin.force;
    const auto run = run_sieve_td(cfg, 10.0, N, force.map(), twin.run.observations,
                                  force_of_time<ScalarField>([&](double t) { return force.full(t); }),
                                  high(twin.run.trajectory.at_step(0), N), o, truth);
    REQUIRE(run.stages.size() == 4);
    const double gsize = seminorm(force.full(0.0), -1.0);
    for (const auto& s : run.stages) {
        CHECK(s.sup_model_err <= 1e-12 * gsize);
        if (!std::isnan(s.sup_sync_err)) CHECK(s.sup_sync_err <= 1e-12 * seminorm(twin.run.final_state, 0.0));
    }
    CHECK(run.end_time == doctest::Approx(T));
    CHECK(run.csv().rfind("stage,t,sync_err_L2,sync_err_H1,model_err_Hm1,model_err_L2,sup_window_model_err\n", 0) == 0);
}

TEST_CASE("sieve contracts the model error from a zero guess") {
    const WaveGrid g(2, 12);
    const int N = 4;
    const double kappa = 1.0, dt = 0.01;
    const auto cfg = td_config(g, kappa, 0.5);
    const auto f = velocity_functionals(cfg.velocity, 1.0, 0.1, {}, ConstantsTable());
    std::mt19937_64 rng(1);
    const auto force = oscillating_force(g, rng, 2, 1.0);
    SieveTDOptions so;
    so.dt = dt;
    const auto rep = sieve_td_mu_interval(f, force.map(), N, kappa, so);
    REQUIRE(rep.feasible);
    SieveOptions o;
    o.dt = dt;
    o.t_star = *rep.t_star;
    o.stages = 5;
    o.record_stride = 1;
    TruthOptions topt;
    topt.T = o.t_star * (o.stages + 2);
    topt.dt = dt;
    topt.N_obs = N;
    topt.state_stride = 1;
    const auto truth = generate_truth_td(TDSystem(cfg), force, random_scalar(g, rng, 2.0), topt);
    const auto run = run_sieve_td(cfg, *rep.mu, N, force.map(), truth.observations, constant_force(ScalarField(g)),
                                  ScalarField(g), o, {&truth.trajectory, [&](double t) { return force.full(t); }});
    double ratio = 0.0;
    for (std::size_t j = 1; j < run.stages.size(); ++j) {
        ratio = run.stages[j].sup_model_err / run.stages[j - 1].sup_model_err;
        CHECK(ratio < 1.0);
    }
    // the settled per-stage factor is within a factor 3 of the checker's contraction bound
    CHECK(ratio <= *rep.lambda_star);
    CHECK(ratio >= *rep.lambda_star / 3.0);
    // synchronization errors after relaxation shrink stage by stage
    for (std::size_t j = 1; j + 1 < run.stages.size(); ++j) CHECK(run.stages[j].sup_sync_err < run.stages[j - 1].sup_sync_err);
}

TEST_CASE("stationary sieve") {
    const WaveGrid g(2, 12);
    const int N = 4;
    std::mt19937_64 rng(3);
    const auto map = EnslavingMap::power_law_tail(2, PowerLawTail{});
    const ScalarForce force(low(random_scalar(g, rng, 0.0), 2), map);
    const ScalarField gf = force.full();

    SUBCASE("v = 0 recovers the large scales in one stage") {
        const auto cfg = td_config(g, 0.5, 0.0);
        const auto st = generate_truth_td_stationary(TDSystem(cfg), force, ScalarField(g), N, SteadyMarch{0.0, 1e-13, 400000});
        StationarySieveOptions o;
        o.stages = 1;
        const auto run = stationary_sieve(cfg, 3.0, N, map, st.observations.low(0), ScalarField(g), ScalarField(g), o,
                                          {&st.state, &gf});
        CHECK(rel(run.final_force_low, low(gf, N)) < 1e-10);
    }
    SUBCASE("exact guess is a fixed point") {
        const auto cfg = td_config(g, 0.5, 0.4);
        const auto st = generate_truth_td_stationary(TDSystem(cfg), force, ScalarField(g), N, SteadyMarch{0.0, 1e-14, 400000});
        StationarySieveOptions o;
        o.stages = 3;
        const auto run = stationary_sieve(cfg, 3.0, N, map, st.observations.low(0), low(gf, N), high(st.state, N), o,
                                          {&st.state, &gf});
        for (const auto& s : run.stages) CHECK(s.sup_model_err_L2 <= 1e-10 * seminorm(gf, 0.0));
    }
    SUBCASE("zero data gives zero forces") {
        const auto cfg = td_config(g, 0.5, 0.4);
        StationarySieveOptions o;
        o.stages = 3;
        const auto run = stationary_sieve(cfg, 3.0, N, map, ScalarField(g), ScalarField(g), ScalarField(g), o);
        CHECK(run.final_force_low.is_zero());
        CHECK(run.final_state.is_zero());
    }
    SUBCASE("advected case converges") {
        const auto cfg = td_config(g, 0.5, 0.4);
        const auto st = generate_truth_td_stationary(TDSystem(cfg), force, ScalarField(g), N, SteadyMarch{0.0, 1e-14, 400000});
        StationarySieveOptions o;
        o.stages = 8;
        const auto run = stationary_sieve(cfg, 3.0, N, map, st.observations.low(0), ScalarField(g), ScalarField(g), o,
                                          {&st.state, &gf});
        CHECK(run.stages.back().sup_model_err_L2 < 1e-6 * seminorm(gf, 0.0));
    }
}

#include "forcerecon/solvers/truth.hpp"

#include <algorithm>
#include <cmath>

namespace forcerecon {

std::int64_t step_count(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("horizon and time step must be positive");
    const double n = T / dt;
    const auto r = static_cast<std::int64_t>(std::llround(n));
    if (std::abs(n - double(r)) > 1e-9 * std::max(1.0, n))
        throw std::invalid_argument("horizon is not a multiple of the time step");
    return r;
}

namespace {

template <class Field, class System, class Rhs>
TruthRun<Field> generate(const System& sys, Rhs&& rhs, Field x0, const TruthOptions& opt) {
    const std::int64_t steps = step_count(opt.T, opt.dt);
    TruthRun<Field> run{{opt.dt, opt.state_stride, {}},
                        ObservationStream<Field>(ModeSet(grid_of(x0), opt.N_obs), 0.0, opt.dt),
                        x0};
    run.observations.reserve(static_cast<std::size_t>(steps));
    auto& obs = run.observations;
    Field x = std::move(x0);
    for (std::int64_t n = 0; n <= steps; ++n) {
        const double t = n * opt.dt;
        if (opt.state_stride > 0 && n % opt.state_stride == 0) run.trajectory.states.push_back(x);
        if (n == steps) {
            const Field r = rhs(SlotTime{n, 0, t}, x);
            const Field rl = low(r, opt.N_obs);
            obs.push_sample(low(x, opt.N_obs), opt.record_rhs ? &rl : nullptr);
            break;
        }
        x = lawson_rk4_step(x, opt.dt, sys.linear(), [&](int s, const Field& y) {
            const SlotTime st{n, s, t + slot_offset(s, opt.dt)};
            Field r = rhs(st, y);
            if (s == 0 || opt.record_stages) {
                const Field rl = low(r, opt.N_obs);
                const Field* rp = opt.record_rhs ? &rl : nullptr;
                if (s == 0) obs.push_sample(low(y, opt.N_obs), rp);
                else obs.push_stage(low(y, opt.N_obs), rp);
            }
            return r;
        });
        check_finite(x, t + opt.dt, "truth");
    }
    run.final_state = std::move(x);
    return run;
}

}  // namespace

TruthRun<ScalarField> generate_truth_td(const TDSystem& sys, const ScalarForce& g, ScalarField phi0,
                                        const TruthOptions& opt) {
    require_same_grid(phi0.grid(), sys.config().grid());
    const bool fixed = !g.time_dependent();
    const ScalarField g0 = g.full();
    return generate(
        sys,
        [&](const SlotTime& s, const ScalarField& x) { return sys.rhs(s.t, x, fixed ? g0 : g.full(s.t)); },
        std::move(phi0), opt);
}

TruthRun<VectorField> generate_truth_nse(const NSESystem& sys, const VectorForce& g, VectorField u0,
                                         const TruthOptions& opt) {
    require_same_grid(u0.grid(), sys.config().grid);
    const bool fixed = !g.time_dependent();
    const VectorField g0 = leray_project(g.full());
    return generate(
        sys,
        [&](const SlotTime& s, const VectorField& x) { return sys.rhs(x, fixed ? g0 : leray_project(g.full(s.t))); },
        std::move(u0), opt);
}

SteadyResult march_to_steady_state(ScalarField x, const DiagonalOperator& rate,
                                   const std::function<ScalarField(const ScalarField&)>& n, double h, double tol,
                                   int max_steps, double scale) {
    const WaveGrid& g = x.grid();
    std::vector<double> E(g.size()), phi1(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = -rate.rate(i);  // DiagonalOperator stores the (negative) generator
        if (i == g.zero_index()) continue;
        if (!(r > 0.0)) throw std::invalid_argument("steady march needs a positive rate on every nonzero mode");
        E[i] = std::exp(-r * h);
        phi1[i] = -std::expm1(-r * h) / r;
    }
    if (!(scale > 0.0)) scale = 1.0;
    SteadyResult out{x, 0, 0.0};
    for (int it = 0; it <= max_steps; ++it) {
        const ScalarField nx = n(x);
        ScalarField res = nx + rate.apply(x);
        out.residual = seminorm(res, 0.0) / scale;
        out.iterations = it;
        if (!std::isfinite(out.residual)) throw NonConvergence("steady march diverged");
        if (out.residual < tol) {
            out.state = std::move(x);
            return out;
        }
        auto c = x.raw();
        const auto nc = nx.coeffs();
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = E[i] * c[i] + phi1[i] * nc[i];
        x.clear_mean();
    }
    throw NonConvergence("steady march did not reach residual " + std::to_string(tol) + " within " +
                         std::to_string(max_steps) + " steps (last " + std::to_string(out.residual) + ")");
}

StationaryTruth generate_truth_td_stationary(const TDSystem& sys, const ScalarForce& g, ScalarField phi0, int N_obs,
                                             const SteadyMarch& opt) {
    const auto& cfg = sys.config();
    if (!cfg.velocity.time_independent() || g.time_dependent())
        throw std::invalid_argument("stationary truth needs time-independent velocity and force");
    const ScalarField gf = g.full();
    double h = opt.pseudo_dt;
    if (h <= 0.0) {
        const double vmax = cfg.velocity.is_zero() ? 0.0 : sup_norm(cfg.velocity.physical(0.0));
        h = 10.0 / cfg.kappa;
        if (vmax > 0.0) h = std::min(h, cfg.kappa / (vmax * vmax));
    }
    const auto& vel = cfg.velocity;
    auto n = [&](const ScalarField& x) {
        ScalarField r = gf;
        if (!vel.is_zero()) r -= advect(vel.physical(0.0), x);
        return r;
    };
    const double scale = std::max(seminorm(gf, 0.0), 1e-300);
    auto res = march_to_steady_state(std::move(phi0), sys.linear(), n, h, opt.tol, opt.max_steps, scale);
    StationaryTruth out{res.state, ObservationStream<ScalarField>(ModeSet(gf.grid(), N_obs), 0.0, 1.0), res.iterations,
                        res.residual};
    const ScalarField zero(gf.grid());
    out.observations.push_sample(low(res.state, N_obs), &zero);
    return out;
}

}  // namespace forcerecon

#include "forcerecon/sieve/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace forcerecon {

TimeShiftLedger::TimeShiftLedger(double dt) : dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
}

std::int64_t TimeShiftLedger::snap(double t, double dt) {
    const double q = t / dt;
    const auto n = static_cast<std::int64_t>(std::llround(q));
    if (n <= 0 || std::abs(q - double(n)) > 1e-9 * std::max(1.0, q)) {
        std::ostringstream s;
        s << "time " << t << " is not a positive multiple of dt = " << dt;
        throw std::invalid_argument(s.str());
    }
    return n;
}

void TimeShiftLedger::push(std::int64_t steps) {
    if (steps <= 0) throw std::invalid_argument("stage increments must be positive");
    inc_.push_back(steps);
}

std::int64_t TimeShiftLedger::increment_steps(std::size_t j) const {
    if (j == 0 || j > inc_.size()) throw std::out_of_range("no stage increment t_" + std::to_string(j));
    return inc_[j - 1];
}

std::int64_t TimeShiftLedger::shift_steps(std::size_t j) const {
    if (j > inc_.size()) throw std::out_of_range("no cumulative shift s_" + std::to_string(j));
    std::int64_t s = 0;
    for (std::size_t i = 0; i < j; ++i) s += inc_[i];
    return s;
}

std::string to_string(SieveKind k) {
    switch (k) {
        case SieveKind::td: return "td";
        case SieveKind::td_stationary: return "td_stationary";
        case SieveKind::nse: return "nse";
    }
    return "?";
}

// ---------------------------------------------------------------------------------------------

ScalarField recover_large_scale_td(const ScalarField& obs_low, const ScalarField& obs_dt, const ScalarField& psi,
                                   const TDConfig& cfg, double t, int N) {
    ScalarField l = obs_dt;
    l.axpy(-cfg.kappa, laplacian(obs_low));
    if (!cfg.velocity.is_zero()) {
        const ScalarField Phi = obs_low + high(psi, N);
        l += low(advect(cfg.velocity.physical(t), Phi), N);
    }
    return low(l, N);
}

VectorField recover_large_scale_nse(const VectorField& obs_low, const VectorField& obs_dt, const VectorField& v,
                                    const NSEConfig& cfg, int N) {
    VectorField l = obs_dt;
    l.axpy(-cfg.nu, laplacian(obs_low));
    if (!cfg.freeze_nonlinear) {
        const VectorField U = obs_low + high(v, N);
        l += low(nse_bilinear(U, U), N);
    }
    return low(leray_project(l), N);
}

std::vector<ScalarField> recover_large_scale_td(const ObservationStream<ScalarField>& obs, std::size_t first,
                                                const std::vector<ScalarField>& psi_high, const TDConfig& cfg) {
    std::vector<ScalarField> out;
    out.reserve(psi_high.size());
    for (std::size_t i = 0; i < psi_high.size(); ++i) {
        const std::size_t n = first + i;
        out.push_back(recover_large_scale_td(obs.low(n), obs.derivative(n), psi_high[i], cfg, obs.time(n), obs.rank()));
    }
    return out;
}

std::vector<VectorField> recover_large_scale_nse(const ObservationStream<VectorField>& obs, std::size_t first,
                                                 const std::vector<VectorField>& v_high, const NSEConfig& cfg) {
    std::vector<VectorField> out;
    out.reserve(v_high.size());
    for (std::size_t i = 0; i < v_high.size(); ++i) {
        const std::size_t n = first + i;
        out.push_back(recover_large_scale_nse(obs.low(n), obs.derivative(n), v_high[i], cfg, obs.rank()));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

template <class Field>
std::string SieveRun<Field>::csv() const {
    std::ostringstream s;
    s << std::setprecision(10);
    s << "stage,t,sync_err_L2,sync_err_H1,model_err_Hm1,model_err_L2,sup_window_model_err\n";
    for (const auto& r : rows) {
        double sup = NAN;
        for (const auto& st : stages)
            if (st.stage == r.stage) sup = st.sup_model_err;
        s << r.stage << "," << r.t << "," << r.sync_err_L2 << "," << r.sync_err_H1 << "," << r.model_err_Hm1 << ","
          << r.model_err_L2 << "," << sup << "\n";
    }
    return s.str();
}

template struct SieveRun<ScalarField>;
template struct SieveRun<VectorField>;

namespace {

bool is_low(double k2, int N) { return k2 <= double(N) * N * (1.0 + 1e-14); }

EnslavingMap map_at_rank(const EnslavingMap& map, int N) {
    if (map.rank() > N) throw std::invalid_argument("enslaving map rank exceeds the observation rank");
    return map.raise_rank(N);
}

/// Low-mode values of a force at every (step, slot) of a step range, stored packed.
template <class Field>
class SlotRecord {
public:
    SlotRecord(ModeSet modes, std::int64_t first, std::int64_t last)
        : modes_(std::move(modes)), first_(first), last_(last),
          data_(static_cast<std::size_t>(std::max<std::int64_t>(last - first + 1, 0)) * 4) {}

    void put(std::int64_t step, int slot, const Field& l) { data_.at(slot_index(step, slot)) = modes_.pack(l); }
    bool has(std::int64_t step, int slot) const {
        return step >= first_ && step <= last_ && !data_[slot_index(step, slot)].empty();
    }
    Field low(std::int64_t step, int slot) const {
        if (!has(step, slot)) throw ObservationGap("recovered force missing at step " + std::to_string(step));
        return modes_.template unpack<Field>(data_[slot_index(step, slot)]);
    }
    std::int64_t first() const { return first_; }
    std::int64_t last() const { return last_; }

private:
    std::size_t slot_index(std::int64_t step, int slot) const {
        return static_cast<std::size_t>(step - first_) * 4 + static_cast<std::size_t>(slot);
    }
    ModeSet modes_;
    std::int64_t first_, last_;
    std::vector<std::vector<Complex>> data_;
};

template <class Field>
struct StageHooks {
    const DiagonalOperator* linear = nullptr;
    std::function<Field(double t, const Field& y, const Field& f, const Field& obs_low)> rhs;
    std::function<Field(double t, const Field& obs_low, const Field& obs_dt, const Field& y)> recover;
    std::function<Field(const Field& low)> complete;
};

template <class Field>
SieveRun<Field> run_stages(SieveKind kind, const StageHooks<Field>& hooks, int N, const ObservationStream<Field>& obs,
                           const ForceAt<Field>& f0, const Field& state0_high, const SieveOptions& opt,
                           const TwinTruth<Field>& truth) {
    const double dt = opt.dt;
    if (std::abs(obs.dt() - dt) > 1e-12 * dt) throw std::invalid_argument("sieve time step must equal the observation spacing");
    if (opt.stages < 1) throw std::invalid_argument("the sieve needs at least one stage");
    if (opt.record_stride < 1) throw std::invalid_argument("record stride must be positive");
    if (obs.rank() != N) throw std::invalid_argument("observation rank differs from N");

    SieveRun<Field> run{kind, TimeShiftLedger(dt), opt.t_star, 0.0, 0.0, {}, {}, zero_like(state0_high),
                        zero_like(state0_high), zero_like(state0_high), 0.0};
    const std::int64_t tstar = TimeShiftLedger::snap(opt.t_star, dt);
    const double window = opt.window > 0.0 ? opt.window : 2.0 * opt.t_star;
    const std::int64_t wsteps = TimeShiftLedger::snap(window, dt);
    const auto J = static_cast<std::size_t>(opt.stages);
    for (std::size_t j = 0; j < J; ++j) run.ledger.push(tstar);
    const std::int64_t end = run.ledger.shift_steps(J) + wsteps;
    run.window = window;
    run.end_time = obs.t0() + double(end) * dt;
    if (obs.samples() <= static_cast<std::size_t>(end))
        throw ObservationGap("observations end before the last sieve window closes");

    const ModeSet modes(obs.grid(), N);
    const double t0 = obs.t0();

    auto record_errors = [&](int stage, std::int64_t step, const Field* state, const Field& f, SieveRow& row) {
        row.stage = stage;
        row.t = t0 + double(step) * dt;
        if (state && truth.states && truth.states->has(step)) {
            const Field z = *state - truth.states->at_step(step);
            row.sync_err_L2 = seminorm(z, 0.0);
            row.sync_err_H1 = seminorm(z, 1.0);
        }
        if (truth.force) {
            const Field h = f - truth.force(row.t);
            row.model_err_Hm1 = seminorm(h, -1.0);
            row.model_err_L2 = seminorm(h, 0.0);
        }
    };
    auto summarize = [&](int stage, std::int64_t start, std::int64_t relaxed) {
        SieveStageSummary s;
        s.stage = stage;
        s.start = t0 + double(start) * dt;
        auto upd = [](double& acc, double v) {
            if (!std::isnan(v)) acc = std::isnan(acc) ? v : std::max(acc, v);
        };
        const double t_relaxed = t0 + double(relaxed) * dt - 0.5 * dt;
        for (const auto& r : run.rows) {
            if (r.stage != stage) continue;
            upd(s.sup_model_err, r.model_err_Hm1);
            upd(s.sup_model_err_L2, r.model_err_L2);
            if (r.t >= t_relaxed) {
                upd(s.sup_sync_err, r.sync_err_L2);
                upd(s.sup_sync_err_H1, r.sync_err_H1);
            }
        }
        run.stages.push_back(s);
    };

    Field state = obs.low(0) + high(state0_high, N);
    std::optional<SlotRecord<Field>> current;
    for (std::size_t j = 0; j < J; ++j) {
        const std::int64_t start = run.ledger.shift_steps(j);
        const std::int64_t next = run.ledger.shift_steps(j + 1);
        SlotRecord<Field> recovered(modes, next, end);
        auto force = [&](std::int64_t step, int slot, double t) {
            return current ? hooks.complete(current->low(step, slot)) : f0({step, slot, t});
        };

        Field x = state;
        Field next_state = state;
        for (std::int64_t step = start; step < end; ++step) {
            const double t = t0 + double(step) * dt;
            const auto n = static_cast<std::size_t>(step);
            x = lawson_rk4_step(x, dt, *hooks.linear, [&](int slot, const Field& y) {
                const double ts = t + slot_offset(slot, dt);
                const Field obs_low = obs.stage_low(n, slot);
                if (step >= next) recovered.put(step, slot, hooks.recover(ts, obs_low, obs.stage_rhs(n, slot), y));
                const Field f = force(step, slot, ts);
                if (slot == 0 && step % opt.record_stride == 0) {
                    SieveRow row;
                    record_errors(int(j), step, &y, f, row);
                    run.rows.push_back(row);
                }
                return hooks.rhs(ts, y, f, obs_low);
            });
            check_finite(x, t + dt, "sieve stage");
            if (step + 1 == next) next_state = x;
        }
        const double t_end = t0 + double(end) * dt;
        recovered.put(end, 0, hooks.recover(t_end, obs.low(end), obs.derivative(end), x));
        if (end % opt.record_stride == 0) {
            SieveRow row;
            record_errors(int(j), end, &x, force(end, 0, t_end), row);
            run.rows.push_back(row);
        }
        summarize(int(j), start, next);
        run.final_state = x;
        state = next_state;
        current.emplace(std::move(recovered));
    }

    // the last recovered force, scored over its own window
    const std::int64_t last_start = run.ledger.shift_steps(J);
    Field sum = zero_like(state0_high);
    std::int64_t count = 0;
    for (std::int64_t step = last_start; step <= end; ++step) {
        const Field l = current->low(step, 0);
        sum += l;
        ++count;
        if (step % opt.record_stride == 0) {
            SieveRow row;
            record_errors(int(J), step, nullptr, hooks.complete(l), row);
            run.rows.push_back(row);
        }
    }
    summarize(int(J), last_start, last_start);
    run.final_force_low = current->low(end, 0);
    run.force_average = (1.0 / double(count)) * sum;
    for (std::int64_t step = last_start; step <= end; ++step)
        run.force_deviation = std::max(run.force_deviation, seminorm(current->low(step, 0) - run.force_average, -1.0));
    return run;
}

}  // namespace

SieveRun<ScalarField> run_sieve_td(const TDConfig& cfg, double mu, int N, const EnslavingMap& map,
                                   const ObservationStream<ScalarField>& obs, const ForceAt<ScalarField>& f0,
                                   const ScalarField& state0_high, const SieveOptions& opt,
                                   const TwinTruth<ScalarField>& truth) {
    const NudgedTDSystem sys(cfg, mu, N, opt.split);
    const double vmax = cfg.velocity.is_zero() ? 0.0 : sup_norm(cfg.velocity.physical(obs.t0()));
    check_time_step(opt.dt, vmax, cfg.grid(), sys.explicit_rate(), opt.allow_dt_override);
    const EnslavingMap mapN = map_at_rank(map, N);
    StageHooks<ScalarField> hooks;
    hooks.linear = &sys.linear();
    hooks.rhs = [&](double t, const ScalarField& y, const ScalarField& f, const ScalarField& o) { return sys.rhs(t, y, f, o); };
    hooks.recover = [&](double t, const ScalarField& o, const ScalarField& od, const ScalarField& y) {
        return recover_large_scale_td(o, od, y, cfg, t, N);
    };
    hooks.complete = [&](const ScalarField& l) { return evaluate_force(l, mapN); };
    return run_stages(SieveKind::td, hooks, N, obs, f0, state0_high, opt, truth);
}

SieveRun<VectorField> run_sieve_nse(const NSEConfig& cfg, double mu, int N, const EnslavingMap& map,
                                    const ObservationStream<VectorField>& obs, const ForceAt<VectorField>& f0,
                                    const VectorField& state0_high, const SieveOptions& opt,
                                    const TwinTruth<VectorField>& truth) {
    const NudgedNSESystem sys(cfg, mu, N, opt.split);
    const VectorField u0 = obs.low(0) + high(state0_high, N);
    check_time_step(opt.dt, sup_norm(to_physical_velocity(u0)), cfg.grid, sys.explicit_rate(), opt.allow_dt_override);
    const EnslavingMap mapN = map_at_rank(map, N);
    StageHooks<VectorField> hooks;
    hooks.linear = &sys.linear();
    hooks.rhs = [&](double, const VectorField& y, const VectorField& f, const VectorField& o) { return sys.rhs(y, f, o); };
    hooks.recover = [&](double, const VectorField& o, const VectorField& od, const VectorField& y) {
        return recover_large_scale_nse(o, od, y, cfg, N);
    };
    hooks.complete = [&](const VectorField& l) { return leray_project(evaluate_force(l, mapN)); };
    return run_stages(SieveKind::nse, hooks, N, obs, f0, state0_high, opt, truth);
}

// ---------------------------------------------------------------------------------------------

SieveRun<ScalarField> stationary_sieve(const TDConfig& cfg, double mu, int N, const EnslavingMap& map,
                                       const ScalarField& obs_low, const ScalarField& f0_low,
                                       const ScalarField& state0_high, const StationarySieveOptions& opt,
                                       const StationaryTwin& truth) {
    if (!cfg.velocity.time_independent()) throw std::invalid_argument("the stationary sieve needs a steady velocity");
    if (!(mu > 0.0)) throw std::invalid_argument("the stationary sieve needs mu > 0");
    if (opt.stages < 1) throw std::invalid_argument("the sieve needs at least one stage");
    require_low_support(obs_low, N);
    require_low_support(f0_low, N);
    const EnslavingMap mapN = map_at_rank(map, N);
    const auto& grid = cfg.grid();
    // generator form, as the march expects: -(kappa |k|^2 + mu on the low modes)
    const DiagonalOperator rate(grid, [k = cfg.kappa, mu, N](double k2) { return -k * k2 - (is_low(k2, N) ? mu : 0.0); });
    const bool still = cfg.velocity.is_zero();
    const double vmax = still ? 0.0 : sup_norm(cfg.velocity.physical(0.0));
    double h = opt.march.pseudo_dt;
    if (h <= 0.0) {
        h = 10.0 / cfg.kappa;
        if (vmax > 0.0) h = std::min(h, cfg.kappa / (vmax * vmax));
    }

    SieveRun<ScalarField> run{SieveKind::td_stationary, TimeShiftLedger(1.0), 0.0, 0.0, 0.0, {}, {},
                              ScalarField(grid), ScalarField(grid), ScalarField(grid), 0.0};
    auto score = [&](int stage, const ScalarField* state, const ScalarField& f) {
        SieveRow row;
        row.stage = stage;
        if (state && truth.state) {
            const ScalarField z = *state - *truth.state;
            row.sync_err_L2 = seminorm(z, 0.0);
            row.sync_err_H1 = seminorm(z, 1.0);
        }
        if (truth.force) {
            const ScalarField d = f - *truth.force;
            row.model_err_Hm1 = seminorm(d, -1.0);
            row.model_err_L2 = seminorm(d, 0.0);
        }
        run.rows.push_back(row);
        SieveStageSummary s;
        s.stage = stage;
        s.sup_model_err = row.model_err_Hm1;
        s.sup_model_err_L2 = row.model_err_L2;
        s.sup_sync_err = row.sync_err_L2;
        s.sup_sync_err_H1 = row.sync_err_H1;
        run.stages.push_back(s);
    };

    ScalarField x = obs_low + high(state0_high, N);
    ScalarField l = f0_low;
    ScalarField f = evaluate_force(l, mapN);
    const ScalarField lap_obs = laplacian(obs_low);
    for (int j = 0; j < opt.stages; ++j) {
        auto n = [&](const ScalarField& y) {
            ScalarField r = f;
            r.axpy(mu, obs_low);
            if (!still) r -= advect(cfg.velocity.physical(0.0), y);
            return r;
        };
        const double scale = std::max(seminorm(f, 0.0) + mu * seminorm(obs_low, 0.0), 1e-300);
        auto res = march_to_steady_state(x, rate, n, h, opt.march.tol, opt.march.max_steps, scale);
        x = std::move(res.state);
        score(j, &x, f);

        ScalarField next = -cfg.kappa * lap_obs;
        if (!still) next += low(advect(cfg.velocity.physical(0.0), obs_low + high(x, N)), N);
        next = low(next, N);
        const double change = seminorm(next - l, 0.0);
        const double size = seminorm(next, 0.0);
        l = std::move(next);
        f = evaluate_force(l, mapN);
        if (opt.stop_tol > 0.0 && change <= opt.stop_tol * size) {
            score(j + 1, nullptr, f);
            run.final_state = x;
            run.final_force_low = l;
            run.force_average = l;
            return run;
        }
    }
    score(opt.stages, nullptr, f);
    run.final_state = x;
    run.final_force_low = l;
    run.force_average = l;
    return run;
}

}  // namespace forcerecon

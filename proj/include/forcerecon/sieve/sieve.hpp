#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forcerecon/forcing/quasi_finite_force.hpp"
#include "forcerecon/solvers/observation.hpp"
#include "forcerecon/solvers/systems.hpp"
#include "forcerecon/solvers/truth.hpp"

namespace forcerecon {

/// Stage increments t_1, t_2, ... kept as whole numbers of time steps, so the cumulative
/// shifts s_j = t_1 + ... + t_j compose exactly.
class TimeShiftLedger {
public:
    explicit TimeShiftLedger(double dt);

    /// Number of steps in t; throws unless t is a positive multiple of dt.
    static std::int64_t snap(double t, double dt);

    void push(std::int64_t steps);
    void push_time(double t) { push(snap(t, dt_)); }

    double dt() const { return dt_; }
    std::size_t increments() const { return inc_.size(); }
    std::int64_t increment_steps(std::size_t j) const;  // t_j, j >= 1
    /// s_j in steps; s_0 = 0.
    std::int64_t shift_steps(std::size_t j) const;
    double shift(std::size_t j) const { return double(shift_steps(j)) * dt_; }

    /// Absolute step of local step n of stage j, and back.
    std::int64_t to_absolute(std::size_t j, std::int64_t local) const { return shift_steps(j) + local; }
    std::int64_t to_local(std::size_t j, std::int64_t absolute) const { return absolute - shift_steps(j); }

private:
    double dt_;
    std::vector<std::int64_t> inc_;
};

/// l = d/dt P_N phi + P_N (v . grad Phi) - kappa Lap P_N phi with Phi = P_N phi_obs + Q_N psi,
/// evaluated at one time from the observation, its time derivative and the synchronized state.
ScalarField recover_large_scale_td(const ScalarField& obs_low, const ScalarField& obs_dt, const ScalarField& psi,
                                   const TDConfig& cfg, double t, int N);
/// l = d/dt P_N u - nu Lap P_N u + P_N B(U, U) with U = P_N u_obs + Q_N v.
VectorField recover_large_scale_nse(const VectorField& obs_low, const VectorField& obs_dt, const VectorField& v,
                                    const NSEConfig& cfg, int N);

/// Sample-by-sample recovery along a stream segment: samples first, first+1, ... paired with
/// the high-mode states in `psi_high`.
std::vector<ScalarField> recover_large_scale_td(const ObservationStream<ScalarField>& obs, std::size_t first,
                                                const std::vector<ScalarField>& psi_high, const TDConfig& cfg);
std::vector<VectorField> recover_large_scale_nse(const ObservationStream<VectorField>& obs, std::size_t first,
                                                 const std::vector<VectorField>& v_high, const NSEConfig& cfg);

/// d/dt P_N at sample n (recorded, else fourth-order finite differences).
template <class Field>
Field obs_time_derivative(const ObservationStream<Field>& stream, std::size_t n) {
    return stream.derivative(n);
}

/// Truth data used only to score a run.
template <class Field>
struct TwinTruth {
    const Trajectory<Field>* states = nullptr;
    std::function<Field(double)> force;  // full true force at time t
};

struct SieveOptions {
    double dt = 1e-3;
    double t_star = 0.1;
    int stages = 1;
    /// Length of the last stage's window past its start; default 2 t_star. Every stage runs
    /// from its start s_j to the common end s_J + window.
    double window = 0.0;
    /// Error rows are written every `record_stride` steps.
    std::int64_t record_stride = 1;
    FeedbackSplit split = FeedbackSplit::matched;
    bool allow_dt_override = false;
};

struct SieveRow {
    int stage = 0;
    double t = 0.0;
    double sync_err_L2 = NAN;
    double sync_err_H1 = NAN;
    double model_err_Hm1 = NAN;
    double model_err_L2 = NAN;
};

/// Per force index j = 0..J: sup over [s_j, end] of the model error of f^(j); per stage
/// j < J: sup over [s_{j+1}, end] of the synchronization error of stage j.
struct SieveStageSummary {
    int stage = 0;
    double start = 0.0;
    double sup_model_err = NAN;     // ||f^(j) - g||_*
    double sup_model_err_L2 = NAN;
    double sup_sync_err = NAN;      // |psi^(j) - phi| after relaxation
    double sup_sync_err_H1 = NAN;
};

enum class SieveKind { td, td_stationary, nse };
std::string to_string(SieveKind k);

template <class Field>
struct SieveRun {
    SieveKind kind = SieveKind::td;
    TimeShiftLedger ledger{1.0};
    double t_star = 0.0;
    double window = 0.0;
    double end_time = 0.0;
    std::vector<SieveStageSummary> stages;
    std::vector<SieveRow> rows;
    Field final_state;
    /// Low part of the last recovered force at the final time.
    Field final_force_low;
    /// Window average of the last recovered force and the largest deviation from it, useful
    /// when the true force is time-independent.
    Field force_average;
    double force_deviation = 0.0;

    /// CSV with columns stage, t, sync_err_L2, sync_err_H1, model_err_Hm1, model_err_L2, sup_window_model_err.
    std::string csv() const;
};

/// The Sieve for transport-diffusion. `obs` must carry stage values on the step grid dt from
/// the start of the run to the end of the last window; `f0` is the stage-0 force guess and
/// `state0_high` the Q_N part of the stage-0 state (the P_N part is the first observation).
SieveRun<ScalarField> run_sieve_td(const TDConfig& cfg, double mu, int N, const EnslavingMap& map,
                                   const ObservationStream<ScalarField>& obs, const ForceAt<ScalarField>& f0,
                                   const ScalarField& state0_high, const SieveOptions& opt,
                                   const TwinTruth<ScalarField>& truth = {});

SieveRun<VectorField> run_sieve_nse(const NSEConfig& cfg, double mu, int N, const EnslavingMap& map,
                                    const ObservationStream<VectorField>& obs, const ForceAt<VectorField>& f0,
                                    const VectorField& state0_high, const SieveOptions& opt,
                                    const TwinTruth<VectorField>& truth = {});

struct StationarySieveOptions {
    int stages = 10;
    SteadyMarch march{0.0, 1e-13, 400000};
    /// Stop early once consecutive recovered forces differ by less than this (relative); 0 never.
    double stop_tol = 0.0;
};

struct StationaryTwin {
    const ScalarField* state = nullptr;
    const ScalarField* force = nullptr;  // full true force
};

/// Stationary Sieve: each stage synchronizes to the steady state against the single
/// observation, keeps only that state, and recovers l = P_N (v . grad Phi) - kappa Lap P_N phi.
SieveRun<ScalarField> stationary_sieve(const TDConfig& cfg, double mu, int N, const EnslavingMap& map,
                                       const ScalarField& obs_low, const ScalarField& f0_low,
                                       const ScalarField& state0_high, const StationarySieveOptions& opt,
                                       const StationaryTwin& truth = {});

}  // namespace forcerecon

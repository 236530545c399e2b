#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "forcerecon/forcing/quasi_finite_force.hpp"
#include "forcerecon/solvers/observation.hpp"
#include "forcerecon/solvers/systems.hpp"

namespace forcerecon {

struct TruthOptions {
    double T = 1.0;
    double dt = 1e-3;
    int N_obs = 1;
    /// Keep the RK stage values (needed for lockstep assimilation from a stored stream).
    bool record_stages = true;
    /// Keep the exact d/dt P_N state.
    bool record_rhs = true;
    /// Keep every `state_stride`-th full state for error evaluation; 0 keeps none.
    std::int64_t state_stride = 0;
};

/// Number of dt steps covering [0, T]; T must be a multiple of dt to rounding.
std::int64_t step_count(double T, double dt);

template <class Field>
struct Trajectory {
    double dt = 0.0;
    std::int64_t stride = 0;
    std::vector<Field> states;

    bool has(std::int64_t step) const {
        return stride > 0 && step % stride == 0 && static_cast<std::size_t>(step / stride) < states.size();
    }
    const Field& at_step(std::int64_t step) const {
        if (!has(step)) throw std::out_of_range("trajectory state not recorded at step " + std::to_string(step));
        return states[static_cast<std::size_t>(step / stride)];
    }
};

template <class Field>
struct TruthRun {
    Trajectory<Field> trajectory;
    ObservationStream<Field> observations;
    Field final_state;
};

TruthRun<ScalarField> generate_truth_td(const TDSystem& sys, const ScalarForce& g, ScalarField phi0,
                                        const TruthOptions& opt);
TruthRun<VectorField> generate_truth_nse(const NSESystem& sys, const VectorForce& g, VectorField u0,
                                         const TruthOptions& opt);

/// Pseudo-time march x <- E x + (1 - E)/rate * n(x), E = e^{-rate h}, which has exactly the
/// steady states of rate * x = n(x). Stops when the residual |n(x) - rate x| falls below
/// tol * scale.
struct SteadyMarch {
    double pseudo_dt = 0.0;  // 0 picks a step from the rates and velocity
    double tol = 1e-10;
    int max_steps = 200000;
};

struct SteadyResult {
    ScalarField state;
    int iterations = 0;
    double residual = 0.0;  // relative
};

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// `rate` must be positive on every nonzero mode.
SteadyResult march_to_steady_state(ScalarField x0, const DiagonalOperator& rate,
                                   const std::function<ScalarField(const ScalarField&)>& n, double pseudo_dt,
                                   double tol, int max_steps, double scale);

struct StationaryTruth {
    ScalarField state;
    ObservationStream<ScalarField> observations;  // one sample
    int iterations = 0;
    double residual = 0.0;
};

/// Steady state of the transport-diffusion equation with time-independent v and g.
StationaryTruth generate_truth_td_stationary(const TDSystem& sys, const ScalarForce& g, ScalarField phi0, int N_obs,
                                             const SteadyMarch& opt = {});

}  // namespace forcerecon

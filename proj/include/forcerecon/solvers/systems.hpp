#pragma once

#include <cstdint>
#include <functional>

#include "forcerecon/forcing/enslaving_map.hpp"
#include "forcerecon/solvers/lawson.hpp"
#include "forcerecon/solvers/velocity.hpp"

namespace forcerecon {

/// Where a right-hand side is being evaluated: global step index, RK stage slot and time.
struct SlotTime {
    std::int64_t step = 0;
    int slot = 0;
    double t = 0.0;
};

template <class Field>
using ForceAt = std::function<Field(const SlotTime&)>;

template <class Field>
ForceAt<Field> constant_force(Field f) {
    return [f = std::move(f)](const SlotTime&) { return f; };
}
template <class Field>
ForceAt<Field> force_of_time(std::function<Field(double)> f) {
    return [f = std::move(f)](const SlotTime& s) { return f(s.t); };
}

/// How the assimilators split their right-hand side between the exact exponential and RK4.
/// matched: the same diffusion operator as the truth on every mode, feedback terms explicit,
///          so an exactly synchronized pair stays synchronized to roundoff.
/// folded:  the low-mode feedback damping goes into the exponential as well (stiffer mu).
enum class FeedbackSplit { matched, folded };

struct TDConfig {
    double kappa = 1.0;
    VelocityProvider velocity;
    const WaveGrid& grid() const { return velocity.grid(); }
};

struct NSEConfig {
    double nu = 1.0;
    WaveGrid grid;
    /// Drops B(.,.) everywhere; only for linear oracle tests.
    bool freeze_nonlinear = false;
};

struct NudgeParams {
    enum class Mode { sieve, nudging };
    Mode mode = Mode::sieve;
    double mu = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    int N = 1;

    static NudgeParams sieve(double mu, int N);
    static NudgeParams nudging(double mu1, double mu2, int N);
};

/// Throws unless dt respects the advective CFL limit and dt <= 0.5 / (explicit feedback rate).
/// With `allow_override` a violation only prints a warning.
void check_time_step(double dt, double vmax, const WaveGrid& grid, double explicit_rate, bool allow_override,
                     double cfl = 0.5);

/// phi' = -v . grad phi + kappa Lap phi + g
class TDSystem {
public:
    explicit TDSystem(TDConfig cfg);
    const TDConfig& config() const { return cfg_; }
    const DiagonalOperator& linear() const { return L_; }
    ScalarField rhs(double t, const ScalarField& phi, const ScalarField& g) const;

private:
    TDConfig cfg_;
    DiagonalOperator L_;
};

/// psi' = -v . grad psi + kappa Lap psi + f + mu P_N (obs - psi)
class NudgedTDSystem {
public:
    NudgedTDSystem(TDConfig cfg, double mu, int N, FeedbackSplit split = FeedbackSplit::matched);
    const DiagonalOperator& linear() const { return L_; }
    int rank() const { return N_; }
    ScalarField rhs(double t, const ScalarField& psi, const ScalarField& f, const ScalarField& obs_low) const;
    double explicit_rate() const;

private:
    TDConfig cfg_;
    double mu_;
    int N_;
    FeedbackSplit split_;
    DiagonalOperator L_;
};

/// State (psi, l) of the coupled reconstruction system
///   psi' = -v . grad w + kappa Lap w + l + F(l) + mu1 P_N (obs - psi),  w = P_N obs + Q_N psi
///   l'   = mu2 P_N (obs - psi)
class NudgingTDSystem {
public:
    using State = Pair<ScalarField, ScalarField>;
    NudgingTDSystem(TDConfig cfg, EnslavingMap map, double mu1, double mu2, int N,
                    FeedbackSplit split = FeedbackSplit::matched);
    const PairOperator<DiagonalOperator, DiagonalOperator>& linear() const { return L_; }
    int rank() const { return N_; }
    const EnslavingMap& map() const { return map_; }
    State rhs(double t, const State& x, const ScalarField& obs_low) const;
    double explicit_rate() const;

private:
    TDConfig cfg_;
    EnslavingMap map_;
    double mu1_, mu2_;
    int N_;
    FeedbackSplit split_;
    PairOperator<DiagonalOperator, DiagonalOperator> L_;
};

/// u' = nu Lap u - B(u, u) + Leray g
class NSESystem {
public:
    explicit NSESystem(NSEConfig cfg);
    const NSEConfig& config() const { return cfg_; }
    const DiagonalOperator& linear() const { return L_; }
    VectorField rhs(const VectorField& u, const VectorField& g) const;

private:
    NSEConfig cfg_;
    DiagonalOperator L_;
};

/// v' = nu Lap v - B(v, v) + f + mu P_N (obs - v)
class NudgedNSESystem {
public:
    NudgedNSESystem(NSEConfig cfg, double mu, int N, FeedbackSplit split = FeedbackSplit::matched);
    const DiagonalOperator& linear() const { return L_; }
    int rank() const { return N_; }
    VectorField rhs(const VectorField& v, const VectorField& f, const VectorField& obs_low) const;
    double explicit_rate() const;

private:
    NSEConfig cfg_;
    double mu_;
    int N_;
    FeedbackSplit split_;
    DiagonalOperator L_;
};

/// State (v, l):
///   v' = -P_N B(w, w) - Q_N B(w, v) + nu Lap w + l + F(l) + mu1 P_N (obs - v),  w = P_N obs + Q_N v
///   l' = mu2 P_N (obs - v)
class NudgingNSESystem {
public:
    using State = Pair<VectorField, VectorField>;
    NudgingNSESystem(NSEConfig cfg, EnslavingMap map, double mu1, double mu2, int N,
                     FeedbackSplit split = FeedbackSplit::matched);
    const PairOperator<DiagonalOperator, DiagonalOperator>& linear() const { return L_; }
    int rank() const { return N_; }
    const EnslavingMap& map() const { return map_; }
    State rhs(const State& x, const VectorField& obs_low) const;
    double explicit_rate() const;

private:
    NSEConfig cfg_;
    EnslavingMap map_;
    double mu1_, mu2_;
    int N_;
    FeedbackSplit split_;
    PairOperator<DiagonalOperator, DiagonalOperator> L_;
};

/// Observation values P_N(truth) at the four stage slots of the step being taken.
template <class Field>
using SlotObservation = std::function<Field(int slot)>;

ScalarField step_td(const ScalarField& phi, const TDSystem& sys, const ForceAt<ScalarField>& g, double t, double dt,
                    std::int64_t step = 0);
VectorField step_nse(const VectorField& u, const NSESystem& sys, const ForceAt<VectorField>& g, double t, double dt,
                     std::int64_t step = 0);
ScalarField step_nudged_td(const ScalarField& psi, const NudgedTDSystem& sys, const ForceAt<ScalarField>& f,
                           const SlotObservation<ScalarField>& obs, double t, double dt, std::int64_t step = 0);
VectorField step_nudged_nse(const VectorField& v, const NudgedNSESystem& sys, const ForceAt<VectorField>& f,
                            const SlotObservation<VectorField>& obs, double t, double dt, std::int64_t step = 0);
NudgingTDSystem::State step_nudging_td_system(const NudgingTDSystem::State& x, const NudgingTDSystem& sys,
                                              const SlotObservation<ScalarField>& obs, double t, double dt);
NudgingNSESystem::State step_nudging_nse_system(const NudgingNSESystem::State& x, const NudgingNSESystem& sys,
                                                const SlotObservation<VectorField>& obs, double t, double dt);

}  // namespace forcerecon

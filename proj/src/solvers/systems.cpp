#include "forcerecon/solvers/systems.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace forcerecon {

namespace {

bool is_low(double k2, int N) { return k2 <= double(N) * N * (1.0 + 1e-14); }

}  // namespace

NudgeParams NudgeParams::sieve(double mu, int N) {
    if (!(mu > 0.0)) throw std::invalid_argument("sieve feedback needs mu > 0");
    if (N < 1) throw std::invalid_argument("observation rank must be positive");
    return {Mode::sieve, mu, 0.0, 0.0, N};
}

NudgeParams NudgeParams::nudging(double mu1, double mu2, int N) {
    if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw std::invalid_argument("nudging needs mu1, mu2 > 0");
    if (N < 1) throw std::invalid_argument("observation rank must be positive");
    return {Mode::nudging, 0.0, mu1, mu2, N};
}

void check_time_step(double dt, double vmax, const WaveGrid& grid, double explicit_rate, bool allow_override,
                     double cfl) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const double spacing = 2.0 * std::numbers::pi / grid.points();
    std::ostringstream why;
    if (vmax > 0.0 && dt > cfl * spacing / vmax)
        why << "dt = " << dt << " exceeds the advective limit " << cfl * spacing / vmax << ". ";
    if (explicit_rate > 0.0 && dt > 0.5 / explicit_rate)
        why << "dt = " << dt << " exceeds 0.5 / (explicit feedback rate) = " << 0.5 / explicit_rate << ". ";
    if (why.str().empty()) return;
    if (!allow_override) throw std::invalid_argument(why.str() + "Reduce dt or override the check.");
    std::cerr << "warning: " << why.str() << "Continuing because the check was overridden.\n";
}

TDSystem::TDSystem(TDConfig cfg)
    : cfg_(std::move(cfg)), L_(cfg_.grid(), [k = cfg_.kappa](double k2) { return -k * k2; }) {
    if (!(cfg_.kappa > 0.0)) throw std::invalid_argument("diffusivity must be positive");
}

ScalarField TDSystem::rhs(double t, const ScalarField& phi, const ScalarField& g) const {
    ScalarField r = L_.apply(phi);
    if (!cfg_.velocity.is_zero()) r -= advect(cfg_.velocity.physical(t), phi);
    r += g;
    return r;
}

NudgedTDSystem::NudgedTDSystem(TDConfig cfg, double mu, int N, FeedbackSplit split)
    : cfg_(std::move(cfg)),
      mu_(mu),
      N_(N),
      split_(split),
      L_(cfg_.grid(), [k = cfg_.kappa, mu, N, split](double k2) {
          return -k * k2 - (split == FeedbackSplit::folded && is_low(k2, N) ? mu : 0.0);
      }) {
    if (!(cfg_.kappa > 0.0)) throw std::invalid_argument("diffusivity must be positive");
    if (mu < 0.0 || N < 1) throw std::invalid_argument("nudged equation needs mu >= 0 and N >= 1");
}

ScalarField NudgedTDSystem::rhs(double t, const ScalarField& psi, const ScalarField& f,
                                const ScalarField& obs_low) const {
    ScalarField r = cfg_.kappa * laplacian(psi);
    if (!cfg_.velocity.is_zero()) r -= advect(cfg_.velocity.physical(t), psi);
    r += f;
    r.axpy(mu_, obs_low - low(psi, N_));
    return r;
}

double NudgedTDSystem::explicit_rate() const { return split_ == FeedbackSplit::matched ? mu_ : 0.0; }

NudgingTDSystem::NudgingTDSystem(TDConfig cfg, EnslavingMap map, double mu1, double mu2, int N, FeedbackSplit split)
    : cfg_(std::move(cfg)),
      map_(std::move(map)),
      mu1_(mu1),
      mu2_(mu2),
      N_(N),
      split_(split),
      L_{DiagonalOperator(cfg_.grid(),
                          [k = cfg_.kappa, mu1, N, split](double k2) {
                              if (split == FeedbackSplit::folded && is_low(k2, N)) return -mu1;
                              return -k * k2;
                          }),
         DiagonalOperator::zero(cfg_.grid())} {
    if (!(cfg_.kappa > 0.0)) throw std::invalid_argument("diffusivity must be positive");
    if (mu1 < 0.0 || mu2 < 0.0 || N < 1) throw std::invalid_argument("nudging system needs mu1, mu2 >= 0, N >= 1");
    if (map_.rank() != N) throw std::invalid_argument("enslaving map rank must equal the observation rank");
}

NudgingTDSystem::State NudgingTDSystem::rhs(double t, const State& x, const ScalarField& obs_low) const {
    const ScalarField& psi = x.first;
    const ScalarField& l = x.second;
    const ScalarField w = obs_low + high(psi, N_);
    const ScalarField miss = obs_low - low(psi, N_);
    ScalarField dpsi = cfg_.kappa * laplacian(w);
    if (!cfg_.velocity.is_zero()) dpsi -= advect(cfg_.velocity.physical(t), w);
    dpsi += evaluate_force(l, map_);
    dpsi.axpy(mu1_, miss);
    return {std::move(dpsi), mu2_ * miss};
}

double NudgingTDSystem::explicit_rate() const {
    return split_ == FeedbackSplit::matched ? mu1_ + cfg_.kappa * N_ * N_ : std::sqrt(mu2_);
}

NSESystem::NSESystem(NSEConfig cfg) : cfg_(std::move(cfg)), L_(cfg_.grid, [n = cfg_.nu](double k2) { return -n * k2; }) {
    if (!(cfg_.nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
    if (cfg_.grid.dim() != 2) throw std::invalid_argument("the Navier-Stokes solver is two-dimensional");
}

VectorField NSESystem::rhs(const VectorField& u, const VectorField& g) const {
    VectorField r = L_.apply(u);
    if (!cfg_.freeze_nonlinear) r -= nse_bilinear(u, u);
    r += leray_project(g);
    return r;
}

NudgedNSESystem::NudgedNSESystem(NSEConfig cfg, double mu, int N, FeedbackSplit split)
    : cfg_(std::move(cfg)),
      mu_(mu),
      N_(N),
      split_(split),
      L_(cfg_.grid, [n = cfg_.nu, mu, N, split](double k2) {
          return -n * k2 - (split == FeedbackSplit::folded && is_low(k2, N) ? mu : 0.0);
      }) {
    if (!(cfg_.nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
    if (mu < 0.0 || N < 1) throw std::invalid_argument("nudged equation needs mu >= 0 and N >= 1");
}

VectorField NudgedNSESystem::rhs(const VectorField& v, const VectorField& f, const VectorField& obs_low) const {
    VectorField r = cfg_.nu * laplacian(v);
    if (!cfg_.freeze_nonlinear) r -= nse_bilinear(v, v);
    r += leray_project(f);
    r.axpy(mu_, obs_low - low(v, N_));
    return r;
}

double NudgedNSESystem::explicit_rate() const { return split_ == FeedbackSplit::matched ? mu_ : 0.0; }

NudgingNSESystem::NudgingNSESystem(NSEConfig cfg, EnslavingMap map, double mu1, double mu2, int N, FeedbackSplit split)
    : cfg_(std::move(cfg)),
      map_(std::move(map)),
      mu1_(mu1),
      mu2_(mu2),
      N_(N),
      split_(split),
      L_{DiagonalOperator(cfg_.grid,
                          [n = cfg_.nu, mu1, N, split](double k2) {
                              if (split == FeedbackSplit::folded && is_low(k2, N)) return -mu1;
                              return -n * k2;
                          }),
         DiagonalOperator::zero(cfg_.grid)} {
    if (!(cfg_.nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
    if (mu1 < 0.0 || mu2 < 0.0 || N < 1) throw std::invalid_argument("nudging system needs mu1, mu2 >= 0, N >= 1");
    if (map_.rank() != N) throw std::invalid_argument("enslaving map rank must equal the observation rank");
}

NudgingNSESystem::State NudgingNSESystem::rhs(const State& x, const VectorField& obs_low) const {
    const VectorField& v = x.first;
    const VectorField& l = x.second;
    const VectorField w = obs_low + high(v, N_);
    const VectorField miss = obs_low - low(v, N_);
    VectorField dv = cfg_.nu * laplacian(w);
    if (!cfg_.freeze_nonlinear) {
        // Low modes see B(w, w), high modes B(w, v); the split is what makes the energy estimate close.
        const PhysicalVelocity pw = to_physical_velocity(w);
        dv -= low(leray_project(advect(pw, w)), N_);
        dv -= high(leray_project(advect(pw, v)), N_);
    }
    dv += leray_project(evaluate_force(l, map_));
    dv.axpy(mu1_, miss);
    return {std::move(dv), mu2_ * miss};
}

double NudgingNSESystem::explicit_rate() const {
    return split_ == FeedbackSplit::matched ? mu1_ + cfg_.nu * N_ * N_ : std::sqrt(mu2_);
}

ScalarField step_td(const ScalarField& phi, const TDSystem& sys, const ForceAt<ScalarField>& g, double t, double dt,
                    std::int64_t step) {
    auto out = lawson_rk4_step(phi, dt, sys.linear(), [&](int s, const ScalarField& x) {
        const double ts = t + slot_offset(s, dt);
        return sys.rhs(ts, x, g({step, s, ts}));
    });
    check_finite(out, t + dt, "transport-diffusion");
    return out;
}

VectorField step_nse(const VectorField& u, const NSESystem& sys, const ForceAt<VectorField>& g, double t, double dt,
                     std::int64_t step) {
    auto out = lawson_rk4_step(u, dt, sys.linear(), [&](int s, const VectorField& x) {
        return sys.rhs(x, g({step, s, t + slot_offset(s, dt)}));
    });
    check_finite(out, t + dt, "Navier-Stokes");
    return out;
}

ScalarField step_nudged_td(const ScalarField& psi, const NudgedTDSystem& sys, const ForceAt<ScalarField>& f,
                           const SlotObservation<ScalarField>& obs, double t, double dt, std::int64_t step) {
    auto out = lawson_rk4_step(psi, dt, sys.linear(), [&](int s, const ScalarField& x) {
        const double ts = t + slot_offset(s, dt);
        return sys.rhs(ts, x, f({step, s, ts}), obs(s));
    });
    check_finite(out, t + dt, "nudged transport-diffusion");
    return out;
}

VectorField step_nudged_nse(const VectorField& v, const NudgedNSESystem& sys, const ForceAt<VectorField>& f,
                            const SlotObservation<VectorField>& obs, double t, double dt, std::int64_t step) {
    auto out = lawson_rk4_step(v, dt, sys.linear(), [&](int s, const VectorField& x) {
        return sys.rhs(x, f({step, s, t + slot_offset(s, dt)}), obs(s));
    });
    check_finite(out, t + dt, "nudged Navier-Stokes");
    return out;
}

NudgingTDSystem::State step_nudging_td_system(const NudgingTDSystem::State& x, const NudgingTDSystem& sys,
                                              const SlotObservation<ScalarField>& obs, double t, double dt) {
    auto out = lawson_rk4_step(x, dt, sys.linear(), [&](int s, const NudgingTDSystem::State& y) {
        return sys.rhs(t + slot_offset(s, dt), y, obs(s));
    });
    check_finite(out, t + dt, "transport-diffusion nudging system");
    return out;
}

NudgingNSESystem::State step_nudging_nse_system(const NudgingNSESystem::State& x, const NudgingNSESystem& sys,
                                                const SlotObservation<VectorField>& obs, double t, double dt) {
    auto out = lawson_rk4_step(x, dt, sys.linear(), [&](int s, const NudgingNSESystem::State& y) {
        return sys.rhs(y, obs(s));
    });
    check_finite(out, t + dt, "Navier-Stokes nudging system");
    return out;
}

}  // namespace forcerecon

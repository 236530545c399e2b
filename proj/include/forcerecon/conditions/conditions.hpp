#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forcerecon/forcing/enslaving_map.hpp"
#include "forcerecon/solvers/velocity.hpp"

namespace forcerecon {

/// Absolute constants the theory proves to exist without giving values. Every entry
/// defaults to 1 and is flagged as a non-rigorous placeholder until set explicitly.
///
///   sobolev     c_{p,s} for the L^{d/eps} embeddings (c_{2,0} = 1 always)
///   bernstein   C in |P_N f|_inf <= C N^{d/2} |P_N f|
///   c_L, c_L_prime, c_A, c_BG   interpolation / Brezis-Gallouet constants
///   C_abg       C(alpha, beta, gamma) of the Navier-Stokes sieve condition
///   C_star      trilinear constant in the nudging conditions
///   c2          H^2 absorbing-ball constant
class ConstantsTable {
public:
    ConstantsTable();
    double get(const std::string& name) const;
    void set(const std::string& name, double value);
    bool is_default(const std::string& name) const { return !explicit_.count(name); }
    bool any_default() const;
    const std::map<std::string, double>& values() const { return values_; }

private:
    std::map<std::string, double> values_;
    std::set<std::string> explicit_;
};

/// Velocity functionals on an epsilon grid over [0, d/2], plus U_d and the sup norms.
struct VelocityFunctionals {
    int dim = 2;
    double horizon = 0.0;
    std::vector<double> eps;
    std::vector<double> V;  // V_{eps,d}; eps = 0 is sup |v|_inf, eps = d/2 is C sup |v|_{L^2}
    std::vector<double> W;  // W_{eps,d}; finite-horizon root-mean-square of |v|_{d/eps} (eps = 0 entry unused)
    double U = 0.0;
    double sup_inf = 0.0;
    double sup_L2 = 0.0;

    /// min over the grid of V_eps N^eps / kappa; ties go to the smaller eps.
    std::pair<double, double> min_scaled_V(double N, double kappa) const;  // (value, eps)
    double W_at(double eps) const;
    double peclet(double eps, double kappa) const;
    double peclet_U(double kappa) const { return U / kappa; }
};

/// L^p norm of |v| by quadrature on the transform grid; p = infinity gives the max.
double lp_norm(const PhysicalVelocity& v, double p);

VelocityFunctionals velocity_functionals(const VelocityProvider& v, double horizon, double sample_step,
                                         const std::vector<double>& extra_eps, const ConstantsTable& constants);

struct ConditionReport {
    std::string algorithm;
    bool feasible = false;
    std::string reason;
    std::optional<int> minimal_N;

    std::optional<double> mu_lower, mu_upper, mu;
    std::optional<double> mu1, mu2, lambda1, lambda2, alpha;
    std::optional<double> t_star, lambda_star;
    std::optional<double> rho, decay_rate;
    std::optional<double> delta_N, l_N, C_F, U_g;
    /// Further named quantities, in insertion order.
    std::vector<std::pair<std::string, double>> diagnostics;
    bool nonrigorous_constants = true;

    void note(const std::string& name, double value) { diagnostics.emplace_back(name, value); }
    /// `key = value` lines, machine-readable.
    std::string to_key_values() const;
    /// Aligned human-readable summary.
    std::string to_text() const;
};

/// rho = (a + b + sqrt((a - b)^2 + (1 + eps) c^2)) / 2
double gronwall_rate(double a, double b, double c_bar, double eps);

/// Roots of s^2 - mu1 s + mu2 = 0 as (lambda1 >= lambda2); throws if complex.
std::pair<double, double> roots_from_mu(double mu1, double mu2);
std::pair<double, double> mu_from_roots(double lambda1, double lambda2);

/// l_N = 2 (sqrt(ln N) + 1)
double log_factor(double N);

struct SieveTDOptions {
    bool strong = false;
    double dt = 0.0;        // t_star is snapped up to a multiple of dt when positive
    double margin = 0.9;    // t_star makes the contraction expression <= margin
    std::optional<double> mu;  // use this mu instead of the default choice inside the interval
};

/// Admissible mu interval, t_star and contraction factor for the transport-diffusion sieve.
/// The default mu is the geometric mean of the interval ends (lower end floored at 1% of the upper).
ConditionReport sieve_td_mu_interval(const VelocityFunctionals& f, const EnslavingMap& map, int N, double kappa,
                                     const SieveTDOptions& opt = {});

struct NudgingTDOptions {
    double eps = 0.5;             // the epsilon of W_{eps,d}
    double gronwall_eps = 0.01;   // the (1 + eps) slack in the decay rate
    double lambda1_multiple = 4.0;
    std::optional<double> lambda2;  // default kappa N^2 / 2
};

ConditionReport nudging_td_params(const VelocityFunctionals& f, const EnslavingMap& map, int N, double kappa,
                                  const ConstantsTable& constants, const NudgingTDOptions& opt = {});

struct GrashofReport {
    double G = 0.0, G_star = 0.0;
    double R = 0.0, R_star = 0.0;
    double shape = 0.0;  // sup ||g|| / sup |g|, 0 for g = 0
    double R2 = 0.0;
    double T1 = 0.0, T2 = 0.0;  // heuristic e-folding absorbing times
    double horizon = 0.0;
};

/// Grashof numbers and absorbing-ball radii from force samples over the horizon; u0 sets the
/// absorbing-time estimates (zero when u0 already lies inside the balls).
GrashofReport grashof_report(const std::vector<VectorField>& force_samples, double nu, double horizon,
                             const ConstantsTable& constants, const VectorField* u0 = nullptr);

struct SieveNSEAssumptions {
    double alpha = 1.0, beta = 1.0, gamma = 1.0;
    double sigma = 1.0;  // shape-factor bound
    double M0 = 1.0;     // bound on the initial model error
    double R = 1.0;      // bound with nu G <= R
    /// Absorbing times used for t_star; t_star = max(T1, T2, t1').
    double T1 = 0.0, T2 = 0.0;
};

ConditionReport sieve_nse_mu_interval(const SieveNSEAssumptions& a, const EnslavingMap& map, int N, double nu,
                                      const ConstantsTable& constants, std::optional<double> mu = {});

struct NudgingNSEBudget {
    double sync_error_sq = 0.0;   // |p0|^2 + |q0|^2
    double model_error_dual = 0.0;  // ||P_N g - l0||_*
    double low_error_dual = 0.0;    // ||p0||_*
};

ConditionReport nudging_nse_params(double U_g, const EnslavingMap& map, int N, double nu,
                                   const ConstantsTable& constants, const NudgingNSEBudget& budget = {},
                                   double lambda1_multiple = 4.0);

}  // namespace forcerecon

#include "forcerecon/conditions/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "forcerecon/spectral/transform.hpp"

namespace forcerecon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest N we are willing to search when looking for the smallest feasible one.
constexpr int kSearchCap = 1 << 20;

double map_constant(const EnslavingMap& map, MapOrder required, int N) {
    if (!(map.order() == required)) {
        std::ostringstream s;
        s << "enslaving map has order (" << map.order().alpha << "," << map.order().beta << "), condition needs ("
          << required.alpha << "," << required.beta << ")";
        throw std::invalid_argument(s.str());
    }
    if (!map.declared_lipschitz()) throw std::invalid_argument("enslaving map has no declared Lipschitz constant");
    if (N < map.rank()) throw std::invalid_argument("observation rank is below the rank of the enslaving map");
    return *map.declared_lipschitz();
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

std::optional<int> search_minimal_N(int from, const std::function<bool(int)>& ok) {
    for (int n = std::max(from, 1); n <= kSearchCap; n = n < 4096 ? n + 1 : n + n / 64)
        if (ok(n)) {
            // the coarse steps above 4096 may overshoot; walk back
            while (n > from && ok(n - 1)) --n;
            return n;
        }
    return std::nullopt;
}

std::string format_value(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

}  // namespace

ConstantsTable::ConstantsTable() {
    for (const char* name : {"sobolev", "bernstein", "c_L", "c_L_prime", "c_A", "c_BG", "C_abg", "C_star", "c2"})
        values_[name] = 1.0;
}

double ConstantsTable::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::invalid_argument("unknown constant '" + name + "'");
    return it->second;
}

void ConstantsTable::set(const std::string& name, double value) {
    if (!values_.count(name)) throw std::invalid_argument("unknown constant '" + name + "'");
    require_positive(value, name.c_str());
    values_[name] = value;
    explicit_.insert(name);
}

bool ConstantsTable::any_default() const { return explicit_.size() < values_.size(); }

// ---------------------------------------------------------------------------------------------

double lp_norm(const PhysicalVelocity& v, double p) {
    if (v.components.empty()) return 0.0;
    const std::size_t n = v.components[0].size();
    if (std::isinf(p)) return sup_norm(v);
    if (!(p >= 1.0)) throw std::invalid_argument("L^p norm needs p >= 1");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& c : v.components) s += c[i] * c[i];
        sum += std::pow(s, p / 2.0);
    }
    const double cell = std::pow(2.0 * std::numbers::pi, v.grid.dim()) / double(n);
    return std::pow(sum * cell, 1.0 / p);
}

namespace {

// |grad v|_{L^d} with the Frobenius norm of the gradient matrix at each point.
double gradient_norm(const VectorField& v) {
    const int d = v.dim();
    std::vector<ScalarField> parts;
    for (int a = 0; a < d; ++a) {
        const VectorField g = gradient(dealias(v[a]));
        for (int b = 0; b < d; ++b) parts.push_back(g[b]);
    }
    std::vector<const ScalarField*> ptrs;
    for (const auto& p : parts) ptrs.push_back(&p);
    PhysicalVelocity stacked{v.grid(), to_physical(ptrs)};
    return lp_norm(stacked, double(d));
}

}  // namespace

std::pair<double, double> VelocityFunctionals::min_scaled_V(double N, double kappa) const {
    require_positive(kappa, "kappa");
    double best = kInf, at = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double val = V[i] * std::pow(N, eps[i]) / kappa;
        if (val < best) {
            best = val;
            at = eps[i];
        }
    }
    return {best, at};
}

double VelocityFunctionals::W_at(double e) const {
    for (std::size_t i = 0; i < eps.size(); ++i)
        if (std::abs(eps[i] - e) < 1e-12) return W[i];
    throw std::invalid_argument("epsilon " + format_value(e) + " is not on the functional grid");
}

double VelocityFunctionals::peclet(double e, double kappa) const {
    for (std::size_t i = 0; i < eps.size(); ++i)
        if (std::abs(eps[i] - e) < 1e-12) return V[i] / kappa;
    throw std::invalid_argument("epsilon " + format_value(e) + " is not on the functional grid");
}

VelocityFunctionals velocity_functionals(const VelocityProvider& v, double horizon, double sample_step,
                                         const std::vector<double>& extra_eps, const ConstantsTable& constants) {
    require_positive(horizon, "horizon");
    const int d = v.grid().dim();
    VelocityFunctionals out;
    out.dim = d;
    out.horizon = horizon;

    for (int q = 0; q <= 2 * d; ++q) out.eps.push_back(0.25 * q);
    for (double e : extra_eps) {
        if (e < 0.0 || e > 0.5 * d) throw std::invalid_argument("epsilon outside [0, d/2]");
        out.eps.push_back(e);
    }
    std::sort(out.eps.begin(), out.eps.end());
    out.eps.erase(std::unique(out.eps.begin(), out.eps.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                  out.eps.end());
    const std::size_t m = out.eps.size();
    out.V.assign(m, 0.0);
    out.W.assign(m, 0.0);
    if (v.is_zero()) return out;

    std::vector<double> times;
    if (v.time_independent()) {
        times.push_back(0.0);
    } else {
        require_positive(sample_step, "sample step");
        const auto n = static_cast<long>(std::ceil(horizon / sample_step - 1e-9));
        for (long i = 0; i <= n; ++i) times.push_back(std::min(horizon, double(i) * sample_step));
    }

    const double c_sob = constants.get("sobolev");
    const double c_bern = constants.get("bernstein");
    // rows: time samples, columns: |v|_{d/eps}
    std::vector<std::vector<double>> norms(times.size(), std::vector<double>(m));
    for (std::size_t s = 0; s < times.size(); ++s) {
        const auto& phys = v.physical(times[s]);
        for (std::size_t i = 0; i < m; ++i) {
            const double p = out.eps[i] == 0.0 ? kInf : d / out.eps[i];
            norms[s][i] = lp_norm(phys, p);
        }
        out.sup_inf = std::max(out.sup_inf, norms[s][0]);
        out.sup_L2 = std::max(out.sup_L2, norms[s][m - 1]);
        const double grad = gradient_norm(v.field(times[s]));
        out.U = std::max(out.U, std::min(c_sob * c_sob * grad, norms[s][0]));
    }

    for (std::size_t i = 0; i < m; ++i) {
        double sup = 0.0;
        for (const auto& row : norms) sup = std::max(sup, row[i]);
        const double e = out.eps[i];
        const double c = e == 0.0 ? 1.0 : (std::abs(e - 0.5 * d) < 1e-12 ? c_bern : c_sob);
        out.V[i] = c * sup;

        if (times.size() == 1) {
            out.W[i] = norms[0][i];
        } else {
            double acc = 0.0;
            for (std::size_t s = 0; s + 1 < times.size(); ++s)
                acc += 0.5 * (times[s + 1] - times[s]) * (norms[s][i] * norms[s][i] + norms[s + 1][i] * norms[s + 1][i]);
            out.W[i] = std::sqrt(acc / (times.back() - times.front()));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

std::string ConditionReport::to_key_values() const {
    std::ostringstream s;
    s << "algorithm = " << algorithm << "\n";
    s << "feasible = " << (feasible ? "true" : "false") << "\n";
    if (!reason.empty()) s << "reason = " << reason << "\n";
    if (minimal_N) s << "minimal_N = " << *minimal_N << "\n";
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) s << k << " = " << format_value(*v) << "\n";
    };
    put("mu_lower", mu_lower);
    put("mu_upper", mu_upper);
    put("mu", mu);
    put("mu1", mu1);
    put("mu2", mu2);
    put("lambda1", lambda1);
    put("lambda2", lambda2);
    put("alpha", alpha);
    put("t_star", t_star);
    put("lambda_star", lambda_star);
    put("rho", rho);
    put("decay_rate", decay_rate);
    put("delta_N", delta_N);
    put("l_N", l_N);
    put("C_F", C_F);
    put("U_g", U_g);
    for (const auto& [k, v] : diagnostics) s << k << " = " << format_value(v) << "\n";
    s << "nonrigorous_constants = " << (nonrigorous_constants ? "true" : "false") << "\n";
    return s.str();
}

std::string ConditionReport::to_text() const {
    std::ostringstream s;
    s << algorithm << ": " << (feasible ? "feasible" : "NOT feasible");
    if (!reason.empty()) s << " (" << reason << ")";
    s << "\n";
    std::size_t width = 14;
    for (const auto& d : diagnostics) width = std::max(width, d.first.size() + 2);
    if (mu_lower && mu_upper)
        s << "  " << std::left << std::setw(int(width)) << "mu interval" << "(" << format_value(*mu_lower) << ", "
          << format_value(*mu_upper) << ")\n";
    auto line = [&](const std::string& k, const std::optional<double>& v) {
        if (v) s << "  " << std::left << std::setw(int(width)) << k << format_value(*v) << "\n";
    };
    line("mu", mu);
    line("mu1", mu1);
    line("mu2", mu2);
    line("lambda1", lambda1);
    line("lambda2", lambda2);
    line("alpha", alpha);
    line("t_star", t_star);
    line("lambda_star", lambda_star);
    line("rho", rho);
    line("decay rate", decay_rate);
    line("delta_N", delta_N);
    line("l_N", l_N);
    line("C_F", C_F);
    line("U(g)", U_g);
    if (minimal_N) s << "  " << std::left << std::setw(int(width)) << "minimal N" << *minimal_N << "\n";
    for (const auto& [k, v] : diagnostics) line(k, v);
    if (nonrigorous_constants) s << "  note: some absolute constants are placeholder defaults\n";
    return s.str();
}

double gronwall_rate(double a, double b, double c_bar, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("gronwall_rate needs eps > 0");
    if (std::isinf(c_bar)) return kInf;
    return 0.5 * (a + b + std::sqrt((a - b) * (a - b) + (1.0 + eps) * c_bar * c_bar));
}

std::pair<double, double> roots_from_mu(double mu1, double mu2) {
    const double disc = mu1 * mu1 - 4.0 * mu2;
    if (disc < 0.0) throw std::invalid_argument("mu1^2 < 4 mu2: the nudging roots are complex");
    const double r = std::sqrt(disc);
    // the larger root directly, the smaller through the product to avoid cancellation
    const double l1 = 0.5 * (mu1 + r);
    const double l2 = l1 > 0.0 ? mu2 / l1 : 0.5 * (mu1 - r);
    return {l1, l2};
}

std::pair<double, double> mu_from_roots(double lambda1, double lambda2) { return {lambda1 + lambda2, lambda1 * lambda2}; }

double log_factor(double N) {
    if (!(N >= 1.0)) throw std::invalid_argument("l_N needs N >= 1");
    return 2.0 * (std::sqrt(std::log(N)) + 1.0);
}

// ---------------------------------------------------------------------------------------------

ConditionReport sieve_td_mu_interval(const VelocityFunctionals& f, const EnslavingMap& map, int N, double kappa,
                                     const SieveTDOptions& opt) {
    require_positive(kappa, "kappa");
    const double L = map_constant(map, opt.strong ? kStrongOrder : kWeakOrder, N);
    ConditionReport r;
    r.algorithm = opt.strong ? "sieve_td_strong" : "sieve_td";
    const auto [minV, at_eps] = f.min_scaled_V(N, kappa);
    double base = (1.0 + L) * minV;
    if (opt.strong) base = std::max(base, f.U / kappa);
    const double lower = base * base * kappa;
    const double upper = double(N) * N * kappa / (opt.strong ? 4.0 : 2.0);
    r.mu_lower = lower;
    r.mu_upper = upper;
    r.note("lipschitz", L);
    r.note("min_scaled_V", minV);
    r.note("min_eps", at_eps);
    r.nonrigorous_constants = true;  // V carries c_{p,s}

    r.feasible = lower < upper;
    if (!r.feasible) {
        r.reason = "lower bound exceeds N^2 kappa bound";
        r.minimal_N = search_minimal_N(N + 1, [&](int n) {
            double b = (1.0 + L) * f.min_scaled_V(n, kappa).first;
            if (opt.strong) b = std::max(b, f.U / kappa);
            return b * b * kappa < double(n) * n * kappa / (opt.strong ? 4.0 : 2.0);
        });
        return r;
    }

    double mu;
    if (opt.mu) {
        mu = *opt.mu;
        if (!(mu > lower && mu <= upper)) throw std::invalid_argument("requested mu lies outside the admissible interval");
    } else {
        mu = std::sqrt(std::max(lower, 0.01 * upper) * upper);
    }
    r.mu = mu;

    // e^{-mu t} + (kappa / mu) X <= margin
    const double X = (1.0 + L) * (1.0 + L) * minV * minV;
    const double floor_term = kappa / mu * X;
    if (floor_term >= opt.margin) {
        r.reason = "no finite relaxation time reaches the margin";
        r.note("contraction_floor", floor_term);
        return r;
    }
    double t = -std::log(opt.margin - floor_term) / mu;
    if (opt.dt > 0.0) t = std::ceil(t / opt.dt - 1e-9) * opt.dt;
    r.t_star = t;
    r.lambda_star = std::sqrt(std::exp(-mu * t) + floor_term);
    r.note("contraction_floor", floor_term);
    return r;
}

ConditionReport nudging_td_params(const VelocityFunctionals& f, const EnslavingMap& map, int N, double kappa,
                                  const ConstantsTable& constants, const NudgingTDOptions& opt) {
    require_positive(kappa, "kappa");
    if (!(opt.eps > 0.0 && opt.eps < 1.0)) throw std::invalid_argument("nudging epsilon must lie in (0, 1)");
    const double L = map_constant(map, kWeakOrder, N);
    const double C = constants.get("C_star");
    const double W = f.W_at(opt.eps);
    const double e = opt.eps;

    ConditionReport r;
    r.algorithm = "nudging_td";
    r.nonrigorous_constants = constants.is_default("C_star");
    auto lhs = [&](int n) { return C * (L / n) * (W / kappa) * std::pow(double(n), e); };
    r.note("lipschitz", L);
    r.note("W", W);
    r.note("condition_lhs", lhs(N));
    r.feasible = lhs(N) < std::sqrt(0.5);
    if (!r.feasible) {
        r.reason = "family condition fails at this N";
        r.minimal_N = search_minimal_N(N + 1, [&](int n) { return lhs(n) < std::sqrt(0.5); });
        return r;
    }

    // With s = alpha / lambda2 the existence condition reads 4 kappa N^2 - 8 N^2 L^2 / s > s C^2 W^2 N^{2 eps}.
    const double n2 = double(N) * N;
    const double A1 = 4.0 * kappa * n2;
    const double A2 = 8.0 * n2 * L * L;
    const double A3 = C * C * W * W * std::pow(double(N), 2.0 * e);
    double s;
    if (L > 0.0) {
        // the choice lambda2 = kappa alpha / (4 L^2) maximises lambda2 - 2 lambda2^2 L^2 / (alpha kappa)
        s = 4.0 * L * L / kappa;
    } else if (A3 > 0.0) {
        s = A1 / (2.0 * A3);
    } else {
        s = 1.0;
    }
    const double lambda2 = opt.lambda2.value_or(0.5 * kappa * n2);
    require_positive(lambda2, "lambda2");
    const double alpha = s * lambda2;
    const double lambda1 = opt.lambda1_multiple * lambda2;
    if (!(lambda1 > lambda2)) throw std::invalid_argument("lambda1 multiple must exceed 1");
    const auto [mu1, mu2] = mu_from_roots(lambda1, lambda2);

    r.lambda1 = lambda1;
    r.lambda2 = lambda2;
    r.alpha = alpha;
    r.mu1 = mu1;
    r.mu2 = mu2;
    const double a = -kappa * n2;
    const double b = -(lambda2 - 2.0 * lambda2 * lambda2 * L * L / (alpha * kappa));
    const double c_bar = std::sqrt(alpha) * C * W * std::pow(double(N), e);
    r.rho = gronwall_rate(a, b, c_bar, opt.gronwall_eps);
    r.decay_rate = -*r.rho;
    r.note("discriminant", kappa * kappa * std::pow(double(N), 2.0 * (1.0 - e)) - 2.0 * L * L * C * C * W * W);
    r.note("existence_margin", A1 - A2 / s - s * A3);
    return r;
}

// ---------------------------------------------------------------------------------------------

GrashofReport grashof_report(const std::vector<VectorField>& force_samples, double nu, double horizon,
                             const ConstantsTable& constants, const VectorField* u0) {
    require_positive(nu, "nu");
    GrashofReport g;
    g.horizon = horizon;
    double sup_L2 = 0.0, sup_dual = 0.0, sup_H1 = 0.0;
    for (const auto& s : force_samples) {
        sup_L2 = std::max(sup_L2, seminorm(s, 0.0));
        sup_dual = std::max(sup_dual, seminorm(s, -1.0));
        sup_H1 = std::max(sup_H1, seminorm(s, 1.0));
    }
    g.G = sup_L2 / (nu * nu);
    g.G_star = sup_dual / (nu * nu);
    g.R = std::sqrt(2.0) * nu * g.G;
    g.R_star = std::sqrt(2.0) * nu * g.G_star;
    g.shape = sup_L2 > 0.0 ? sup_H1 / sup_L2 : 0.0;
    g.R2 = constants.get("c2") * (g.shape + g.R / (std::sqrt(2.0) * nu)) * g.R / std::sqrt(2.0);
    if (u0 && g.R > 0.0) {
        const double a = seminorm(*u0, 0.0) / g.R;
        g.T1 = a * a > 2.0 ? std::log(a * a - 1.0) / nu : 0.0;
        const double b = seminorm(*u0, 2.0) / (std::sqrt(2.0) * g.R2);
        g.T2 = b * b > 2.0 ? std::log(b * b - 1.0) / nu : 0.0;
    }
    return g;
}

ConditionReport sieve_nse_mu_interval(const SieveNSEAssumptions& a, const EnslavingMap& map, int N, double nu,
                                      const ConstantsTable& constants, std::optional<double> mu) {
    require_positive(nu, "nu");
    for (double x : {a.alpha, a.beta, a.gamma, a.R}) require_positive(x, "sieve assumption");
    if (a.sigma < 0.0 || a.M0 < 0.0) throw std::invalid_argument("sigma and M0 must be nonnegative");
    const double L = map_constant(map, kStrongOrder, N);
    const double Cabg = constants.get("C_abg");

    ConditionReport r;
    r.algorithm = "sieve_nse";
    r.nonrigorous_constants = constants.is_default("C_abg");
    const double CF = std::sqrt(Cabg) / nu *
                      std::max(a.M0 / a.R, (1.0 + L) * a.R * std::sqrt(std::log(std::numbers::e + a.sigma + a.R / nu)));
    r.C_F = CF;
    r.mu_lower = CF * CF * nu;
    r.mu_upper = double(N) * N * nu / 4.0;
    r.note("lipschitz", L);
    r.feasible = CF < 0.5 * N;
    if (!r.feasible) {
        r.reason = "C_F(N) >= N / 2";
        r.minimal_N = static_cast<int>(std::floor(2.0 * CF)) + 1;
        return r;
    }
    const double m = mu.value_or(std::sqrt(std::max(*r.mu_lower, 0.01 * *r.mu_upper) * *r.mu_upper));
    if (!(m >= *r.mu_lower && m < *r.mu_upper)) throw std::invalid_argument("requested mu lies outside the admissible interval");
    r.mu = m;
    double t1p = 0.0;
    if (a.M0 > 0.0) t1p = std::max(0.0, std::log(a.gamma * a.gamma * m * nu * a.R * a.R / (a.M0 * a.M0)) / m);
    r.t_star = std::max({a.T1, a.T2, t1p});
    r.note("t1_prime", t1p);
    return r;
}

ConditionReport nudging_nse_params(double U_g, const EnslavingMap& map, int N, double nu,
                                   const ConstantsTable& constants, const NudgingNSEBudget& budget,
                                   double lambda1_multiple) {
    require_positive(nu, "nu");
    if (U_g < 0.0) throw std::invalid_argument("U(g) must be nonnegative");
    const double L = map_constant(map, kWeakOrder, N);
    const double C = constants.get("C_star");

    ConditionReport r;
    r.algorithm = "nudging_nse";
    r.nonrigorous_constants = constants.is_default("C_star");
    r.U_g = U_g;
    auto lhs = [&](int n) { return 16.0 * C * (1.0 + U_g / nu * (1.0 + log_factor(n) * L)); };
    const double lN = log_factor(N);
    r.l_N = lN;
    const double q = C * L * U_g * lN / (N * nu);
    r.delta_N = 1.0 - 16.0 * q * q;
    r.note("lipschitz", L);
    r.note("condition_lhs", lhs(N));
    r.feasible = lhs(N) < N && *r.delta_N > 0.0;
    if (!r.feasible) {
        r.reason = "family condition fails at this N";
        r.minimal_N = search_minimal_N(N + 1, [&](int n) {
            const double qq = C * L * U_g * log_factor(n) / (n * nu);
            return lhs(n) < n && 1.0 - 16.0 * qq * qq > 0.0;
        });
        return r;
    }

    const double n2 = double(N) * N;
    // initial-error budget E0 + alpha ||r0||_*^2 <= nu^2 / (2 alpha), r = e / lambda2 - p
    const double A = L > 0.0 ? 4.0 * L * L * budget.model_error_dual / nu : 0.0;
    const double B = budget.low_error_dual;
    const double E0 = budget.sync_error_sq;
    double alpha_budget = kInf;
    if (A * A >= 0.5 * nu * nu) {
        r.feasible = false;
        r.reason = "initial model error exceeds the nudging budget";
        return r;
    }
    {
        const double qa = B * B, qb = E0 + 2.0 * A * B, qc = A * A - 0.5 * nu * nu;
        if (qa > 0.0)
            alpha_budget = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
        else if (qb > 0.0)
            alpha_budget = -qc / qb;
    }

    const double pen = 2.0 * C * C * U_g * U_g * lN * lN / (n2 * nu);  // coefficient of alpha in C(lambda)
    double alpha, lambda2, Cl;
    if (L > 0.0) {
        // 2 C(lambda2) = N^2 nu / 8 balances the two decay limits
        alpha = std::min(alpha_budget, n2 * L * L / (2.0 * *r.delta_N));
        lambda2 = nu * alpha / (4.0 * L * L);
        Cl = *r.delta_N * nu * alpha / (8.0 * L * L);
    } else {
        lambda2 = nu * n2 / 8.0;
        const double alpha_pen = pen > 0.0 ? lambda2 / (4.0 * pen) : 1.0;
        alpha = std::min(alpha_budget, alpha_pen);
        Cl = lambda2 - alpha * pen;
    }
    r.alpha = alpha;
    r.lambda2 = lambda2;
    r.lambda1 = lambda1_multiple * lambda2;
    if (!(lambda1_multiple > 1.0)) throw std::invalid_argument("lambda1 multiple must exceed 1");
    const auto [mu1, mu2] = mu_from_roots(*r.lambda1, lambda2);
    r.mu1 = mu1;
    r.mu2 = mu2;
    r.decay_rate = std::min(n2 * nu / 8.0, 2.0 * Cl);
    r.note("C_lambda2", Cl);
    // the proof asks lambda1 > nu N^2 / (4 L^2) + (L^2 + C^2 U^2 l_N^2) / nu; reported, not enforced
    r.note("lambda1_proof_bound", L > 0.0 ? nu * n2 / (4.0 * L * L) + (L * L + C * C * U_g * U_g * lN * lN) / nu : kInf);
    return r;
}

}  // namespace forcerecon

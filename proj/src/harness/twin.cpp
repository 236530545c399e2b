#include "forcerecon/harness/twin.hpp"

#include <omp.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "forcerecon/forcing/map_descriptor.hpp"
#include "forcerecon/kernels/kernels.hpp"
#include "forcerecon/sieve/sieve.hpp"
#include "forcerecon/spectral/random.hpp"
#include "forcerecon/spectral/snapshot_io.hpp"
#include "json.hpp"

namespace forcerecon {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------------------------
// ErrorSeries

bool ErrorSeries::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> ErrorSeries::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::invalid_argument("no column '" + name + "'");
    const auto c = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

const FitResult* ErrorSeries::fit(const std::string& column) const {
    for (const auto& [name, f] : fits)
        if (name == column) return &f;
    return nullptr;
}

std::string ErrorSeries::csv() const {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t i = 0; i < columns.size(); ++i) s << (i ? "," : "") << columns[i];
    s << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
        s << "\n";
    }
    return s.str();
}

ErrorSeries ErrorSeries::parse_csv(const std::string& text, const std::string& source) {
    ErrorSeries e;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto cells = [](const std::string& l) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) out.push_back(trim(cell));
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto c = cells(line);
        if (e.columns.empty()) {
            e.columns = std::move(c);
            continue;
        }
        if (c.size() != e.columns.size())
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(e.columns.size()) +
                             " values");
        std::vector<double> row;
        for (const auto& v : c) row.push_back(v == "nan" || v == "-nan" ? NAN : parse_real(v, source));
        e.rows.push_back(std::move(row));
    }
    if (e.columns.empty()) throw ParseError(source + ": empty CSV");
    return e;
}

std::optional<double> TwinResult::parameter(const std::string& name) const {
    for (const auto& [k, v] : parameters)
        if (k == name) return v;
    return std::nullopt;
}

// ---------------------------------------------------------------------------------------------
// Setup shared by every pipeline

namespace {

using Clock = std::chrono::steady_clock;

void say(const TwinOptions& opt, const std::string& msg) {
    if (!opt.quiet) std::cerr << msg << "\n";
}

/// A sin(y) e_x
VectorField shear_flow(const WaveGrid& g, double amplitude) {
    VectorField v(g);
    Wavevector k{0, 1, 0};
    v[0].set_mode(k, Complex(0.0, -0.5 * amplitude));
    v.mark_divergence_free(true);
    return v;
}

VelocityProvider make_velocity(const ExperimentConfig& c, const WaveGrid& g) {
    if (c.velocity_kind == "zero" || c.velocity_amplitude == 0.0) return VelocityProvider(g);
    VectorField v0(g);
    if (c.velocity_kind == "taylor_green") {
        if (c.dim != 2) throw std::invalid_argument("the Taylor-Green velocity is two-dimensional; use velocity.kind = shear");
        v0 = taylor_green(g, c.velocity_amplitude);
    } else {
        v0 = shear_flow(g, c.velocity_amplitude);
    }
    if (c.velocity_modulation == 0.0 || c.velocity_omega == 0.0) return VelocityProvider::constant(std::move(v0));
    const double m = c.velocity_modulation, w = c.velocity_omega;
    return VelocityProvider::analytic([v0, m, w](double t) { return (1.0 + m * std::sin(w * t)) * v0; }, g,
                                      2.0 * std::numbers::pi / w);
}

EnslavingMap make_map(const ExperimentConfig& c) {
    if (c.force_map == "zero") return EnslavingMap::zero(c.force_rank);
    if (c.force_map == "file") {
        auto m = load_map_descriptor(c.force_map_file);
        if (m.rank() != c.force_rank)
            throw std::invalid_argument("map file rank " + std::to_string(m.rank()) + " differs from force.rank");
        return m;
    }
    PowerLawTail p;
    p.profile = c.force_profile == "exponential" ? PowerLawTail::Profile::exponential : PowerLawTail::Profile::power;
    p.exponent = c.force_exponent;
    p.weight = c.force_weight;
    p.dim = c.dim;
    return EnslavingMap::power_law_tail(c.force_rank, p);
}

template <class Field>
Field random_low(const WaveGrid& g, std::mt19937_64& rng, double decay, int rank);
template <>
ScalarField random_low<ScalarField>(const WaveGrid& g, std::mt19937_64& rng, double decay, int rank) {
    return low(random_scalar(g, rng, decay, rank), rank);
}
template <>
VectorField random_low<VectorField>(const WaveGrid& g, std::mt19937_64& rng, double decay, int rank) {
    return low(random_solenoidal(g, rng, decay, rank), rank);
}

template <class Field>
Field read_low_file(const std::string& path, const WaveGrid& g, int rank) {
    auto v = read_snapshot(path);
    if (!std::holds_alternative<Field>(v)) throw std::invalid_argument(path + ": wrong field kind for this equation");
    Field f = std::get<Field>(std::move(v));
    if (grid_of(f) != g) throw std::invalid_argument(path + ": snapshot grid differs from the configured grid");
    require_low_support(f, rank);
    return f;
}

/// The truth force: seeded low modes with |k|^{-decay} amplitudes (or a snapshot), scaled so
/// that |g(0)| = amplitude (NSE: the Grashof number equals force.grashof when positive).
template <class Field>
QuasiFiniteForce<Field> make_force(const ExperimentConfig& c, const WaveGrid& g, const EnslavingMap& map,
                                   std::mt19937_64& rng) {
    Field a = c.force_low_file.empty() ? random_low<Field>(g, rng, c.force_decay, c.force_rank)
                                       : read_low_file<Field>(c.force_low_file, g, c.force_rank);
    Field b = zero_like(a);
    if (c.force_omega != 0.0) b = random_low<Field>(g, rng, c.force_decay, c.force_rank);
    double size = seminorm(evaluate_force(a, map), 0.0);
    double target = c.force_amplitude;
    if constexpr (std::is_same_v<Field, VectorField>) {
        if (c.force_grashof > 0.0) target = c.force_grashof * c.nu * c.nu;
    }
    if (size > 0.0 && c.force_low_file.empty()) {
        a *= target / size;
        b *= target / size;
    }
    if (c.force_omega == 0.0) return QuasiFiniteForce<Field>(std::move(a), map);
    const double w = c.force_omega;
    return QuasiFiniteForce<Field>([a, b, w](double t) { return std::cos(w * t) * a + std::sin(w * t) * b; }, a, map);
}

template <class Field>
Field make_initial(const ExperimentConfig& c, const WaveGrid& g, std::mt19937_64& rng) {
    Field f(g);
    if constexpr (std::is_same_v<Field, ScalarField>) f = random_scalar(g, rng, c.initial_decay);
    else f = random_solenoidal(g, rng, c.initial_decay);
    f = dealias(f);
    const double s = seminorm(f, 0.0);
    if (s > 0.0) f *= c.initial_amplitude / s;
    return f;
}

struct TDSetup {
    WaveGrid grid;
    TDConfig cfg;
    EnslavingMap map;
    ScalarForce force;
    ScalarField initial;
};

struct NSESetup {
    WaveGrid grid;
    NSEConfig cfg;
    EnslavingMap map;
    VectorForce force;
    VectorField initial;
};

TDSetup td_setup(const ExperimentConfig& c) {
    const WaveGrid g(c.dim, c.K);
    std::mt19937_64 rng(c.seed);
    auto map = make_map(c);
    auto force = make_force<ScalarField>(c, g, map, rng);
    auto phi0 = make_initial<ScalarField>(c, g, rng);
    TDConfig cfg{c.kappa, make_velocity(c, g)};
    if (c.spinup > 0.0) {
        TruthOptions o;
        o.T = c.spinup;
        o.dt = c.dt;
        o.record_stages = false;
        o.record_rhs = false;
        phi0 = generate_truth_td(TDSystem(cfg), force, std::move(phi0), o).final_state;
    }
    return {g, std::move(cfg), std::move(map), std::move(force), std::move(phi0)};
}

NSESetup nse_setup(const ExperimentConfig& c) {
    const WaveGrid g(c.dim, c.K);
    std::mt19937_64 rng(c.seed);
    auto map = make_map(c);
    auto force = make_force<VectorField>(c, g, map, rng);
    auto u0 = make_initial<VectorField>(c, g, rng);
    NSEConfig cfg{c.nu, g, false};
    if (c.spinup > 0.0) {
        TruthOptions o;
        o.T = c.spinup;
        o.dt = c.dt;
        o.record_stages = false;
        o.record_rhs = false;
        u0 = generate_truth_nse(NSESystem(cfg), force, std::move(u0), o).final_state;
    }
    return {g, cfg, std::move(map), std::move(force), std::move(u0)};
}

FeedbackSplit split_of(const ExperimentConfig& c) {
    return c.split == "folded" ? FeedbackSplit::folded : FeedbackSplit::matched;
}

bool any_auto_td_nudging(const ExperimentConfig& c) { return !c.N || !c.mu1 || !c.mu2; }
bool any_auto_sieve(const ExperimentConfig& c) { return !c.N || !c.mu || !c.t_star; }

int first_N(const ExperimentConfig& c) { return c.N ? *c.N : c.force_rank; }

/// Re-runs `check` at the checker's minimal N when N is automatic and the first try fails.
/// The report notes the N it was evaluated at.
template <class Check>
ConditionReport with_auto_N(const ExperimentConfig& c, Check check) {
    int N = first_N(c);
    auto r = check(N);
    if (!c.N && !r.feasible && r.minimal_N) {
        N = *r.minimal_N;
        r = check(N);
    }
    r.note("N", N);
    return r;
}

int used_N(const ConditionReport& r) {
    for (const auto& [k, v] : r.diagnostics)
        if (k == "N") return int(v);
    throw std::logic_error("condition report without N");
}

VelocityFunctionals td_functionals(const ExperimentConfig& c, const TDConfig& cfg, double horizon) {
    const double step = cfg.velocity.time_independent() ? horizon : horizon / 64.0;
    return velocity_functionals(cfg.velocity, horizon, step, {c.epsilon}, c.constants);
}

ConditionReport td_nudging_report(const ExperimentConfig& c, const VelocityFunctionals& f, const EnslavingMap& map) {
    NudgingTDOptions o;
    o.eps = c.epsilon;
    o.lambda1_multiple = c.lambda1_multiple;
    o.lambda2 = c.lambda2;
    const auto weak = map.with_order(kWeakOrder);
    return with_auto_N(c, [&](int N) { return nudging_td_params(f, weak, N, c.kappa, c.constants, o); });
}

ConditionReport td_sieve_report(const ExperimentConfig& c, const VelocityFunctionals& f, const EnslavingMap& map) {
    SieveTDOptions o;
    o.strong = c.strong;
    o.dt = c.dt;
    o.mu = c.mu;
    const auto m = map.with_order(c.strong ? kStrongOrder : kWeakOrder);
    return with_auto_N(c, [&](int N) { return sieve_td_mu_interval(f, m, N, c.kappa, o); });
}

std::vector<VectorField> force_samples(const VectorForce& force, double horizon) {
    std::vector<VectorField> s;
    const int n = force.time_dependent() ? 64 : 1;
    for (int i = 0; i < n; ++i) s.push_back(leray_project(force.full(horizon * i / std::max(n - 1, 1))));
    return s;
}

ConditionReport nse_sieve_report(const ExperimentConfig& c, const NSESetup& s) {
    const auto gr = grashof_report(force_samples(s.force, c.T), c.nu, c.T, c.constants, &s.initial);
    SieveNSEAssumptions a;
    a.alpha = c.assume_alpha;
    a.beta = c.assume_beta;
    a.gamma = c.assume_gamma;
    a.sigma = c.assume_sigma.value_or(gr.shape);
    a.M0 = c.assume_M0.value_or(seminorm(leray_project(s.force.full(0.0)), 0.0));
    a.R = c.assume_R.value_or(gr.R > 0.0 ? gr.R : 1.0);
    a.T1 = gr.T1;
    a.T2 = gr.T2;
    const auto strong = s.map.with_order(kStrongOrder);
    auto r = with_auto_N(c, [&](int N) { return sieve_nse_mu_interval(a, strong, N, c.nu, c.constants, c.mu); });
    r.note("grashof", gr.G);
    r.note("shape", gr.shape);
    return r;
}

struct NSENudgingInputs {
    double U_g = 0.0;
    NudgingNSEBudget budget;
};

NSENudgingInputs nse_nudging_inputs(const NSESetup& s, const Trajectory<VectorField>& traj, int N) {
    NSENudgingInputs in;
    for (const auto& u : traj.states) in.U_g = std::max(in.U_g, seminorm(u, 1.0));
    in.budget.sync_error_sq = std::pow(seminorm(s.initial, 0.0), 2);
    in.budget.model_error_dual = seminorm(low(leray_project(s.force.full(0.0)), N), -1.0);
    in.budget.low_error_dual = seminorm(low(s.initial, N), -1.0);
    return in;
}

/// U(g) needs the truth trajectory, so the checker for nudging NSE runs a truth first.
TruthRun<VectorField> nse_truth(const ExperimentConfig& c, const NSESetup& s, int N, double T, bool stages) {
    TruthOptions o;
    o.T = T;
    o.dt = c.dt;
    o.N_obs = N;
    o.record_stages = stages;
    o.record_rhs = stages;
    o.state_stride = c.record_stride;
    return generate_truth_nse(NSESystem(s.cfg), s.force, s.initial, o);
}

ConditionReport nse_nudging_report(const ExperimentConfig& c, const NSESetup& s, const Trajectory<VectorField>& traj) {
    const auto weak = s.map.with_order(kWeakOrder);
    return with_auto_N(c, [&](int N) {
        const auto in = nse_nudging_inputs(s, traj, N);
        return nudging_nse_params(in.U_g, weak, N, c.nu, c.constants, in.budget, c.lambda1_multiple);
    });
}

void require_feasible(const ConditionReport& r, bool any_auto) {
    if (!any_auto || r.feasible) return;
    std::string why = r.algorithm + " parameters are infeasible";
    if (!r.reason.empty()) why += ": " + r.reason;
    if (r.minimal_N) why += " (minimal N = " + std::to_string(*r.minimal_N) + ")";
    throw Infeasible(why);
}

void require_N_fits(int N, const WaveGrid& g) {
    if (N > g.max_wavenumber())
        throw std::invalid_argument("observation N = " + std::to_string(N) + " exceeds the grid cutoff " +
                                    std::to_string(g.max_wavenumber()));
}

double positive_or(double v, double fallback) { return v > 0.0 ? v : fallback; }

/// Rate fits over the configured window.
void fit_columns(ErrorSeries& s, const std::string& x, const std::vector<std::string>& cols,
                 std::optional<std::pair<double, double>> window, std::size_t min_samples) {
    const auto xs = s.column(x);
    for (const auto& c : cols) {
        try {
            s.fits.emplace_back(c, fit_decay_rate(xs, s.column(c), window, min_samples));
        } catch (const FitError&) {
        }
    }
}

std::optional<std::pair<double, double>> fit_window(const ExperimentConfig& c, double end) {
    return std::make_pair(c.fit_start, c.fit_end > 0.0 ? c.fit_end : end);
}

// ---------------------------------------------------------------------------------------------
// Output

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json report_json(const ConditionReport& r) {
    nlohmann::json j;
    j["algorithm"] = r.algorithm;
    j["feasible"] = r.feasible;
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (r.minimal_N) j["minimal_N"] = *r.minimal_N;
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) j[k] = number(*v);
    };
    put("mu_lower", r.mu_lower);
    put("mu_upper", r.mu_upper);
    put("mu", r.mu);
    put("mu1", r.mu1);
    put("mu2", r.mu2);
    put("lambda1", r.lambda1);
    put("lambda2", r.lambda2);
    put("alpha", r.alpha);
    put("t_star", r.t_star);
    put("lambda_star", r.lambda_star);
    put("rho", r.rho);
    put("decay_rate", r.decay_rate);
    put("delta_N", r.delta_N);
    put("l_N", r.l_N);
    put("C_F", r.C_F);
    put("U_g", r.U_g);
    for (const auto& [k, v] : r.diagnostics) j["diagnostics"][k] = number(v);
    j["nonrigorous_constants"] = r.nonrigorous_constants;
    return j;
}

nlohmann::json fits_json(const ErrorSeries& s) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [c, f] : s.fits)
        j[c] = {{"rate", f.rate}, {"intercept", f.intercept}, {"residual", f.residual}, {"used", f.used},
                {"floor_hit", f.floor_hit}};
    return j;
}

template <class Field>
void write_outputs(TwinResult& r, const TwinOptions& opt, const Field* final_force, const Field* truth_force,
                   const Field* final_state) {
    const std::string dir = !opt.out_dir.empty() ? opt.out_dir : r.config.output_dir;
    if (dir.empty()) return;
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& bytes) {
        write_file_atomically(fs::path(dir) / name, bytes);
        r.files.push_back(name);
    };
    auto put_field = [&](const std::string& name, const Field* f) {
        if (!f) return;
        const fs::path tmp = fs::path(dir) / (name + ".tmp");
        write_snapshot(tmp, *f);
        fs::rename(tmp, fs::path(dir) / name);
        r.files.push_back(name);
    };
    put("series.csv", r.series.csv());
    if (!r.stages.empty()) put("stages.csv", r.stages.csv());
    put_field("final_force.spf", final_force);
    put_field("truth_force.spf", truth_force);
    put_field("final_state.spf", final_state);

    nlohmann::json m;
    m["name"] = r.config.name;
    m["kind"] = r.kind;
    m["seed"] = r.config.seed;
    m["threads"] = omp_get_max_threads();
    m["backend"] = kernels::active_backend() == kernels::Backend::serial ? "serial" : "parallel";
    for (const auto& [k, v] : r.config.resolved) m["config"][k] = v;
    for (const auto& [k, v] : r.parameters) m["parameters"][k] = number(v);
    if (r.report) m["conditions"] = report_json(*r.report);
    m["summary"] = {{"initial_model_err", number(r.initial_model_err)},
                    {"final_model_err", number(r.final_model_err)},
                    {"initial_sync_err", number(r.initial_sync_err)},
                    {"final_sync_err", number(r.final_sync_err)},
                    {"seconds", r.seconds}};
    m["fits"]["series"] = fits_json(r.series);
    if (!r.stages.empty()) m["fits"]["stages"] = fits_json(r.stages);
    m["files"] = r.files;
    write_file_atomically(fs::path(dir) / "manifest.json", m.dump(2) + "\n");
    r.files.push_back("manifest.json");
}

void first_last(TwinResult& r, const ErrorSeries& s, const std::string& model, const std::string& sync) {
    if (s.empty()) return;
    const auto m = s.column(model), z = s.column(sync);
    auto first_finite = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isnan(x)) return x;
        return double(NAN);
    };
    auto last_finite = [](const std::vector<double>& v) {
        for (auto it = v.rbegin(); it != v.rend(); ++it)
            if (!std::isnan(*it)) return *it;
        return double(NAN);
    };
    r.initial_model_err = first_finite(m);
    r.final_model_err = last_finite(m);
    r.initial_sync_err = first_finite(z);
    r.final_sync_err = last_finite(z);
}

const std::vector<std::string> kTimeColumns = {"t", "sync_err_L2", "sync_err_H1", "model_err_Hm1", "model_err_L2"};

ErrorSeries stage_series(const std::vector<SieveStageSummary>& st) {
    ErrorSeries s;
    s.columns = {"stage", "start", "sup_model_err", "sup_model_err_L2", "sup_sync_err", "sup_sync_err_H1"};
    for (const auto& x : st)
        s.rows.push_back({double(x.stage), x.start, x.sup_model_err, x.sup_model_err_L2, x.sup_sync_err, x.sup_sync_err_H1});
    return s;
}

ErrorSeries row_series(const std::vector<SieveRow>& rows) {
    ErrorSeries s;
    s.columns = {"stage", "t", "sync_err_L2", "sync_err_H1", "model_err_Hm1", "model_err_L2"};
    for (const auto& x : rows)
        s.rows.push_back({double(x.stage), x.t, x.sync_err_L2, x.sync_err_H1, x.model_err_Hm1, x.model_err_L2});
    return s;
}

// ---------------------------------------------------------------------------------------------
// Pipelines

TwinResult nudging_td(const ExperimentConfig& c, const TwinOptions& opt) {
    TwinResult r;
    r.config = c;
    r.kind = "nudging_td";
    auto s = td_setup(c);
    const auto f = td_functionals(c, s.cfg, c.T);
    r.report = td_nudging_report(c, f, s.map);
    require_feasible(*r.report, any_auto_td_nudging(c));
    const int N = used_N(*r.report);
    require_N_fits(N, s.grid);
    const double mu1 = c.mu1 ? *c.mu1 : r.report->mu1.value_or(0.0);
    const double mu2 = c.mu2 ? *c.mu2 : r.report->mu2.value_or(0.0);
    r.parameters = {{"N", N}, {"mu1", mu1}, {"mu2", mu2}};
    say(opt, "nudging_td: N = " + std::to_string(N) + ", mu1 = " + std::to_string(mu1) + ", mu2 = " + std::to_string(mu2));

    TruthOptions to;
    to.T = c.T;
    to.dt = c.dt;
    to.N_obs = N;
    to.state_stride = c.record_stride;
    const auto truth = generate_truth_td(TDSystem(s.cfg), s.force, s.initial, to);
    const auto mapN = s.map.raise_rank(N);
    const NudgingTDSystem sys(s.cfg, mapN, mu1, mu2, N, split_of(c));
    check_time_step(c.dt, f.sup_inf, s.grid, sys.explicit_rate(), c.allow_dt_override);

    r.series.columns = kTimeColumns;
    NudgingTDSystem::State x{ScalarField(s.grid), ScalarField(s.grid)};
    const std::int64_t steps = step_count(c.T, c.dt);
    auto record = [&](std::int64_t n) {
        const double t = double(n) * c.dt;
        const ScalarField z = x.first - truth.trajectory.at_step(n);
        const ScalarField h = evaluate_force(x.second, mapN) - s.force.full(t);
        r.series.rows.push_back({t, seminorm(z, 0.0), seminorm(z, 1.0), seminorm(h, -1.0), seminorm(h, 0.0)});
    };
    for (std::int64_t n = 0; n < steps; ++n) {
        if (n % c.record_stride == 0) record(n);
        x = step_nudging_td_system(x, sys, truth.observations.slots(std::size_t(n)), double(n) * c.dt, c.dt);
    }
    if (steps % c.record_stride == 0) record(steps);
    fit_columns(r.series, "t", {"sync_err_L2", "model_err_Hm1"}, fit_window(c, c.T), 8);
    first_last(r, r.series, "model_err_Hm1", "sync_err_L2");
    const ScalarField ff = evaluate_force(x.second, mapN), tf = s.force.full(c.T);
    r.parameters.emplace_back("steps", double(steps));
    write_outputs<ScalarField>(r, opt, &ff, &tf, &x.first);
    return r;
}

TwinResult nudging_nse(const ExperimentConfig& c, const TwinOptions& opt) {
    TwinResult r;
    r.config = c;
    r.kind = "nudging_nse";
    auto s = nse_setup(c);
    // the checker needs U(g) from the truth run; the observations are cut at the chosen N
    auto truth = nse_truth(c, s, first_N(c), c.T, false);
    r.report = nse_nudging_report(c, s, truth.trajectory);
    require_feasible(*r.report, any_auto_td_nudging(c));
    const int N = used_N(*r.report);
    require_N_fits(N, s.grid);
    truth = nse_truth(c, s, N, c.T, true);
    const double mu1 = c.mu1 ? *c.mu1 : r.report->mu1.value_or(0.0);
    const double mu2 = c.mu2 ? *c.mu2 : r.report->mu2.value_or(0.0);
    r.parameters = {{"N", N}, {"mu1", mu1}, {"mu2", mu2}};
    say(opt, "nudging_nse: N = " + std::to_string(N) + ", mu1 = " + std::to_string(mu1) + ", mu2 = " + std::to_string(mu2));

    const auto mapN = s.map.raise_rank(N);
    const NudgingNSESystem sys(s.cfg, mapN, mu1, mu2, N, split_of(c));
    double vmax = 0.0;
    for (const auto& u : truth.trajectory.states) vmax = std::max(vmax, sup_norm(to_physical_velocity(u)));
    check_time_step(c.dt, vmax, s.grid, sys.explicit_rate(), c.allow_dt_override);

    r.series.columns = kTimeColumns;
    r.series.columns.push_back("apriori_energy");
    NudgingNSESystem::State x{VectorField(s.grid), VectorField(s.grid)};
    const std::int64_t steps = step_count(c.T, c.dt);
    auto record = [&](std::int64_t n) {
        const double t = double(n) * c.dt;
        const VectorField w = x.first - truth.trajectory.at_step(n);
        const VectorField h = evaluate_force(x.second, mapN) - leray_project(s.force.full(t));
        const double energy = mu2 * std::pow(seminorm(x.first, 0.0), 2) + std::pow(seminorm(x.second, 0.0), 2);
        r.series.rows.push_back({t, seminorm(w, 0.0), seminorm(w, 1.0), seminorm(h, -1.0), seminorm(h, 0.0), energy});
    };
    for (std::int64_t n = 0; n < steps; ++n) {
        if (n % c.record_stride == 0) record(n);
        x = step_nudging_nse_system(x, sys, truth.observations.slots(std::size_t(n)), double(n) * c.dt, c.dt);
    }
    if (steps % c.record_stride == 0) record(steps);
    fit_columns(r.series, "t", {"sync_err_L2", "model_err_Hm1"}, fit_window(c, c.T), 8);
    first_last(r, r.series, "model_err_Hm1", "sync_err_L2");
    const VectorField ff = evaluate_force(x.second, mapN), tf = leray_project(s.force.full(c.T));
    r.parameters.emplace_back("steps", double(steps));
    write_outputs<VectorField>(r, opt, &ff, &tf, &x.first);
    return r;
}

SieveOptions sieve_options(const ExperimentConfig& c, double t_star) {
    SieveOptions o;
    o.dt = c.dt;
    o.t_star = TimeShiftLedger::snap(std::ceil(t_star / c.dt - 1e-9) * c.dt, c.dt) * c.dt;
    o.stages = c.stages;
    o.window = c.window;
    o.record_stride = c.record_stride;
    o.split = split_of(c);
    o.allow_dt_override = c.allow_dt_override;
    return o;
}

double sieve_end(const SieveOptions& o) { return o.t_star * o.stages + positive_or(o.window, 2.0 * o.t_star); }

void sieve_summary(TwinResult& r, const std::vector<SieveStageSummary>& st, const std::vector<SieveRow>& rows,
                   const ExperimentConfig& c, double end) {
    r.stages = stage_series(st);
    r.series = row_series(rows);
    fit_columns(r.stages, "stage", {"sup_model_err", "sup_sync_err"}, std::nullopt, 3);
    if (!r.series.empty()) fit_columns(r.series, "t", {"sync_err_L2", "model_err_Hm1"}, fit_window(c, end), 8);
    first_last(r, r.stages, "sup_model_err", "sup_sync_err");
}

TwinResult sieve_td(const ExperimentConfig& c, const TwinOptions& opt) {
    TwinResult r;
    r.config = c;
    r.kind = "sieve_td";
    auto s = td_setup(c);
    const auto f = td_functionals(c, s.cfg, c.T);
    r.report = td_sieve_report(c, f, s.map);
    require_feasible(*r.report, any_auto_sieve(c));
    const int N = used_N(*r.report);
    require_N_fits(N, s.grid);
    const double mu = c.mu ? *c.mu : r.report->mu.value_or(0.0);
    const auto o = sieve_options(c, c.t_star ? *c.t_star : r.report->t_star.value_or(0.0));
    const double end = sieve_end(o);
    r.parameters = {{"N", N}, {"mu", mu}, {"t_star", o.t_star}, {"end", end}};
    say(opt, "sieve_td: N = " + std::to_string(N) + ", mu = " + std::to_string(mu) + ", t_star = " + std::to_string(o.t_star));

    TruthOptions to;
    to.T = end;
    to.dt = c.dt;
    to.N_obs = N;
    to.state_stride = c.record_stride;
    const auto truth = generate_truth_td(TDSystem(s.cfg), s.force, s.initial, to);
    const auto& force = s.force;
    const auto run = run_sieve_td(s.cfg, mu, N, s.map, truth.observations, constant_force(ScalarField(s.grid)),
                                  ScalarField(s.grid), o,
                                  {&truth.trajectory, [&force](double t) { return force.full(t); }});
    sieve_summary(r, run.stages, run.rows, c, end);
    const ScalarField ff = evaluate_force(run.final_force_low, s.map.raise_rank(N)), tf = s.force.full(end);
    write_outputs<ScalarField>(r, opt, &ff, &tf, &run.final_state);
    return r;
}

TwinResult sieve_nse(const ExperimentConfig& c, const TwinOptions& opt) {
    TwinResult r;
    r.config = c;
    r.kind = "sieve_nse";
    auto s = nse_setup(c);
    r.report = nse_sieve_report(c, s);
    require_feasible(*r.report, any_auto_sieve(c));
    const int N = used_N(*r.report);
    require_N_fits(N, s.grid);
    const double mu = c.mu ? *c.mu : r.report->mu.value_or(0.0);
    const auto o = sieve_options(c, c.t_star ? *c.t_star : r.report->t_star.value_or(0.0));
    const double end = sieve_end(o);
    r.parameters = {{"N", N}, {"mu", mu}, {"t_star", o.t_star}, {"end", end}};
    say(opt, "sieve_nse: N = " + std::to_string(N) + ", mu = " + std::to_string(mu) + ", t_star = " + std::to_string(o.t_star));

    const auto truth = nse_truth(c, s, N, end, true);
    const auto& force = s.force;
    const auto run = run_sieve_nse(s.cfg, mu, N, s.map, truth.observations, constant_force(VectorField(s.grid)),
                                   VectorField(s.grid), o,
                                   {&truth.trajectory, [&force](double t) { return leray_project(force.full(t)); }});
    sieve_summary(r, run.stages, run.rows, c, end);
    const VectorField ff = leray_project(evaluate_force(run.final_force_low, s.map.raise_rank(N)));
    const VectorField tf = leray_project(s.force.full(end));
    write_outputs<VectorField>(r, opt, &ff, &tf, &run.final_state);
    return r;
}

TwinResult sieve_stationary(const ExperimentConfig& c, const TwinOptions& opt) {
    if (c.equation != Equation::td) throw std::invalid_argument("the stationary sieve is implemented for transport-diffusion");
    if (c.force_omega != 0.0 || (c.velocity_modulation != 0.0 && c.velocity_omega != 0.0))
        throw std::invalid_argument("the stationary sieve needs a time-independent velocity and force");
    TwinResult r;
    r.config = c;
    r.kind = "sieve_stationary";
    auto s = td_setup(c);
    const auto f = td_functionals(c, s.cfg, c.T);
    r.report = td_sieve_report(c, f, s.map);
    require_feasible(*r.report, !c.N || !c.mu);
    const int N = used_N(*r.report);
    require_N_fits(N, s.grid);
    const double mu = c.mu ? *c.mu : r.report->mu.value_or(0.0);
    r.parameters = {{"N", N}, {"mu", mu}};
    say(opt, "sieve_stationary: N = " + std::to_string(N) + ", mu = " + std::to_string(mu));

    const SteadyMarch march{0.0, c.steady_tol, 400000};
    const auto truth = generate_truth_td_stationary(TDSystem(s.cfg), s.force, s.initial, N, march);
    const ScalarField gf = s.force.full();
    StationarySieveOptions so;
    so.stages = c.stages;
    so.march = march;
    so.stop_tol = c.stop_tol;
    const auto run = stationary_sieve(s.cfg, mu, N, s.map, truth.observations.low(0), ScalarField(s.grid),
                                      ScalarField(s.grid), so, {&truth.state, &gf});
    r.parameters.emplace_back("truth_iterations", truth.iterations);
    r.parameters.emplace_back("truth_residual", truth.residual);
    r.stages = stage_series(run.stages);
    r.series = r.stages;
    fit_columns(r.stages, "stage", {"sup_model_err", "sup_sync_err"}, std::nullopt, 3);
    first_last(r, r.stages, "sup_model_err", "sup_sync_err");
    const ScalarField ff = evaluate_force(run.final_force_low, s.map.raise_rank(N));
    write_outputs<ScalarField>(r, opt, &ff, &gf, &run.final_state);
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

ConditionReport check_config(const ExperimentConfig& c) {
    if (c.equation == Equation::td) {
        const auto s = td_setup(c);
        const auto f = td_functionals(c, s.cfg, c.T);
        return c.algorithm == Algorithm::nudging ? td_nudging_report(c, f, s.map) : td_sieve_report(c, f, s.map);
    }
    const auto s = nse_setup(c);
    if (c.algorithm == Algorithm::nudging) {
        const auto truth = nse_truth(c, s, first_N(c), c.T, false);
        return nse_nudging_report(c, s, truth.trajectory);
    }
    return nse_sieve_report(c, s);
}

TwinResult simulate_truth(const ExperimentConfig& c, const TwinOptions& opt) {
    const auto start = Clock::now();
    TwinResult r;
    r.config = c;
    r.kind = "truth";
    r.series.columns = {"t", "state_L2", "state_H1", "force_L2"};
    const int N = first_N(c);
    if (c.equation == Equation::td) {
        const auto s = td_setup(c);
        TruthOptions o;
        o.T = c.T;
        o.dt = c.dt;
        o.N_obs = N;
        o.record_stages = false;
        o.state_stride = c.record_stride;
        const auto truth = generate_truth_td(TDSystem(s.cfg), s.force, s.initial, o);
        for (std::size_t i = 0; i < truth.trajectory.states.size(); ++i) {
            const double t = double(i) * double(c.record_stride) * c.dt;
            const auto& x = truth.trajectory.states[i];
            r.series.rows.push_back({t, seminorm(x, 0.0), seminorm(x, 1.0), seminorm(s.force.full(t), 0.0)});
        }
        const ScalarField tf = s.force.full(c.T);
        r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        write_outputs<ScalarField>(r, opt, nullptr, &tf, &truth.final_state);
    } else {
        const auto s = nse_setup(c);
        const auto truth = nse_truth(c, s, N, c.T, false);
        for (std::size_t i = 0; i < truth.trajectory.states.size(); ++i) {
            const double t = double(i) * double(c.record_stride) * c.dt;
            const auto& x = truth.trajectory.states[i];
            r.series.rows.push_back({t, seminorm(x, 0.0), seminorm(x, 1.0), seminorm(leray_project(s.force.full(t)), 0.0)});
        }
        const VectorField tf = leray_project(s.force.full(c.T));
        r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        write_outputs<VectorField>(r, opt, nullptr, &tf, &truth.final_state);
    }
    return r;
}

TwinResult run_twin(const ExperimentConfig& c, const TwinOptions& opt) {
    const auto start = Clock::now();
    TwinResult r;
    switch (c.algorithm) {
        case Algorithm::nudging: r = c.equation == Equation::td ? nudging_td(c, opt) : nudging_nse(c, opt); break;
        case Algorithm::sieve: r = c.equation == Equation::td ? sieve_td(c, opt) : sieve_nse(c, opt); break;
        case Algorithm::sieve_stationary: r = sieve_stationary(c, opt); break;
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    say(opt, r.kind + ": model error " + std::to_string(r.initial_model_err) + " -> " + std::to_string(r.final_model_err) +
                 " in " + std::to_string(r.seconds) + " s");
    return r;
}

std::string SweepTable::csv() const {
    std::ostringstream s;
    s << std::setprecision(17);
    s << axis << ",ok,flagged,initial_model_err,final_model_err,initial_sync_err,final_sync_err,model_rate,sync_rate,error\n";
    for (const auto& row : rows) {
        s << row.value << "," << (row.ok ? 1 : 0) << "," << (row.flagged() ? 1 : 0) << ",";
        if (row.ok) {
            const auto& r = *row.result;
            const bool staged = !r.stages.empty();
            const auto& table = staged ? r.stages : r.series;
            const auto* fm = table.fit(staged ? "sup_model_err" : "model_err_Hm1");
            const auto* fz = table.fit(staged ? "sup_sync_err" : "sync_err_L2");
            s << r.initial_model_err << "," << r.final_model_err << "," << r.initial_sync_err << "," << r.final_sync_err
              << "," << (fm ? fm->rate : NAN) << "," << (fz ? fz->rate : NAN) << ",";
        } else {
            s << "nan,nan,nan,nan,nan,nan,";
        }
        std::string e = row.error;
        std::replace(e.begin(), e.end(), ',', ';');
        std::replace(e.begin(), e.end(), '\n', ' ');
        s << e << "\n";
    }
    return s.str();
}

SweepTable sweep(const ConfigAssignments& base, const std::string& axis, const std::vector<std::string>& values,
                 int workers, const TwinOptions& opt) {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    if (!config_key_is_numeric(axis)) throw std::invalid_argument("sweep axis '" + axis + "' is not a numeric config key");
    SweepTable table;
    table.axis = axis;
    table.rows.resize(values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            SweepRow& row = table.rows[i];
            row.value = values[i];
            try {
                auto raw = base;
                raw[axis] = values[i];
                const auto cfg = resolve_config(raw);
                TwinOptions o = opt;
                const std::string dir = !opt.out_dir.empty() ? opt.out_dir : cfg.output_dir;
                o.out_dir = dir.empty() ? "" : (fs::path(dir) / (axis + "=" + values[i])).string();
                if (dir.empty()) o.out_dir.clear();
                auto c = cfg;
                c.output_dir = o.out_dir;
                row.result = run_twin(c, o);
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, int(values.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return table;
}

}  // namespace forcerecon

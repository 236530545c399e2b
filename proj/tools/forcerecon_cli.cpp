#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "forcerecon/harness/twin.hpp"
#include "forcerecon/kernels/kernels.hpp"
#include "forcerecon/spectral/snapshot_io.hpp"

using namespace forcerecon;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c, bool needs_config = true) {
    auto* opt = app->add_option("--config", c.config, "experiment config file")->check(CLI::ExistingFile);
    if (needs_config) opt->required();
    app->add_option("--out", c.out, "output directory (overrides [output] dir)");
    app->add_option("--seed", c.seed, "random seed (overrides [experiment] seed)");
    app->add_option("--threads", c.threads, "worker threads; FORCERECON_THREADS is used when absent");
    app->add_flag("--quiet", c.quiet, "only print results");
}

void apply_threads(const Common& c) {
    unsigned n = 0;
    if (c.threads) n = *c.threads;
    else if (const char* env = std::getenv("FORCERECON_THREADS")) n = unsigned(parse_integer(env, "FORCERECON_THREADS"));
    if (n == 0) return;
    omp_set_num_threads(int(n));
    kernels::set_active_backend(n == 1 ? kernels::Backend::serial : kernels::Backend::parallel);
}

ConfigAssignments load_assignments(const Common& c, const char* algorithm = nullptr) {
    auto raw = parse_config_assignments(read_text_file(c.config), c.config);
    if (c.seed) raw["experiment.seed"] = std::to_string(*c.seed);
    if (!c.out.empty()) raw["output.dir"] = c.out;
    if (algorithm) {
        const auto it = raw.find("experiment.algorithm");
        const bool stationary = it != raw.end() && it->second == "sieve_stationary";
        if (!(stationary && std::string(algorithm) == "sieve")) raw["experiment.algorithm"] = algorithm;
    }
    return raw;
}

void print_summary(const TwinResult& r) {
    std::cout << "kind = " << r.kind << "\n";
    for (const auto& [k, v] : r.parameters) std::cout << k << " = " << v << "\n";
    std::cout << "initial_model_err = " << r.initial_model_err << "\nfinal_model_err = " << r.final_model_err
              << "\ninitial_sync_err = " << r.initial_sync_err << "\nfinal_sync_err = " << r.final_sync_err << "\n";
    auto fits = [](const char* table, const ErrorSeries& s) {
        for (const auto& [c, f] : s.fits)
            std::cout << table << "." << c << ".rate = " << f.rate << "  (residual " << f.residual << ", " << f.used
                      << " samples" << (f.floor_hit ? ", floor reached" : "") << ")\n";
    };
    fits("series", r.series);
    fits("stages", r.stages);
    std::cout << "seconds = " << r.seconds << "\n";
    for (const auto& f : r.files) std::cout << "wrote " << f << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Forcing reconstruction from low-mode observations"};
    app.require_subcommand(1);

    Common simulate_opts, sieve_opts, nudge_opts, check_opts, sweep_opts;
    auto* simulate = app.add_subcommand("simulate", "run the truth model only");
    add_common(simulate, simulate_opts);
    auto* sieve = app.add_subcommand("sieve", "twin experiment with the sieve (stationary if configured)");
    add_common(sieve, sieve_opts);
    auto* nudge = app.add_subcommand("nudge", "twin experiment with nudging");
    add_common(nudge, nudge_opts);
    auto* check = app.add_subcommand("check", "evaluate the convergence conditions; exit 0 iff feasible");
    add_common(check, check_opts);

    auto* sweep_cmd = app.add_subcommand("sweep", "run the configured twin for each value of one parameter");
    add_common(sweep_cmd, sweep_opts);
    std::string axis;
    std::vector<std::string> values;
    int workers = 1;
    sweep_cmd->add_option("--axis", axis, "parameter as section.key")->required();
    sweep_cmd->add_option("--values", values, "values to try")->required();
    sweep_cmd->add_option("--workers", workers, "concurrent runs")->check(CLI::PositiveNumber);

    auto* fit = app.add_subcommand("fit", "fit an exponential rate to a CSV column");
    std::string csv_path, column, x_column;
    std::optional<double> from, to;
    std::size_t min_samples = 8;
    fit->add_option("--csv", csv_path, "CSV file")->required()->check(CLI::ExistingFile);
    fit->add_option("--column", column, "column to fit")->required();
    fit->add_option("--x", x_column, "abscissa column (default: the first)");
    fit->add_option("--from", from, "window start");
    fit->add_option("--to", to, "window end");
    fit->add_option("--min-samples", min_samples, "fewest samples accepted");

    CLI11_PARSE(app, argc, argv);

    if (*simulate || *sieve || *nudge) {
        const Common& c = *simulate ? simulate_opts : *sieve ? sieve_opts : nudge_opts;
        apply_threads(c);
        const auto cfg = resolve_config(load_assignments(c, *sieve ? "sieve" : *nudge ? "nudging" : nullptr));
        const TwinOptions opt{"", c.quiet};
        const auto r = *simulate ? simulate_truth(cfg, opt) : run_twin(cfg, opt);
        print_summary(r);
        return 0;
    }
    if (*check) {
        apply_threads(check_opts);
        const auto cfg = resolve_config(load_assignments(check_opts));
        const auto rep = check_config(cfg);
        if (!check_opts.quiet) std::cout << rep.to_text() << "\n";
        std::cout << rep.to_key_values();
        return rep.feasible ? 0 : 1;
    }
    if (*sweep_cmd) {
        apply_threads(sweep_opts);
        const auto raw = load_assignments(sweep_opts);
        const auto base = resolve_config(raw);
        const auto table = sweep(raw, axis, values, workers, TwinOptions{"", true});
        const std::string text = table.csv();
        std::cout << text;
        const std::string dir = base.output_dir;
        if (!dir.empty()) {
            std::filesystem::create_directories(dir);
            write_file_atomically(std::filesystem::path(dir) / "sweep.csv", text);
        }
        return 0;
    }
    if (*fit) {
        const auto s = ErrorSeries::parse_csv(read_text_file(csv_path), csv_path);
        const auto xs = s.column(x_column.empty() ? s.columns.front() : x_column);
        std::optional<std::pair<double, double>> window;
        if (from || to)
            window = std::make_pair(from.value_or(-std::numeric_limits<double>::infinity()),
                                    to.value_or(std::numeric_limits<double>::infinity()));
        const auto r = fit_decay_rate(xs, s.column(column), window, min_samples);
        std::cout << "rate = " << r.rate << "\nintercept = " << r.intercept << "\nresidual = " << r.residual
                  << "\nratio = " << std::exp(r.rate) << "\nused = " << r.used
                  << "\nfloor_hit = " << (r.floor_hit ? "true" : "false") << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

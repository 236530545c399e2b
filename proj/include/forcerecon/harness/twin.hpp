#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forcerecon/conditions/conditions.hpp"
#include "forcerecon/harness/config.hpp"
#include "forcerecon/harness/fit.hpp"

namespace forcerecon {

/// A table of numeric columns (time or stage index first) plus rate fits of some of them.
struct ErrorSeries {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, FitResult>> fits;

    bool empty() const { return rows.empty(); }
    bool has_column(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
    const FitResult* fit(const std::string& column) const;
    /// Header line then one line per row, values printed with 17 significant digits.
    std::string csv() const;
    static ErrorSeries parse_csv(const std::string& text, const std::string& source = "<csv>");
};

struct TwinOptions {
    /// Overrides the config's output directory; no files are written when both are empty.
    std::string out_dir;
    bool quiet = true;
};

struct TwinResult {
    ExperimentConfig config;
    /// nudging_td, nudging_nse, sieve_td, sieve_nse, sieve_stationary or truth.
    std::string kind;
    std::optional<ConditionReport> report;
    /// The parameters actually used (N, mu, t_star, ...).
    std::vector<std::pair<std::string, double>> parameters;
    ErrorSeries series;
    ErrorSeries stages;  // sieve runs only
    double initial_model_err = 0.0, final_model_err = 0.0;
    double initial_sync_err = 0.0, final_sync_err = 0.0;
    double seconds = 0.0;
    std::vector<std::string> files;

    std::optional<double> parameter(const std::string& name) const;
    /// final / initial model error below one half.
    bool converged() const { return final_model_err < 0.5 * initial_model_err; }
};

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs the condition checker the config's algorithm would use, resolving an automatic N.
ConditionReport check_config(const ExperimentConfig& cfg);

/// Truth run only: energies of the state and force over time, final state snapshot.
TwinResult simulate_truth(const ExperimentConfig& cfg, const TwinOptions& opt = {});

/// Twin experiment: truth, observations, the configured algorithm and its errors against the
/// truth. Parameters left on "auto" come from the condition checker, and an infeasible
/// report aborts the run (Infeasible) before any integration.
TwinResult run_twin(const ExperimentConfig& cfg, const TwinOptions& opt = {});

struct SweepRow {
    std::string value;
    bool ok = false;
    std::string error;
    std::optional<TwinResult> result;
    /// Flagged when the run failed or the model error did not drop below half its start.
    bool flagged() const { return !ok || !result->converged(); }
};

struct SweepTable {
    std::string axis;
    std::vector<SweepRow> rows;
    /// value, ok, flagged, initial/final model and sync errors, fitted rates, error message.
    std::string csv() const;
};

/// One run_twin per value of `axis` ("section.key", numeric) on `workers` threads. Failed runs
/// are recorded in their row. Each run writes into <out>/<axis>=<value> when an output
/// directory is set.
SweepTable sweep(const ConfigAssignments& base, const std::string& axis, const std::vector<std::string>& values,
                 int workers = 1, const TwinOptions& opt = {});

}  // namespace forcerecon

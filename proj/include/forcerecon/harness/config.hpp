#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forcerecon/conditions/conditions.hpp"
#include "forcerecon/util/keyvalue.hpp"

namespace forcerecon {

enum class Equation { td, nse };
enum class Algorithm { sieve, sieve_stationary, nudging };

/// A twin-experiment definition. Parsed from a sectioned key-value file; every key has a type
/// and a default, unknown keys are errors, and real parameters of the algorithms accept "auto"
/// to have the conditions module choose them.
struct ExperimentConfig {
    std::string name = "experiment";
    Equation equation = Equation::td;
    Algorithm algorithm = Algorithm::nudging;
    std::uint64_t seed = 1;

    int dim = 2;
    int K = 31;
    double kappa = 1.0;
    double nu = 1.0;

    std::string velocity_kind = "taylor_green";  // zero | taylor_green | shear
    double velocity_amplitude = 0.5;
    double velocity_modulation = 0.0;  // v(t) = (1 + modulation sin(omega t)) v0
    double velocity_omega = 0.0;

    int force_rank = 2;
    std::string force_map = "power_law";  // power_law | zero | file
    std::string force_map_file;
    std::string force_profile = "power";
    double force_exponent = 2.0;
    double force_weight = 1.0;
    double force_amplitude = 1.0;  // |g(0)| in L^2
    double force_grashof = 0.0;    // NSE: when positive, |g| = G nu^2 instead
    double force_decay = 0.0;
    double force_omega = 0.0;      // low modes a cos(omega t) + b sin(omega t)
    std::string force_low_file;

    std::optional<int> N;  // empty = auto

    std::optional<double> mu, mu1, mu2, t_star, lambda2;
    int stages = 6;
    double window = 0.0;
    double epsilon = 0.5;
    double lambda1_multiple = 4.0;
    std::string split = "matched";
    bool strong = false;  // sieve TD in the stronger topology
    double stop_tol = 0.0;
    double steady_tol = 1e-13;
    bool allow_dt_override = false;

    double assume_alpha = 1.0, assume_beta = 1.0, assume_gamma = 1.0;
    std::optional<double> assume_sigma, assume_M0, assume_R;

    double dt = 0.01;
    double T = 5.0;
    std::int64_t record_stride = 1;

    /// Rate fits use samples with fit_start <= t <= fit_end; fit_end = 0 means the run's end.
    double fit_start = 0.0;
    double fit_end = 0.0;

    double initial_decay = 2.0;
    double initial_amplitude = 1.0;
    double spinup = 0.0;

    ConstantsTable constants;
    std::string output_dir;

    /// The fully resolved key-value view (section.key -> text), in schema order.
    std::vector<std::pair<std::string, std::string>> resolved;
};

std::string to_string(Equation e);
std::string to_string(Algorithm a);

/// Raw assignments by "section.key"; later entries win.
using ConfigAssignments = std::map<std::string, std::string>;

ConfigAssignments parse_config_assignments(const std::string& text, const std::string& source);
ExperimentConfig resolve_config(const ConfigAssignments& raw);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_experiment_config(const std::string& path);

/// Every "section.key" the format accepts.
std::vector<std::string> config_keys();
/// True for keys holding a real or integer (including the "auto"-capable ones).
bool config_key_is_numeric(const std::string& key);
/// The config file text reproducing `cfg` (all keys, resolved values).
std::string format_config(const ExperimentConfig& cfg);

}  // namespace forcerecon

#include "forcerecon/harness/config.hpp"

#include <algorithm>
#include <sstream>

namespace forcerecon {

namespace {

enum class Type { real, integer, boolean, text, choice, auto_real, auto_integer };

struct KeySpec {
    const char* key;
    Type type;
    const char* fallback;
    const char* choices = "";
};

// clang-format off
const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> s = {
        {"experiment.name", Type::text, "experiment"},
        {"experiment.equation", Type::choice, "td", "td nse"},
        {"experiment.algorithm", Type::choice, "nudging", "sieve sieve_stationary nudging"},
        {"experiment.seed", Type::integer, "1"},
        {"grid.dim", Type::integer, "2"},
        {"grid.K", Type::integer, "31"},
        {"physics.kappa", Type::real, "1"},
        {"physics.nu", Type::real, "1"},
        {"velocity.kind", Type::choice, "taylor_green", "zero taylor_green shear"},
        {"velocity.amplitude", Type::real, "0.5"},
        {"velocity.modulation", Type::real, "0"},
        {"velocity.omega", Type::real, "0"},
        {"force.rank", Type::integer, "2"},
        {"force.map", Type::choice, "power_law", "power_law zero file"},
        {"force.map_file", Type::text, ""},
        {"force.profile", Type::choice, "power", "power exponential"},
        {"force.exponent", Type::real, "2"},
        {"force.weight", Type::real, "1"},
        {"force.amplitude", Type::real, "1"},
        {"force.grashof", Type::real, "0"},
        {"force.decay", Type::real, "0"},
        {"force.omega", Type::real, "0"},
        {"force.low_file", Type::text, ""},
        {"observation.N", Type::auto_integer, "auto"},
        {"algorithm.mu", Type::auto_real, "auto"},
        {"algorithm.mu1", Type::auto_real, "auto"},
        {"algorithm.mu2", Type::auto_real, "auto"},
        {"algorithm.t_star", Type::auto_real, "auto"},
        {"algorithm.lambda2", Type::auto_real, "auto"},
        {"algorithm.stages", Type::integer, "6"},
        {"algorithm.window", Type::real, "0"},
        {"algorithm.epsilon", Type::real, "0.5"},
        {"algorithm.lambda1_multiple", Type::real, "4"},
        {"algorithm.split", Type::choice, "matched", "matched folded"},
        {"algorithm.strong", Type::boolean, "false"},
        {"algorithm.stop_tol", Type::real, "0"},
        {"algorithm.steady_tol", Type::real, "1e-13"},
        {"algorithm.allow_dt_override", Type::boolean, "false"},
        {"assumptions.alpha", Type::real, "1"},
        {"assumptions.beta", Type::real, "1"},
        {"assumptions.gamma", Type::real, "1"},
        {"assumptions.sigma", Type::auto_real, "auto"},
        {"assumptions.M0", Type::auto_real, "auto"},
        {"assumptions.R", Type::auto_real, "auto"},
        {"time.dt", Type::real, "0.01"},
        {"time.T", Type::real, "5"},
        {"time.record_stride", Type::integer, "1"},
        {"fit.start", Type::real, "0"},
        {"fit.end", Type::real, "0"},
        {"initial.decay", Type::real, "2"},
        {"initial.amplitude", Type::real, "1"},
        {"initial.spinup", Type::real, "0"},
        {"constants.sobolev", Type::real, "1"},
        {"constants.bernstein", Type::real, "1"},
        {"constants.c_L", Type::real, "1"},
        {"constants.c_L_prime", Type::real, "1"},
        {"constants.c_A", Type::real, "1"},
        {"constants.c_BG", Type::real, "1"},
        {"constants.C_abg", Type::real, "1"},
        {"constants.C_star", Type::real, "1"},
        {"constants.c2", Type::real, "1"},
        {"output.dir", Type::text, ""},
    };
    return s;
}
// clang-format on

const KeySpec* find_spec(const std::string& key) {
    for (const auto& s : schema())
        if (key == s.key) return &s;
    return nullptr;
}

bool is_auto(const std::string& v) { return v == "auto"; }

// Checks the value against its type; throws ParseError naming the key.
void validate(const KeySpec& s, const std::string& v) {
    const std::string what = s.key;
    switch (s.type) {
        case Type::real: parse_real(v, what); break;
        case Type::integer: parse_integer(v, what); break;
        case Type::boolean: parse_bool(v, what); break;
        case Type::text: break;
        case Type::choice: {
            const auto options = split_words(s.choices);
            if (std::find(options.begin(), options.end(), v) == options.end())
                throw ParseError(what + ": '" + v + "' is not one of {" + s.choices + "}");
            break;
        }
        case Type::auto_real:
            if (!is_auto(v)) parse_real(v, what);
            break;
        case Type::auto_integer:
            if (!is_auto(v)) parse_integer(v, what);
            break;
    }
}

}  // namespace

std::string to_string(Equation e) { return e == Equation::td ? "td" : "nse"; }

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::sieve: return "sieve";
        case Algorithm::sieve_stationary: return "sieve_stationary";
        case Algorithm::nudging: return "nudging";
    }
    return "?";
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& s : schema()) out.emplace_back(s.key);
    return out;
}

bool config_key_is_numeric(const std::string& key) {
    const KeySpec* s = find_spec(key);
    return s && (s->type == Type::real || s->type == Type::integer || s->type == Type::auto_real ||
                 s->type == Type::auto_integer);
}

ConfigAssignments parse_config_assignments(const std::string& text, const std::string& source) {
    ConfigAssignments out;
    for (const auto& kv : parse_key_values(text, source)) {
        if (kv.section.empty())
            throw ParseError(source + ":" + std::to_string(kv.line) + ": key '" + kv.key + "' outside a [section]");
        const std::string full = kv.section + "." + kv.key;
        const KeySpec* spec = find_spec(full);
        if (!spec) throw ParseError(source + ":" + std::to_string(kv.line) + ": unknown key '" + full + "'");
        try {
            validate(*spec, kv.value);
        } catch (const std::exception& e) {
            throw ParseError(source + ":" + std::to_string(kv.line) + ": " + e.what());
        }
        out[full] = kv.value;
    }
    return out;
}

ExperimentConfig resolve_config(const ConfigAssignments& raw) {
    for (const auto& [k, v] : raw) {
        const KeySpec* spec = find_spec(k);
        if (!spec) throw ParseError("unknown key '" + k + "'");
        validate(*spec, v);
    }
    ExperimentConfig c;
    auto text = [&](const char* key) {
        auto it = raw.find(key);
        return it != raw.end() ? it->second : std::string(find_spec(key)->fallback);
    };
    auto real = [&](const char* key) { return parse_real(text(key), key); };
    auto integer = [&](const char* key) { return parse_integer(text(key), key); };
    auto flag = [&](const char* key) { return parse_bool(text(key), key); };
    auto maybe_real = [&](const char* key) -> std::optional<double> {
        const auto v = text(key);
        if (is_auto(v)) return std::nullopt;
        return parse_real(v, key);
    };

    c.name = text("experiment.name");
    c.equation = text("experiment.equation") == "td" ? Equation::td : Equation::nse;
    const auto alg = text("experiment.algorithm");
    c.algorithm = alg == "sieve" ? Algorithm::sieve : alg == "nudging" ? Algorithm::nudging : Algorithm::sieve_stationary;
    c.seed = static_cast<std::uint64_t>(integer("experiment.seed"));
    c.dim = static_cast<int>(integer("grid.dim"));
    c.K = static_cast<int>(integer("grid.K"));
    c.kappa = real("physics.kappa");
    c.nu = real("physics.nu");
    c.velocity_kind = text("velocity.kind");
    c.velocity_amplitude = real("velocity.amplitude");
    c.velocity_modulation = real("velocity.modulation");
    c.velocity_omega = real("velocity.omega");
    c.force_rank = static_cast<int>(integer("force.rank"));
    c.force_map = text("force.map");
    c.force_map_file = text("force.map_file");
    c.force_profile = text("force.profile");
    c.force_exponent = real("force.exponent");
    c.force_weight = real("force.weight");
    c.force_amplitude = real("force.amplitude");
    c.force_grashof = real("force.grashof");
    c.force_decay = real("force.decay");
    c.force_omega = real("force.omega");
    c.force_low_file = text("force.low_file");
    if (const auto v = text("observation.N"); !is_auto(v)) c.N = static_cast<int>(parse_integer(v, "observation.N"));
    c.mu = maybe_real("algorithm.mu");
    c.mu1 = maybe_real("algorithm.mu1");
    c.mu2 = maybe_real("algorithm.mu2");
    c.t_star = maybe_real("algorithm.t_star");
    c.lambda2 = maybe_real("algorithm.lambda2");
    c.stages = static_cast<int>(integer("algorithm.stages"));
    c.window = real("algorithm.window");
    c.epsilon = real("algorithm.epsilon");
    c.lambda1_multiple = real("algorithm.lambda1_multiple");
    c.split = text("algorithm.split");
    c.strong = flag("algorithm.strong");
    c.stop_tol = real("algorithm.stop_tol");
    c.steady_tol = real("algorithm.steady_tol");
    c.allow_dt_override = flag("algorithm.allow_dt_override");
    c.assume_alpha = real("assumptions.alpha");
    c.assume_beta = real("assumptions.beta");
    c.assume_gamma = real("assumptions.gamma");
    c.assume_sigma = maybe_real("assumptions.sigma");
    c.assume_M0 = maybe_real("assumptions.M0");
    c.assume_R = maybe_real("assumptions.R");
    c.dt = real("time.dt");
    c.T = real("time.T");
    c.record_stride = integer("time.record_stride");
    c.fit_start = real("fit.start");
    c.fit_end = real("fit.end");
    c.initial_decay = real("initial.decay");
    c.initial_amplitude = real("initial.amplitude");
    c.spinup = real("initial.spinup");
    for (const char* name : {"sobolev", "bernstein", "c_L", "c_L_prime", "c_A", "c_BG", "C_abg", "C_star", "c2"}) {
        const std::string key = std::string("constants.") + name;
        if (raw.count(key)) c.constants.set(name, parse_real(raw.at(key), key));
    }
    c.output_dir = text("output.dir");

    if (c.dim != 2 && c.dim != 3) throw ParseError("grid.dim must be 2 or 3");
    if (c.equation == Equation::nse && c.dim != 2) throw ParseError("the Navier-Stokes twin is two-dimensional");
    if (c.K < 2) throw ParseError("grid.K must be at least 2");
    if (c.force_rank < 1) throw ParseError("force.rank must be at least 1");
    if (c.N && *c.N < c.force_rank) throw ParseError("observation.N must be at least force.rank");
    if (!(c.dt > 0.0) || !(c.T > 0.0)) throw ParseError("time.dt and time.T must be positive");
    if (c.record_stride < 1) throw ParseError("time.record_stride must be positive");
    if (c.stages < 1) throw ParseError("algorithm.stages must be at least 1");
    if (c.force_map == "file" && c.force_map_file.empty()) throw ParseError("force.map = file needs force.map_file");

    for (const auto& s : schema()) c.resolved.emplace_back(s.key, text(s.key));
    return c;
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source) {
    return resolve_config(parse_config_assignments(text, source));
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(read_text_file(path), path);
}

std::string format_config(const ExperimentConfig& cfg) {
    std::ostringstream s;
    std::string section;
    for (const auto& [key, value] : cfg.resolved) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            s << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
            section = sec;
        }
        s << key.substr(dot + 1) << " = " << value << "\n";
    }
    return s.str();
}

}  // namespace forcerecon

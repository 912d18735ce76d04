#include "gplfm/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>

#include "gplfm/errors.hpp"

namespace gplfm::harness {

namespace {

void allow(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : obj.items()) {
        bool known = false;
        for (const char* a : keys) known = known || k == a;
        if (!known) throw ConfigError("unknown key '" + where + "." + k + "'");
    }
}

double number(const Json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key + " must be finite");
    return d;
}

double positive(const Json& obj, const char* key, const std::string& where, double fallback) {
    const double d = number(obj, key, where, fallback);
    if (!(d > 0.0)) throw ConfigError(where + "." + key + " must be positive");
    return d;
}

Index integer(const Json& obj, const char* key, const std::string& where, Index fallback) {
    if (!obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return v.get<Index>();
}

std::string text(const Json& obj, const char* key, const std::string& where, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) throw ConfigError(where + "." + key + " must be a string");
    return obj.at(key).get<std::string>();
}

std::vector<double> numbers(const Json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(where + " must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where + " must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<Index> floors(const Json& v, const std::string& where, Index n_floors) {
    std::vector<Index> out;
    if (v.is_string()) {
        if (v.get<std::string>() != "all") throw ConfigError(where + " must be a list of floors or \"all\"");
        for (Index i = 1; i <= n_floors; ++i) out.push_back(i);
        return out;
    }
    if (!v.is_array()) throw ConfigError(where + " must be a list of floors or \"all\"");
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw ConfigError(where + " entries must be integers");
        const auto f = e.get<Index>();
        if (f < 1 || f > n_floors) {
            throw ConfigError(where + " floor " + std::to_string(f) + " is outside 1.." + std::to_string(n_floors));
        }
        out.push_back(f);
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::pair<double, double> bounds(const Json& v, const std::string& where) {
    const auto b = numbers(v, where);
    if (b.size() != 2 || !(b[0] > 0.0) || !(b[1] > b[0])) throw ConfigError(where + " must be [lower, upper] with 0 < lower < upper");
    return {b[0], b[1]};
}

ExcitationSpec parse_excitation(const Json& e, const std::string& where, const std::filesystem::path& base) {
    allow(e, where, {"type", "start", "rise", "peak", "amplitude", "frequency_hz", "phase", "sigma", "mean",
                     "cutoff_hz", "value", "path", "scale"});
    ExcitationSpec s;
    if (!e.contains("type")) throw ConfigError(where + ".type is required");
    s.type = excitation_type_from_string(text(e, "type", where, ""));
    if (s.type == ExcitationType::pulse_train) s.amplitude = 3.0;
    s.start = number(e, "start", where, s.start);
    s.rise = positive(e, "rise", where, s.rise);
    s.peak = number(e, "peak", where, s.peak);
    s.amplitude = number(e, "amplitude", where, s.amplitude);
    s.frequency_hz = number(e, "frequency_hz", where, s.frequency_hz);
    s.phase = number(e, "phase", where, s.phase);
    s.sigma = number(e, "sigma", where, s.sigma);
    if (s.sigma < 0.0) throw ConfigError(where + ".sigma must be non-negative");
    s.mean = number(e, "mean", where, s.mean);
    s.cutoff_hz = positive(e, "cutoff_hz", where, s.cutoff_hz);
    s.value = number(e, "value", where, s.value);
    s.scale = number(e, "scale", where, s.scale);
    if (s.type == ExcitationType::record) {
        if (!e.contains("path")) throw ConfigError(where + ".path is required for a record excitation");
        s.path = resolve(base, text(e, "path", where, ""));
        if (!std::filesystem::exists(s.path)) throw ConfigError(where + ".path: file not found: " + s.path.string());
    }
    return s;
}

KernelConfig parse_kernel(const Json& k, const std::string& where) {
    allow(k, where, {"family", "p", "alpha2", "lengthscale"});
    KernelConfig c;
    const std::string family = text(k, "family", where, "matern");
    if (family != "matern") throw ConfigError(where + ".family '" + family + "' is not supported (only matern)");
    c.order = static_cast<int>(integer(k, "p", where, 0));
    if (c.order < 0 || c.order > 2) throw ConfigError(where + ".p must be 0, 1 or 2");
    const auto value = [&](const char* key, double& out, bool& opt) {
        if (!k.contains(key)) {
            opt = true;
            return;
        }
        const Json& v = k.at(key);
        if (v.is_string()) {
            if (v.get<std::string>() != "optimize") throw ConfigError(where + "." + key + " must be a number or \"optimize\"");
            opt = true;
        } else {
            out = positive(k, key, where, out);
        }
    };
    value("alpha2", c.alpha2, c.optimize_alpha2);
    value("lengthscale", c.lengthscale, c.optimize_lengthscale);
    return c;
}

}  // namespace

std::string InputSpec::name() const { return ground ? std::string("ground") : "force_" + std::to_string(floor); }

Index ExperimentConfig::steps() const { return static_cast<Index>(std::llround(duration_s * rate_hz)); }

bool ExperimentConfig::needs_optimization() const {
    for (const auto& k : kernels) {
        if (k.optimize_alpha2 || k.optimize_lengthscale) return true;
    }
    return false;
}

ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
    allow(doc, "config", {"model", "inputs", "sensors", "sampling", "noise_fraction", "seed", "initial_state", "method",
                          "filter", "gplfm", "baseline", "lcurve", "drift_cutoff_hz", "measurements_file", "smooth"});
    ExperimentConfig c;
    c.raw = doc;
    c.base_dir = base_dir;

    const Json model = doc.value("model", Json::object());
    allow(model, "model", {"type", "floors", "mass", "stiffness", "rayleigh", "first_frequency_hz", "damping_ratio",
                           "reduce_to", "path"});
    c.model.type = text(model, "type", "model", c.model.type);
    if (c.model.type == "tower_standin") {
        c.model.floors = 76;
        c.model.mass = 2.0e6;
    }
    c.model.floors = integer(model, "floors", "model", c.model.floors);
    c.model.mass = positive(model, "mass", "model", c.model.mass);
    c.model.stiffness = positive(model, "stiffness", "model", c.model.stiffness);
    if (model.contains("rayleigh")) {
        const auto ray = numbers(model.at("rayleigh"), "model.rayleigh");
        if (ray.size() != 2 || ray[0] < 0.0 || ray[1] < 0.0) throw ConfigError("model.rayleigh must be [a0, a1] >= 0");
        c.model.rayleigh = {ray[0], ray[1]};
    }
    c.model.first_frequency_hz = positive(model, "first_frequency_hz", "model", c.model.first_frequency_hz);
    c.model.damping_ratio = positive(model, "damping_ratio", "model", c.model.damping_ratio);
    c.model.reduce_to = integer(model, "reduce_to", "model", 0);
    if (c.model.type == "file") {
        if (!model.contains("path")) throw ConfigError("model.path is required for a model file");
        c.model.path = resolve(base_dir, text(model, "path", "model", ""));
    } else if (c.model.type != "shear_building" && c.model.type != "tower_standin") {
        throw ConfigError("model.type must be shear_building, tower_standin or file");
    }
    if (c.model.type != "file" && c.model.floors < 1) throw ConfigError("model.floors must be at least 1");
    if (c.model.reduce_to < 0) throw ConfigError("model.reduce_to must be non-negative");

    // Floor count of a model file is known only after loading; validate against a large bound here.
    const Index n_floors = c.model.type == "file" ? std::numeric_limits<int>::max() : c.model.floors;

    if (!doc.contains("inputs") || !doc.at("inputs").is_array() || doc.at("inputs").empty()) {
        throw ConfigError("inputs must be a non-empty array");
    }
    bool have_ground = false;
    for (std::size_t i = 0; i < doc.at("inputs").size(); ++i) {
        const std::string where = "inputs[" + std::to_string(i) + "]";
        const Json& in = doc.at("inputs")[i];
        allow(in, where, {"floor", "ground", "excitation"});
        InputSpec s;
        s.ground = in.value("ground", false);
        if (s.ground) {
            if (in.contains("floor")) throw ConfigError(where + " cannot have both floor and ground");
            if (have_ground) throw ConfigError("only one ground-motion input is supported");
            have_ground = true;
        } else {
            s.floor = integer(in, "floor", where, 0);
            if (s.floor < 1 || s.floor > n_floors) throw ConfigError(where + ".floor is out of range");
            for (const auto& o : c.inputs) {
                if (!o.ground && o.floor == s.floor) throw ConfigError(where + ": floor " + std::to_string(s.floor) + " already loaded");
            }
        }
        if (!in.contains("excitation")) throw ConfigError(where + ".excitation is required");
        s.excitation = parse_excitation(in.at("excitation"), where + ".excitation", base_dir);
        c.inputs.push_back(std::move(s));
    }

    const Json sensors = doc.value("sensors", Json::object());
    allow(sensors, "sensors", {"displacement", "velocity", "acceleration"});
    if (sensors.contains("displacement")) c.sensors.displacement = floors(sensors.at("displacement"), "sensors.displacement", n_floors);
    if (sensors.contains("velocity")) c.sensors.velocity = floors(sensors.at("velocity"), "sensors.velocity", n_floors);
    if (sensors.contains("acceleration")) c.sensors.acceleration = floors(sensors.at("acceleration"), "sensors.acceleration", n_floors);
    if (c.sensors.displacement.size() + c.sensors.velocity.size() + c.sensors.acceleration.size() == 0) {
        throw ConfigError("sensors: at least one channel is required");
    }

    const Json sampling = doc.value("sampling", Json::object());
    allow(sampling, "sampling", {"rate_hz", "duration_s"});
    c.rate_hz = positive(sampling, "rate_hz", "sampling", c.rate_hz);
    c.duration_s = positive(sampling, "duration_s", "sampling", c.duration_s);
    if (c.steps() < 2) throw ConfigError("sampling: duration times rate must give at least two samples");

    c.noise_fraction = number(doc, "noise_fraction", "config", c.noise_fraction);
    if (c.noise_fraction < 0.0) throw ConfigError("noise_fraction must be non-negative");
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        c.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("initial_state")) {
        const Json& s = doc.at("initial_state");
        allow(s, "initial_state", {"displacement", "velocity"});
        if (s.contains("displacement")) c.initial_displacement = numbers(s.at("displacement"), "initial_state.displacement");
        if (s.contains("velocity")) c.initial_velocity = numbers(s.at("velocity"), "initial_state.velocity");
    }

    c.method = text(doc, "method", "config", c.method);
    if (c.method != "gplfm" && c.method != "akf" && c.method != "akfdm" && c.method != "dkf") {
        throw ConfigError("method must be gplfm, akf, akfdm or dkf");
    }

    const Json filter = doc.value("filter", Json::object());
    allow(filter, "filter", {"q_x", "p_x0", "r"});
    c.q_x = number(filter, "q_x", "filter", c.q_x);
    c.p_x0 = positive(filter, "p_x0", "filter", c.p_x0);
    if (c.q_x < 0.0) throw ConfigError("filter.q_x must be non-negative");
    if (filter.contains("r")) c.r = numbers(filter.at("r"), "filter.r");
    for (double v : c.r) {
        if (!(v > 0.0)) throw ConfigError("filter.r entries must be positive");
    }

    const Json gp = doc.value("gplfm", Json::object());
    allow(gp, "gplfm", {"kernels", "shared", "optimizer"});
    if (gp.contains("kernels")) {
        const Json& ks = gp.at("kernels");
        if (ks.is_object()) {
            c.kernels.push_back(parse_kernel(ks, "gplfm.kernels"));
        } else if (ks.is_array() && !ks.empty()) {
            for (std::size_t i = 0; i < ks.size(); ++i) c.kernels.push_back(parse_kernel(ks[i], "gplfm.kernels[" + std::to_string(i) + "]"));
        } else {
            throw ConfigError("gplfm.kernels must be an object or a non-empty array");
        }
    } else {
        KernelConfig k;
        k.optimize_alpha2 = k.optimize_lengthscale = true;
        c.kernels.push_back(k);
    }
    if (c.kernels.size() != 1 && c.kernels.size() != c.inputs.size()) {
        throw ConfigError("gplfm.kernels must have one entry or one per input");
    }
    if (gp.contains("shared")) {
        if (!gp.at("shared").is_boolean()) throw ConfigError("gplfm.shared must be a boolean");
        c.shared_hyperparameters = gp.at("shared").get<bool>();
    }
    const Json opt = gp.value("optimizer", Json::object());
    allow(opt, "gplfm.optimizer", {"n_starts", "max_iterations", "tolerance", "alpha2_bounds", "lengthscale_bounds"});
    c.optimizer.n_starts = static_cast<int>(integer(opt, "n_starts", "gplfm.optimizer", c.optimizer.n_starts));
    c.optimizer.max_iterations = static_cast<int>(integer(opt, "max_iterations", "gplfm.optimizer", c.optimizer.max_iterations));
    c.optimizer.tolerance = positive(opt, "tolerance", "gplfm.optimizer", c.optimizer.tolerance);
    if (c.optimizer.n_starts < 1) throw ConfigError("gplfm.optimizer.n_starts must be at least 1");
    if (c.optimizer.max_iterations < 1) throw ConfigError("gplfm.optimizer.max_iterations must be at least 1");
    if (opt.contains("alpha2_bounds")) c.optimizer.alpha2_bounds = bounds(opt.at("alpha2_bounds"), "gplfm.optimizer.alpha2_bounds");
    if (opt.contains("lengthscale_bounds")) c.optimizer.lengthscale_bounds = bounds(opt.at("lengthscale_bounds"), "gplfm.optimizer.lengthscale_bounds");

    const Json base = doc.value("baseline", Json::object());
    allow(base, "baseline", {"q_f", "p_f0", "r_dm", "dummy_floors"});
    c.baseline.q_f = positive(base, "q_f", "baseline", c.baseline.q_f);
    if (base.contains("p_f0")) c.baseline.p_f0 = positive(base, "p_f0", "baseline", 1.0);
    c.baseline.r_dm = positive(base, "r_dm", "baseline", c.baseline.r_dm);
    if (base.contains("dummy_floors")) c.baseline.dummy_floors = floors(base.at("dummy_floors"), "baseline.dummy_floors", n_floors);
    if (c.method == "akfdm" && c.baseline.dummy_floors.empty()) {
        throw ConfigError("baseline.dummy_floors is required for method akfdm");
    }

    const Json lc = doc.value("lcurve", Json::object());
    allow(lc, "lcurve", {"grid", "method"});
    if (lc.contains("grid")) {
        const Json& g = lc.at("grid");
        if (g.is_object()) {
            allow(g, "lcurve.grid", {"min", "max", "points"});
            const double lo = positive(g, "min", "lcurve.grid", 1.0);
            const double hi = positive(g, "max", "lcurve.grid", 1.0e8);
            const Index n = integer(g, "points", "lcurve.grid", 9);
            if (n < 5 || !(hi > lo)) throw ConfigError("lcurve.grid needs max > min and at least 5 points");
            for (Index i = 0; i < n; ++i) {
                c.lcurve.grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1)));
            }
        } else {
            c.lcurve.grid = numbers(g, "lcurve.grid");
        }
    } else {
        for (int e = 0; e <= 8; ++e) c.lcurve.grid.push_back(std::pow(10.0, e));
    }
    try {
        c.lcurve.method = baseline_method_from_string(text(lc, "method", "lcurve", "akf"));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("lcurve.method: ") + e.what());
    }

    c.drift_cutoff_hz = positive(doc, "drift_cutoff_hz", "config", c.drift_cutoff_hz);
    if (!(c.drift_cutoff_hz < 0.5 * c.rate_hz)) throw ConfigError("drift_cutoff_hz must be below the Nyquist frequency");
    if (doc.contains("measurements_file")) {
        c.measurements_file = resolve(base_dir, text(doc, "measurements_file", "config", ""));
        if (!std::filesystem::exists(c.measurements_file)) throw ConfigError("measurements_file not found: " + c.measurements_file.string());
    }
    if (doc.contains("smooth")) {
        if (!doc.at("smooth").is_boolean()) throw ConfigError("smooth must be a boolean");
        c.smooth = doc.at("smooth").get<bool>();
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    Json doc;
    try {
        doc = Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

}  // namespace gplfm::harness

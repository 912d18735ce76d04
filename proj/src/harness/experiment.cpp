#include "gplfm/harness/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gplfm/baselines.hpp"
#include "gplfm/calibration.hpp"
#include "gplfm/diagnostics.hpp"
#include "gplfm/kalman.hpp"

namespace gplfm::harness {

namespace {

constexpr const char* kVersion = "0.3.0";

template <class F>
auto stage(const char* name, F&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, exit_code_for(e), e.what());
    }
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file " + path.string());
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        throw ConfigError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
}

Matrix json_matrix(const Json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a non-empty array of rows");
    const auto rows = static_cast<Index>(v.size());
    const auto cols = static_cast<Index>(v[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw ConfigError(where + " rows must have equal length");
        for (Index j = 0; j < cols; ++j) {
            if (!row[static_cast<std::size_t>(j)].is_number()) throw ConfigError(where + " entries must be numbers");
            m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
        }
    }
    return m;
}

std::vector<double> json_numbers(const Json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where + " entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

// Model file: either {masses, stiffnesses, rayleigh} for a shear chain or explicit
// {mass_matrix, damping_matrix, stiffness_matrix}.
StructuralSystem load_model_file(const std::filesystem::path& path) {
    const Json doc = read_json(path);
    if (!doc.is_object()) throw ConfigError("model file must hold an object");
    if (doc.contains("mass_matrix")) {
        return make_structural_system(json_matrix(doc.at("mass_matrix"), "mass_matrix"),
                                      json_matrix(doc.at("damping_matrix"), "damping_matrix"),
                                      json_matrix(doc.at("stiffness_matrix"), "stiffness_matrix"));
    }
    if (!doc.contains("masses") || !doc.contains("stiffnesses")) {
        throw ConfigError("model file needs masses and stiffnesses, or explicit matrices");
    }
    const auto m = json_numbers(doc.at("masses"), "masses");
    const auto k = json_numbers(doc.at("stiffnesses"), "stiffnesses");
    RayleighDamping ray;
    if (doc.contains("rayleigh")) {
        const auto r = json_numbers(doc.at("rayleigh"), "rayleigh");
        if (r.size() != 2) throw ConfigError("rayleigh must be [a0, a1]");
        ray = {r[0], r[1]};
    }
    return build_shear_building(m, k, ray);
}

StructuralSystem base_structure(const ExperimentConfig& c) {
    if (c.model.type == "tower_standin") {
        return build_tower_standin(c.model.floors, c.model.mass, c.model.first_frequency_hz, c.model.damping_ratio);
    }
    if (c.model.type == "file") return load_model_file(c.model.path);
    std::vector<double> m(static_cast<std::size_t>(c.model.floors), c.model.mass);
    std::vector<double> k(static_cast<std::size_t>(c.model.floors), c.model.stiffness);
    return build_shear_building(m, k, c.model.rayleigh);
}

std::vector<Index> zero_based(const std::vector<Index>& floors, Index n) {
    std::vector<Index> out;
    for (Index f : floors) {
        if (f < 1 || f > n) throw ConfigError("floor " + std::to_string(f) + " is outside 1.." + std::to_string(n));
        out.push_back(f - 1);
    }
    return out;
}

Matrix measurement_noise(const ExperimentConfig& c, Index channels) {
    if (c.r.size() == 1) return c.r[0] * Matrix::Identity(channels, channels);
    if (static_cast<Index>(c.r.size()) != channels) {
        throw ConfigError("filter.r must hold one value or one per channel (" + std::to_string(channels) + ")");
    }
    Matrix r = Matrix::Zero(channels, channels);
    for (Index i = 0; i < channels; ++i) r(i, i) = c.r[static_cast<std::size_t>(i)];
    return r;
}

BaselineConfig baseline_config(const ExperimentConfig& c, const Scenario& s) {
    const Index nf = s.model.input_count();
    BaselineConfig cfg = BaselineConfig::isotropic(nf, c.baseline.q_f);
    if (c.baseline.p_f0) cfg.p_f0 = *c.baseline.p_f0 * Matrix::Identity(nf, nf);
    cfg.dummy_dofs = zero_based(c.baseline.dummy_floors, s.model.physical_dofs());
    const auto nd = static_cast<Index>(cfg.dummy_dofs.size());
    cfg.r_dm = c.baseline.r_dm * Matrix::Identity(nd, nd);
    return cfg;
}

const KernelConfig& kernel_for(const ExperimentConfig& c, std::size_t config_input) {
    return c.kernels.size() == 1 ? c.kernels.front() : c.kernels[config_input];
}

struct Estimation {
    AugmentedModel model;
    EstimationResult result;
    bool smoothed = false;
    std::vector<KernelSpec> kernels;
    std::optional<OptimizationReport> optimization;
};

struct Calibration {
    CalibrationProblem problem;
    HyperParams base;
    OptimizerSettings settings;
};

Calibration calibration_setup(const ExperimentConfig& c, const Scenario& s) {
    const Index nf = s.model.input_count();
    const Index ns = s.model.state_count();
    std::vector<KernelSpec> specs;
    std::vector<const KernelConfig*> cfgs;
    for (Index j = 0; j < nf; ++j) {
        const KernelConfig& k = kernel_for(c, s.config_input[static_cast<std::size_t>(j)]);
        cfgs.push_back(&k);
        KernelSpec spec;
        spec.order = k.order;
        spec.alpha2 = k.alpha2;
        spec.lengthscale = k.lengthscale;
        specs.push_back(spec);
    }
    Calibration cal;
    cal.problem = CalibrationProblem::make(s.model, c.dt(), s.measurements.values, c.q_x * Matrix::Identity(ns, ns),
                                           measurement_noise(c, s.model.output_count()),
                                           StatePrior::isotropic(ns, c.p_x0), specs, false);
    // Group inputs whose kernel entries are identical, including which values are free.
    std::vector<Index> groups;
    std::vector<const KernelConfig*> reps;
    for (Index j = 0; j < nf; ++j) {
        const KernelConfig& k = *cfgs[static_cast<std::size_t>(j)];
        Index g = -1;
        if (c.shared_hyperparameters) {
            for (std::size_t r = 0; r < reps.size(); ++r) {
                const KernelConfig& o = *reps[r];
                if (o.order == k.order && o.alpha2 == k.alpha2 && o.lengthscale == k.lengthscale &&
                    o.optimize_alpha2 == k.optimize_alpha2 && o.optimize_lengthscale == k.optimize_lengthscale) {
                    g = static_cast<Index>(r);
                    break;
                }
            }
        }
        if (g < 0) {
            g = static_cast<Index>(reps.size());
            reps.push_back(&k);
        }
        groups.push_back(g);
    }
    cal.problem.group_of = groups;
    cal.base = cal.problem.initial_params();
    for (std::size_t g = 0; g < reps.size(); ++g) {
        cal.base.fix_alpha2[g] = !reps[g]->optimize_alpha2;
        cal.base.fix_lengthscale[g] = !reps[g]->optimize_lengthscale;
    }
    cal.settings.n_starts = c.optimizer.n_starts;
    cal.settings.seed = c.seed;
    cal.settings.tolerance = c.optimizer.tolerance;
    cal.settings.max_iterations = c.optimizer.max_iterations;
    cal.settings.base = cal.base;
    if (c.optimizer.alpha2_bounds) {
        cal.settings.log_alpha2_bounds.assign(reps.size(), {std::log(c.optimizer.alpha2_bounds->first),
                                                            std::log(c.optimizer.alpha2_bounds->second)});
    }
    if (c.optimizer.lengthscale_bounds) {
        cal.settings.log_lengthscale_bounds.assign(reps.size(), {std::log(c.optimizer.lengthscale_bounds->first),
                                                                 std::log(c.optimizer.lengthscale_bounds->second)});
    }
    default_bounds(cal.problem, cal.settings);
    return cal;
}

AugmentedModel structure_model(const ExperimentConfig& c, const Scenario& s, const std::vector<KernelSpec>& kernels) {
    const Index ns = s.model.state_count();
    const Matrix q_x = c.q_x * Matrix::Identity(ns, ns);
    const Matrix r = measurement_noise(c, s.model.output_count());
    const StatePrior prior = StatePrior::isotropic(ns, c.p_x0);
    if (c.method == "gplfm") {
        std::vector<KernelRealization> reals;
        for (const auto& k : kernels) reals.push_back(kernel_to_ssm(k));
        return discretize(assemble_augmented(s.model, reals, q_x, r, prior), c.dt());
    }
    const BaselineConfig cfg = baseline_config(c, s);
    if (c.method == "akfdm") return akfdm_model(s.model, cfg, q_x, r, prior, c.dt());
    return akf_model(s.model, cfg, q_x, r, prior, c.dt());
}

Estimation estimate(const ExperimentConfig& c, const Scenario& s, bool optimize_only) {
    Estimation est;
    if (c.method == "gplfm") {
        Calibration cal = stage("model", [&] { return calibration_setup(c, s); });
        HyperParams params = cal.base;
        if (c.needs_optimization()) {
            est.optimization = stage("optimization", [&] { return optimize(cal.problem, cal.settings); });
            params = est.optimization->best;
        }
        est.kernels = stage("model", [&] { return cal.problem.specs_for(params); });
        if (optimize_only) return est;
    } else if (optimize_only) {
        throw StageError("optimization", exit_config, "the optimize verb requires method gplfm");
    }
    est.model = stage("model", [&] { return structure_model(c, s, est.kernels); });
    const Index ns = s.model.state_count();
    est.result = stage("estimation", [&] {
        if (c.method == "dkf") {
            return dkf_estimate(s.model, c.dt(), s.measurements.values, baseline_config(c, s),
                                c.q_x * Matrix::Identity(ns, ns), measurement_noise(c, s.model.output_count()),
                                StatePrior::isotropic(ns, c.p_x0));
        }
        Matrix y = s.measurements.values;
        if (c.method == "akfdm") y = with_dummy_observations(y, static_cast<Index>(c.baseline.dummy_floors.size()));
        return kalman_filter(est.model.discretized(), y);
    });
    if (c.smooth && c.method != "dkf") {
        est.result = stage("smoothing", [&] { return rts_smoother(est.model.discretized(), std::move(est.result)); });
        est.smoothed = true;
    }
    return est;
}

Json complex_list(const std::vector<std::complex<double>>& v) {
    Json out = Json::array();
    for (const auto& z : v) out.push_back(Json::array({z.real(), z.imag()}));
    return out;
}

Json diagnostics_json(const AugmentedModel& model) {
    const DetectabilityReport det = detectability_check(model);
    const numerics::RankReport tz = transmission_zero_rank(model, {0.0, 0.0});
    Json d;
    d["detectable"] = det.detectable;
    d["undetectable_modes"] = complex_list(det.undetectable_modes);
    d["unobservable_modes"] = complex_list(det.unobservable_modes);
    d["distinct_eigenvalues"] = det.modes.size();
    d["transmission_zero_rank_s0"] = {{"rank", tz.rank},
                                      {"full_rank", model.a_c.rows() + model.f_star.rows()},
                                      {"deficiency", tz.deficiency}};
    return d;
}

Json hyper_json(const HyperParams& h) {
    Json out = Json::array();
    for (Index g = 0; g < h.groups(); ++g) {
        const auto u = static_cast<std::size_t>(g);
        out.push_back({{"group", g},
                       {"alpha2", std::exp(h.log_alpha2[u])},
                       {"lengthscale", std::exp(h.log_lengthscale[u])},
                       {"alpha2_fixed", static_cast<bool>(h.fix_alpha2[u])},
                       {"lengthscale_fixed", static_cast<bool>(h.fix_lengthscale[u])}});
    }
    return out;
}

Json optimization_json(const OptimizationReport& rep) {
    Json o;
    o["best_nll"] = rep.best_nll;
    o["best_start"] = rep.best_start;
    o["best"] = hyper_json(rep.best);
    Json starts = Json::array();
    for (const auto& s : rep.starts) {
        starts.push_back({{"start", hyper_json(s.start)},
                          {"best", hyper_json(s.best)},
                          {"initial_nll", s.initial_nll},
                          {"final_nll", s.final_nll},
                          {"iterations", s.iterations},
                          {"evaluations", s.evaluations},
                          {"converged", s.converged},
                          {"trajectory", s.trajectory},
                          {"error", s.error}});
    }
    o["starts"] = std::move(starts);
    return o;
}

std::vector<std::string> physical_names(const char* prefix, Index n) {
    std::vector<std::string> out;
    for (Index i = 1; i <= n; ++i) out.push_back(std::string(prefix) + "_" + std::to_string(i));
    return out;
}

TimeSeries truth_series(const Scenario& s, double dt) {
    const Simulation& t = *s.truth;
    const Index n = t.displacement.cols();
    TimeSeries ts;
    ts.dt = dt;
    for (const char* p : {"dis", "vel", "acc"}) {
        for (auto& name : physical_names(p, n)) ts.channels.push_back(std::move(name));
    }
    for (const auto& name : s.input_names) ts.channels.push_back(name);
    const Index nf = s.excitation.values.cols();
    ts.values.resize(t.displacement.rows(), 3 * n + nf);
    ts.values << t.displacement, t.velocity, t.acceleration, s.excitation.values;
    return ts;
}

struct Group {
    const char* file;
    const char* prefix;
    const SignalSeries* filtered;
    const SignalSeries* smoothed;
    const Matrix* truth;
    std::vector<std::string> names;
};

void write_long_csv(const std::filesystem::path& path, const Group& g, double dt) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "time,signal,filtered_mean,filtered_variance,smoothed_mean,smoothed_variance,truth\n";
    const Index steps = g.filtered->mean.rows();
    for (Index j = 0; j < g.filtered->mean.cols(); ++j) {
        const std::string& name = g.names[static_cast<std::size_t>(j)];
        for (Index k = 0; k < steps; ++k) {
            out << format_number(static_cast<double>(k) * dt) << ',' << name << ','
                << format_number(g.filtered->mean(k, j)) << ',' << format_number(g.filtered->variance(k, j)) << ',';
            if (g.smoothed) {
                out << format_number(g.smoothed->mean(k, j)) << ',' << format_number(g.smoothed->variance(k, j));
            } else {
                out << ',';
            }
            out << ',';
            if (g.truth) out << format_number((*g.truth)(k, j));
            out << '\n';
        }
    }
    if (!out) throw Error("failed writing " + path.string());
}

void write_innovations(const std::filesystem::path& path, const EstimationResult& r, const std::vector<std::string>& names,
                       double dt) {
    TimeSeries ts;
    ts.dt = dt;
    for (const auto& n : names) ts.channels.push_back("e_" + n);
    for (const auto& n : names) ts.channels.push_back("s_" + n);
    ts.values.resize(r.innovations.rows(), 2 * r.innovations.cols());
    ts.values << r.innovations, r.innovation_variances;
    write_csv(path, ts);
}

void write_json(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

Json scenario_json(const ExperimentConfig& c, const Scenario& s) {
    Json j;
    j["steps"] = s.measurements.samples();
    j["dt"] = s.measurements.dt;
    j["channels"] = s.model.channel_names;
    j["inputs"] = s.input_names;
    j["state_count"] = s.model.state_count();
    j["simulated"] = s.truth.has_value();
    const ModalData modes = modal_analysis(s.system);
    const Index show = std::min<Index>(modes.frequencies_hz.size(), c.model.reduce_to > 0 ? c.model.reduce_to : 10);
    j["modal"] = {{"frequencies_hz", std::vector<double>(modes.frequencies_hz.data(), modes.frequencies_hz.data() + show)},
                  {"damping_ratios", std::vector<double>(modes.damping_ratios.data(), modes.damping_ratios.data() + show)}};
    return j;
}

Json metrics_json(const MetricSet& m, const char* stage_name) {
    Json sig = Json::array();
    for (const auto& s : m.signals) {
        Json e = {{"signal", s.signal},
                  {"rmse", s.rmse},
                  {"normalized_rmse", s.normalized_rmse},
                  {"drift", s.drift},
                  {"peak_error", s.peak_error}};
        e["correlation"] = s.correlation ? Json(*s.correlation) : Json(nullptr);
        sig.push_back(std::move(e));
    }
    return {{"stage", stage_name}, {"signals", std::move(sig)}};
}

void add_metrics(MetricSet& set, const SignalSeries& est, const Matrix& truth, const std::vector<std::string>& names,
                 double cutoff, double fs) {
    for (Index j = 0; j < est.mean.cols(); ++j) {
        std::vector<double> e(static_cast<std::size_t>(est.mean.rows()));
        std::vector<double> t(e.size());
        for (Index k = 0; k < est.mean.rows(); ++k) {
            e[static_cast<std::size_t>(k)] = est.mean(k, j);
            t[static_cast<std::size_t>(k)] = truth(k, j);
        }
        set.signals.push_back(score_signal(names[static_cast<std::size_t>(j)], e, t, cutoff, fs));
    }
}

}  // namespace

const char* version() { return kVersion; }

Verb verb_from_string(const std::string& name) {
    if (name == "simulate") return Verb::simulate;
    if (name == "estimate") return Verb::estimate;
    if (name == "optimize") return Verb::optimize;
    if (name == "lcurve") return Verb::lcurve;
    if (name == "diagnose") return Verb::diagnose;
    throw ConfigError("unknown verb '" + name + "'");
}

const char* to_string(Verb v) {
    switch (v) {
        case Verb::simulate: return "simulate";
        case Verb::estimate: return "estimate";
        case Verb::optimize: return "optimize";
        case Verb::lcurve: return "lcurve";
        case Verb::diagnose: return "diagnose";
    }
    return "?";
}

int exit_code_for(const std::exception& e) {
    if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
    if (dynamic_cast<const DegeneracyError*>(&e)) return exit_degeneracy;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const UnsupportedKernelError*>(&e) ||
        dynamic_cast<const nlohmann::json::exception*>(&e)) {
        return exit_config;
    }
    return exit_numerical;
}

Scenario build_scenario(const ExperimentConfig& c) {
    Scenario s;
    stage("model", [&] {
        StructuralSystem base = base_structure(c);
        const Index n = base.dofs();
        std::vector<Index> load_dofs;
        bool ground = false;
        for (std::size_t i = 0; i < c.inputs.size(); ++i) {
            if (c.inputs[i].ground) continue;
            if (c.inputs[i].floor > n) throw ConfigError("input floor " + std::to_string(c.inputs[i].floor) + " exceeds the model's " + std::to_string(n) + " floors");
            load_dofs.push_back(c.inputs[i].floor - 1);
            s.config_input.push_back(i);
            s.input_names.push_back(c.inputs[i].name());
        }
        for (std::size_t i = 0; i < c.inputs.size(); ++i) {
            if (!c.inputs[i].ground) continue;
            ground = true;
            s.config_input.push_back(i);
            s.input_names.push_back(c.inputs[i].name());
        }
        s.system = with_point_loads(base, load_dofs);
        if (ground) s.system = with_ground_motion(s.system);

        SensorLayout sensors;
        sensors.displacement_dofs = zero_based(c.sensors.displacement, n);
        sensors.velocity_dofs = zero_based(c.sensors.velocity, n);
        sensors.acceleration_dofs = zero_based(c.sensors.acceleration, n);
        s.truth_model = assemble_continuous_ssm(s.system, sensors);

        const ModalData modes = modal_analysis(s.system);
        double f_max = modes.frequencies_hz.maxCoeff();
        if (c.model.reduce_to > 0) {
            if (c.model.reduce_to > n) throw ConfigError("model.reduce_to exceeds the number of dofs");
            const ReducedSystem red = modal_truncation(s.system, c.model.reduce_to);
            s.model = assemble_continuous_ssm(red, sensors);
            f_max = modes.frequencies_hz(c.model.reduce_to - 1);
        } else {
            s.model = s.truth_model;
        }
        if (!(c.rate_hz > 2.0 * f_max)) {
            throw ConfigError("sampling.rate_hz must exceed twice the highest retained modal frequency (" +
                              format_number(f_max) + " Hz)");
        }
        if (c.method == "akfdm") {
            for (Index f : c.baseline.dummy_floors) {
                if (f > n) throw ConfigError("baseline.dummy_floors entry exceeds the model's floors");
            }
        }
        return 0;
    });

    const double dt = c.dt();
    if (!c.measurements_file.empty()) {
        stage("measurements", [&] {
            TimeSeries file = read_csv(c.measurements_file);
            if (std::abs(file.dt - dt) > 1e-9 * dt) throw ConfigError("measurements_file sampling does not match sampling.rate_hz");
            s.measurements.dt = dt;
            s.measurements.channels = s.model.channel_names;
            s.measurements.values.resize(file.samples(), s.model.output_count());
            for (Index j = 0; j < s.model.output_count(); ++j) {
                const Index col = file.channel_index(s.model.channel_names[static_cast<std::size_t>(j)]);
                if (col < 0) throw ConfigError("measurements_file lacks channel " + s.model.channel_names[static_cast<std::size_t>(j)]);
                s.measurements.values.col(j) = file.values.col(col);
            }
            return 0;
        });
        return s;
    }

    const Index steps = c.steps();
    stage("excitation", [&] {
        s.excitation.dt = dt;
        s.excitation.channels = s.input_names;
        s.excitation.values.resize(steps, static_cast<Index>(s.input_names.size()));
        for (std::size_t j = 0; j < s.config_input.size(); ++j) {
            const std::size_t i = s.config_input[j];
            const auto v = generate_excitation(c.inputs[i].excitation, dt, steps, c.seed, 1 + i);
            for (Index k = 0; k < steps; ++k) s.excitation.values(k, static_cast<Index>(j)) = v[static_cast<std::size_t>(k)];
        }
        return 0;
    });
    stage("simulation", [&] {
        const Index n = s.system.dofs();
        Vector x0 = Vector::Zero(2 * n);
        if (!c.initial_displacement.empty()) {
            if (static_cast<Index>(c.initial_displacement.size()) != n) throw ConfigError("initial_state.displacement needs one value per floor");
            for (Index i = 0; i < n; ++i) x0(i) = c.initial_displacement[static_cast<std::size_t>(i)];
        }
        if (!c.initial_velocity.empty()) {
            if (static_cast<Index>(c.initial_velocity.size()) != n) throw ConfigError("initial_state.velocity needs one value per floor");
            for (Index i = 0; i < n; ++i) x0(n + i) = c.initial_velocity[static_cast<std::size_t>(i)];
        }
        s.truth = simulate_response(s.truth_model, s.excitation.values, dt, x0);
        s.measurements.dt = dt;
        s.measurements.channels = s.model.channel_names;
        s.measurements.values = add_measurement_noise(s.truth->clean, c.noise_fraction, c.seed);
        return 0;
    });
    return s;
}

Json run_experiment(const ExperimentConfig& c, Verb verb, const std::filesystem::path& out_dir) {
    stage("output", [&] {
        std::filesystem::create_directories(out_dir);
        return 0;
    });
    Json summary;
    summary["version"] = kVersion;
    summary["verb"] = to_string(verb);
    summary["seed"] = c.seed;
    summary["config"] = c.raw;
    summary["method"] = c.method;

    Scenario s = build_scenario(c);
    const double dt = c.dt();
    summary["scenario"] = stage("model", [&] { return scenario_json(c, s); });

    stage("output", [&] {
        if (s.truth) {
            write_csv(out_dir / "excitation.csv", s.excitation);
            write_csv(out_dir / "truth.csv", truth_series(s, dt));
        }
        if (verb != Verb::diagnose) write_csv(out_dir / "measurements.csv", s.measurements);
        return 0;
    });

    switch (verb) {
        case Verb::simulate:
            break;
        case Verb::diagnose: {
            std::vector<KernelSpec> kernels;
            if (c.method == "gplfm") {
                for (std::size_t j = 0; j < s.config_input.size(); ++j) {
                    const KernelConfig& k = kernel_for(c, s.config_input[j]);
                    KernelSpec spec;
                    spec.order = k.order;
                    spec.alpha2 = k.alpha2;
                    spec.lengthscale = k.lengthscale;
                    kernels.push_back(spec);
                }
            }
            const AugmentedModel model = stage("model", [&] { return structure_model(c, s, kernels); });
            summary["diagnostics"] = stage("diagnostics", [&] { return diagnostics_json(model); });
            break;
        }
        case Verb::optimize: {
            const Estimation est = estimate(c, s, true);
            if (est.optimization) summary["optimization"] = optimization_json(*est.optimization);
            Json ks = Json::array();
            for (std::size_t j = 0; j < est.kernels.size(); ++j) {
                ks.push_back({{"input", s.input_names[j]},
                              {"p", est.kernels[j].order},
                              {"alpha2", est.kernels[j].alpha2},
                              {"lengthscale", est.kernels[j].lengthscale}});
            }
            summary["hyperparameters"] = std::move(ks);
            break;
        }
        case Verb::lcurve: {
            const Index ns = s.model.state_count();
            const BaselineMethod method = c.lcurve.method;
            if (method == BaselineMethod::akfdm && c.baseline.dummy_floors.empty()) {
                throw StageError("lcurve", exit_config, "baseline.dummy_floors is required for an akfdm L-curve");
            }
            const LCurve curve = stage("lcurve", [&] {
                return l_curve(s.model, dt, s.measurements.values, method, c.lcurve.grid, baseline_config(c, s),
                               c.q_x * Matrix::Identity(ns, ns), measurement_noise(c, s.model.output_count()),
                               StatePrior::isotropic(ns, c.p_x0));
            });
            stage("output", [&] {
                std::ofstream out(out_dir / "lcurve.csv");
                out << "q,q_norm,innovation_sum,curvature,selected,status\n";
                for (std::size_t i = 0; i < curve.points.size(); ++i) {
                    const auto& p = curve.points[i];
                    out << format_number(p.q) << ',' << format_number(p.q_norm) << ','
                        << (p.ok ? format_number(p.innovation_sum) : "nan") << ',' << format_number(curve.curvature[i])
                        << ',' << (static_cast<Index>(i) == curve.corner ? 1 : 0) << ',' << (p.ok ? "ok" : "failed")
                        << '\n';
                }
                return 0;
            });
            Json pts = Json::array();
            for (const auto& p : curve.points) {
                Json e = {{"q", p.q}, {"ok", p.ok}};
                e["innovation_sum"] = p.ok ? Json(p.innovation_sum) : Json(nullptr);
                if (!p.ok) e["error"] = p.error;
                pts.push_back(std::move(e));
            }
            summary["lcurve"] = {{"method", to_string(method)},
                                 {"selected_q", curve.selected_q()},
                                 {"corner_index", curve.corner},
                                 {"points", std::move(pts)}};
            break;
        }
        case Verb::estimate: {
            Estimation est = estimate(c, s, false);
            if (est.optimization) summary["optimization"] = optimization_json(*est.optimization);
            if (!est.kernels.empty()) {
                Json ks = Json::array();
                for (std::size_t j = 0; j < est.kernels.size(); ++j) {
                    ks.push_back({{"input", s.input_names[j]},
                                  {"p", est.kernels[j].order},
                                  {"alpha2", est.kernels[j].alpha2},
                                  {"lengthscale", est.kernels[j].lengthscale}});
                }
                summary["hyperparameters"] = std::move(ks);
            }
            summary["nll"] = est.result.nll;
            summary["diagnostics"] = stage("diagnostics", [&] { return diagnostics_json(est.model); });

            const SignalEstimates filt = stage("estimation", [&] {
                return extract_estimates(est.result, est.model, EstimateStage::filtered);
            });
            std::optional<SignalEstimates> smooth;
            if (est.smoothed) {
                smooth = stage("smoothing", [&] { return extract_estimates(est.result, est.model, EstimateStage::smoothed); });
            }
            const Index n = s.model.physical_dofs();
            const auto dis = physical_names("dis", n);
            const auto vel = physical_names("vel", n);
            const auto acc = physical_names("acc", n);
            const Simulation* truth = s.truth ? &*s.truth : nullptr;
            const Group groups[] = {
                {"estimates_displacement.csv", "dis", &filt.displacement, smooth ? &smooth->displacement : nullptr,
                 truth ? &truth->displacement : nullptr, dis},
                {"estimates_velocity.csv", "vel", &filt.velocity, smooth ? &smooth->velocity : nullptr,
                 truth ? &truth->velocity : nullptr, vel},
                {"estimates_acceleration.csv", "acc", &filt.acceleration, smooth ? &smooth->acceleration : nullptr,
                 truth ? &truth->acceleration : nullptr, acc},
                {"estimates_force.csv", "force", &filt.force, smooth ? &smooth->force : nullptr,
                 truth ? &s.excitation.values : nullptr, s.input_names},
            };
            stage("output", [&] {
                for (const auto& g : groups) write_long_csv(out_dir / g.file, g, dt);
                write_innovations(out_dir / "innovations.csv", est.result, est.model.channel_names, dt);
                return 0;
            });
            if (truth) {
                summary["metrics"] = stage("metrics", [&] {
                    MetricSet set;
                    for (const auto& g : groups) {
                        add_metrics(set, g.smoothed ? *g.smoothed : *g.filtered, *g.truth, g.names, c.drift_cutoff_hz,
                                    c.rate_hz);
                    }
                    return metrics_json(set, est.smoothed ? "smoothed" : "filtered");
                });
            }
            break;
        }
    }
    stage("output", [&] {
        write_json(out_dir / "summary.json", summary);
        return 0;
    });
    return summary;
}

}  // namespace gplfm::harness

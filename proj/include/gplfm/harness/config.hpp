// Experiment configuration: a JSON document describing the structure, excitation,
// sensors, sampling, estimator and its tuning. Floors are numbered from 1.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gplfm/baselines.hpp"
#include "gplfm/harness/excitation.hpp"
#include "gplfm/structural.hpp"

namespace gplfm::harness {

using Json = nlohmann::ordered_json;

struct ModelSpec {
    std::string type = "shear_building";  ///< shear_building | tower_standin | file
    Index floors = 10;
    double mass = 200.0;          ///< per floor [kg]
    double stiffness = 5.0e5;     ///< per storey [N/m]
    RayleighDamping rayleigh{0.1, 0.0005};
    double first_frequency_hz = 0.16;
    double damping_ratio = 0.01;
    Index reduce_to = 0;          ///< retained modes for the estimator, 0 = none
    std::filesystem::path path;   ///< type == file
};

struct InputSpec {
    bool ground = false;
    Index floor = 0;  ///< 1-based, loads only
    ExcitationSpec excitation;
    std::string name() const;
};

struct SensorSpec {
    std::vector<Index> displacement;  ///< 1-based floors
    std::vector<Index> velocity;
    std::vector<Index> acceleration;
};

struct KernelConfig {
    int order = 0;
    double alpha2 = 1.0;
    double lengthscale = 1.0;
    bool optimize_alpha2 = false;
    bool optimize_lengthscale = false;
};

struct OptimizerConfig {
    int n_starts = 8;
    int max_iterations = 500;
    double tolerance = 1e-6;
    std::optional<std::pair<double, double>> alpha2_bounds;       ///< linear units
    std::optional<std::pair<double, double>> lengthscale_bounds;  ///< seconds
};

struct BaselineSpec {
    double q_f = 1.0e4;
    std::optional<double> p_f0;
    double r_dm = 0.05;
    std::vector<Index> dummy_floors;
};

struct LCurveSpec {
    std::vector<double> grid;
    BaselineMethod method = BaselineMethod::akf;
};

struct ExperimentConfig {
    Json raw;                       ///< the document as given (echoed into the summary)
    std::filesystem::path base_dir; ///< relative file paths resolve here
    ModelSpec model;
    std::vector<InputSpec> inputs;
    SensorSpec sensors;
    double rate_hz = 100.0;
    double duration_s = 10.0;
    double noise_fraction = 0.1;
    std::uint64_t seed = 0;
    std::vector<double> initial_displacement;  ///< per floor, empty = 0
    std::vector<double> initial_velocity;
    std::string method = "gplfm";   ///< gplfm | akf | akfdm | dkf
    double q_x = 1e-10;
    double p_x0 = 1e-10;
    std::vector<double> r{0.1};     ///< one value for all channels or one per channel
    std::vector<KernelConfig> kernels;  ///< one per input, or a single entry applied to all
    bool shared_hyperparameters = true;
    OptimizerConfig optimizer;
    BaselineSpec baseline;
    LCurveSpec lcurve;
    double drift_cutoff_hz = 0.1;
    std::filesystem::path measurements_file;
    bool smooth = true;

    double dt() const { return 1.0 / rate_hz; }
    Index steps() const;
    bool needs_optimization() const;
};

/// Parses and validates. Throws ConfigError with the offending key.
ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gplfm::harness

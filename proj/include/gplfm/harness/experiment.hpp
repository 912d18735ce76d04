// End-to-end runs: build the structure from a config, simulate or load measurements,
// run GPLFM or a baseline, score against truth and write the result bundle.
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "gplfm/errors.hpp"
#include "gplfm/harness/config.hpp"
#include "gplfm/harness/simulate.hpp"
#include "gplfm/harness/timeseries.hpp"

namespace gplfm::harness {

enum class Verb { simulate, estimate, optimize, lcurve, diagnose };

Verb verb_from_string(const std::string& name);
const char* to_string(Verb v);

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_degeneracy = 4 };

/// A failure tagged with the pipeline stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, int exit_code, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}
    const std::string& stage() const { return stage_; }
    int exit_code() const { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

/// Maps library exceptions to exit codes (config 2, numerical 3, degeneracy 4).
int exit_code_for(const std::exception& e);

/// The structure and measurements of one run.
struct Scenario {
    StructuralSystem system;                ///< full physical model with inputs attached
    ContinuousStateSpace truth_model;       ///< full model, used for simulation
    ContinuousStateSpace model;             ///< estimator model (modally reduced if requested)
    std::vector<std::string> input_names;   ///< model input order
    std::vector<std::size_t> config_input;  ///< model input -> index into config.inputs
    TimeSeries excitation;                  ///< model input order
    TimeSeries measurements;
    std::optional<Simulation> truth;
};

/// Builds the models and, unless a measurement file is given, simulates the response.
Scenario build_scenario(const ExperimentConfig& config);

/// Runs one verb and writes its outputs into `out_dir` (created if needed).
/// Returns the summary document that was written to summary.json.
Json run_experiment(const ExperimentConfig& config, Verb verb, const std::filesystem::path& out_dir);

/// Library version stamped into every summary.
const char* version();

}  // namespace gplfm::harness

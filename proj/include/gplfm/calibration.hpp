// Maximum-likelihood calibration of kernel hyperparameters by minimizing the
// innovations negative log-likelihood with multi-start Nelder-Mead in log space.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gplfm/augmented.hpp"
#include "gplfm/kernels.hpp"
#include "gplfm/structural.hpp"

namespace gplfm {

/// Log-space hyperparameters, one (alpha2, lengthscale) pair per parameter group.
struct HyperParams {
    std::vector<double> log_alpha2;
    std::vector<double> log_lengthscale;
    std::vector<bool> fix_alpha2;
    std::vector<bool> fix_lengthscale;

    Index groups() const { return static_cast<Index>(log_alpha2.size()); }
    /// Free entries in the order alpha2_0, l_0, alpha2_1, l_1, ...
    std::vector<double> free_values() const;
    void set_free_values(const std::vector<double>& v);
    Index free_count() const;
};

/// Everything the likelihood depends on besides the hyperparameters.
struct CalibrationProblem {
    ContinuousStateSpace ssm;
    double dt = 0.0;
    Matrix measurements;
    Matrix q_x;
    Matrix r;
    StatePrior prior;
    std::vector<KernelSpec> kernels;  ///< one per input; alpha2/lengthscale are initial values
    std::vector<Index> group_of;      ///< kernel index -> parameter group

    /// Groups kernels with identical specs when `shared`, otherwise one group per kernel.
    static CalibrationProblem make(ContinuousStateSpace ssm, double dt, Matrix measurements, Matrix q_x, Matrix r,
                                   StatePrior prior, std::vector<KernelSpec> kernels, bool shared = true);

    Index group_count() const;
    /// Initial values taken from the kernel specs; nothing fixed.
    HyperParams initial_params() const;
    std::vector<KernelSpec> specs_for(const HyperParams& params) const;
    /// Assembled and discretized GPLFM model for `params`.
    AugmentedModel model_for(const HyperParams& params) const;
};

/// sum_k (log det S_k + e_k^T S_k^{-1} e_k); +inf when the model cannot be built or filtered.
double nll(const HyperParams& params, const CalibrationProblem& problem);

struct OptimizerSettings {
    int n_starts = 8;
    std::uint64_t seed = 0;
    double tolerance = 1e-6;  ///< on the simplex diameter, log space
    int max_iterations = 500;
    /// Per-group log bounds; empty means `default_bounds`.
    std::vector<std::pair<double, double>> log_alpha2_bounds;
    std::vector<std::pair<double, double>> log_lengthscale_bounds;
    /// Starting points used before the low-discrepancy draws.
    std::vector<HyperParams> explicit_starts;
    /// Fixed values and the fixed mask for generated starts; defaults to the first explicit
    /// start, then to `CalibrationProblem::initial_params()`.
    std::optional<HyperParams> base;
};

/// log alpha2 in [log(1e-4 s2), log(1e6 s2)] with s2 the mean measurement variance;
/// log l in [log dt, log T].
void default_bounds(const CalibrationProblem& problem, OptimizerSettings& settings);

struct StartResult {
    HyperParams start;
    HyperParams best;
    double initial_nll = 0.0;
    double final_nll = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> trajectory;  ///< best NLL after each iteration
    std::string error;
};

struct OptimizationReport {
    HyperParams best;
    double best_nll = 0.0;
    std::size_t best_start = 0;
    std::vector<StartResult> starts;
    double wall_time_seconds = 0.0;
};

/// Multi-start Nelder-Mead. Starts are the explicit ones followed by a randomly shifted
/// Halton sequence over the bounds. Ties are broken by start index.
/// Throws OptimizationError if every start fails.
OptimizationReport optimize(const CalibrationProblem& problem, OptimizerSettings settings);

}  // namespace gplfm

// Scenario excitations: impact pulse, harmonic load, white noise, wind-like band-limited
// noise, ground-motion records and a synthetic pulse-train ground motion.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gplfm/harness/timeseries.hpp"

namespace gplfm::harness {

enum class ExcitationType { impact, harmonic, white_noise, wind, record, pulse_train, constant, zero };

struct ExcitationSpec {
    ExcitationType type = ExcitationType::zero;
    // impact: triangular pulse rising over `rise` seconds from `start` to `peak`, then falling back.
    double start = 3.0;
    double rise = 0.05;
    double peak = 1.0e4;
    // harmonic: amplitude * sin(2 pi frequency t + phase)
    double amplitude = 100.0;
    double frequency_hz = 1.0;
    double phase = 0.0;
    // white_noise / wind: standard deviation; wind is low-passed at `cutoff_hz` and rescaled.
    double sigma = 1000.0;
    double mean = 0.0;
    double cutoff_hz = 1.0;
    // constant
    double value = 0.0;
    // record (two-column file) times `scale`
    std::filesystem::path path;
    double scale = 1.0;
};

ExcitationType excitation_type_from_string(const std::string& name);
const char* to_string(ExcitationType t);

/// Samples the excitation at t_k = k dt, k = 0..n-1. `stream` selects an independent
/// random stream for the stochastic types.
std::vector<double> generate_excitation(const ExcitationSpec& spec, double dt, Index n, std::uint64_t seed,
                                        std::uint64_t stream = 0);

}  // namespace gplfm::harness

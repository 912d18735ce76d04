#include "gplfm/harness/excitation.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gplfm/errors.hpp"
#include "gplfm/signals.hpp"

namespace gplfm::harness {

namespace {

std::vector<double> gaussian(std::uint64_t seed, std::uint64_t stream, Index n, double sigma) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = dist(rng);
    return out;
}

// Three windowed sinusoidal bursts, peak ground acceleration `amplitude`.
double pulse_train(double t, double amplitude) {
    struct Pulse {
        double centre, width, freq, weight;
    };
    static constexpr Pulse pulses[] = {{2.0, 0.6, 1.5, 0.6}, {3.5, 0.8, 2.5, 1.0}, {5.5, 1.2, 1.1, 0.5}};
    double a = 0.0;
    for (const auto& p : pulses) {
        const double u = (t - p.centre) / p.width;
        a += p.weight * std::exp(-0.5 * u * u) * std::sin(2.0 * std::numbers::pi * p.freq * (t - p.centre));
    }
    return amplitude * a;
}

}  // namespace

ExcitationType excitation_type_from_string(const std::string& name) {
    if (name == "impact") return ExcitationType::impact;
    if (name == "harmonic") return ExcitationType::harmonic;
    if (name == "white_noise") return ExcitationType::white_noise;
    if (name == "wind") return ExcitationType::wind;
    if (name == "record" || name == "seismic" || name == "file") return ExcitationType::record;
    if (name == "pulse_train" || name == "synthetic_seismic") return ExcitationType::pulse_train;
    if (name == "constant") return ExcitationType::constant;
    if (name == "zero" || name == "none") return ExcitationType::zero;
    throw ConfigError("unknown excitation type '" + name + "'");
}

const char* to_string(ExcitationType t) {
    switch (t) {
        case ExcitationType::impact: return "impact";
        case ExcitationType::harmonic: return "harmonic";
        case ExcitationType::white_noise: return "white_noise";
        case ExcitationType::wind: return "wind";
        case ExcitationType::record: return "record";
        case ExcitationType::pulse_train: return "pulse_train";
        case ExcitationType::constant: return "constant";
        case ExcitationType::zero: return "zero";
    }
    return "?";
}

std::vector<double> generate_excitation(const ExcitationSpec& spec, double dt, Index n, std::uint64_t seed,
                                        std::uint64_t stream) {
    if (!(dt > 0.0)) throw ValidationError("excitation dt must be positive");
    if (n < 1) throw ValidationError("excitation needs at least one sample");
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    const auto t_of = [dt](std::size_t k) { return static_cast<double>(k) * dt; };
    switch (spec.type) {
        case ExcitationType::zero:
            break;
        case ExcitationType::constant:
            std::fill(out.begin(), out.end(), spec.value);
            break;
        case ExcitationType::impact: {
            if (!(spec.rise > 0.0)) throw ConfigError("impact rise time must be positive");
            for (std::size_t k = 0; k < out.size(); ++k) {
                const double u = (t_of(k) - spec.start) / spec.rise;
                out[k] = spec.peak * std::max(0.0, 1.0 - std::abs(u - 1.0));
            }
            break;
        }
        case ExcitationType::harmonic:
            for (std::size_t k = 0; k < out.size(); ++k) {
                out[k] = spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.frequency_hz * t_of(k) + spec.phase);
            }
            break;
        case ExcitationType::white_noise: {
            if (spec.sigma < 0.0) throw ConfigError("white-noise sigma must be non-negative");
            out = gaussian(seed, stream, n, spec.sigma);
            for (auto& v : out) v += spec.mean;
            break;
        }
        case ExcitationType::wind: {
            if (spec.sigma < 0.0) throw ConfigError("wind sigma must be non-negative");
            const auto sections = signals::butterworth_lowpass(4, spec.cutoff_hz, 1.0 / dt);
            out = signals::sosfilt(sections, gaussian(seed, stream, n, 1.0));
            double s2 = 0.0;
            for (double v : out) s2 += v * v;
            const double rms = std::sqrt(s2 / static_cast<double>(out.size()));
            for (auto& v : out) v = spec.mean + (rms > 0.0 ? spec.sigma * v / rms : 0.0);
            break;
        }
        case ExcitationType::record: {
            const Record rec = read_record(spec.path);
            for (std::size_t k = 0; k < out.size(); ++k) out[k] = spec.scale * rec.at(t_of(k));
            break;
        }
        case ExcitationType::pulse_train:
            for (std::size_t k = 0; k < out.size(); ++k) out[k] = pulse_train(t_of(k), spec.amplitude);
            break;
    }
    return out;
}

}  // namespace gplfm::harness

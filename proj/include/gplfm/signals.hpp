// Small signal-processing helpers: Butterworth low-pass sections and zero-phase filtering.
#pragma once

#include <array>
#include <span>
#include <vector>

namespace gplfm::signals {

/// Second-order section, b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
    std::array<double, 3> b{};
    std::array<double, 2> a{};  ///< a1, a2
};

/// Butterworth low-pass of even `order` via the bilinear transform with prewarping.
/// Throws ValidationError unless 0 < cutoff_hz < fs_hz / 2.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs_hz);

/// Causal filtering through the cascade (transposed direct form II), zero initial state.
std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x);

/// Forward-backward filtering with odd-extension padding and steady-state initial conditions.
/// `pad` < 0 selects 3 (2 sections + 1) samples; it is capped at x.size() - 1.
std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x, long pad = -1);

}  // namespace gplfm::signals

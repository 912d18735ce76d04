#include "gplfm/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gplfm/errors.hpp"

namespace gplfm::signals {

namespace {

using State = std::array<double, 2>;

double section_dc_gain(const Biquad& s) { return (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[0] + s.a[1]); }

// Filter state of one section that has settled under a unit step input.
State step_state(const Biquad& s) {
    const double g = section_dc_gain(s);
    const double z2 = s.b[2] - s.a[1] * g;
    return {s.b[1] - s.a[0] * g + z2, z2};
}

void run(std::span<const Biquad> sections, std::vector<double>& x, std::vector<State> z) {
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const auto& s = sections[i];
        auto& st = z[i];
        for (double& v : x) {
            const double y = s.b[0] * v + st[0];
            st[0] = s.b[1] * v - s.a[0] * y + st[1];
            st[1] = s.b[2] * v - s.a[1] * y;
            v = y;
        }
    }
}

std::vector<State> initial_state(std::span<const Biquad> sections, double x0) {
    std::vector<State> z(sections.size());
    double scale = x0;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const State s = step_state(sections[i]);
        z[i] = {s[0] * scale, s[1] * scale};
        scale *= section_dc_gain(sections[i]);
    }
    return z;
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
    if (order < 2 || order % 2 != 0) throw ValidationError("Butterworth order must be even and at least 2");
    if (!(fs_hz > 0.0)) throw ValidationError("sampling rate must be positive");
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * fs_hz)) {
        throw ValidationError("low-pass cutoff must lie strictly between 0 and the Nyquist frequency");
    }
    const double k = std::tan(std::numbers::pi * cutoff_hz / fs_hz);
    const double k2 = k * k;
    std::vector<Biquad> out;
    for (int i = 0; i < order / 2; ++i) {
        const double q = 1.0 / (2.0 * std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * order)));
        const double norm = 1.0 / (1.0 + k / q + k2);
        Biquad s;
        s.b = {k2 * norm, 2.0 * k2 * norm, k2 * norm};
        s.a = {2.0 * (k2 - 1.0) * norm, (1.0 - k / q + k2) * norm};
        out.push_back(s);
    }
    return out;
}

std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    run(sections, y, std::vector<State>(sections.size(), State{0.0, 0.0}));
    return y;
}

std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x, long pad_request) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t wanted = pad_request < 0 ? 3 * (2 * sections.size() + 1) : static_cast<std::size_t>(pad_request);
    const std::size_t pad = std::min(wanted, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    run(sections, ext, initial_state(sections, ext.front()));
    std::reverse(ext.begin(), ext.end());
    run(sections, ext, initial_state(sections, ext.front()));
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace gplfm::signals

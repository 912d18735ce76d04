// Uniformly sampled multichannel series and their CSV representation.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gplfm/numerics.hpp"

namespace gplfm::harness {

struct TimeSeries {
    double dt = 0.0;
    std::vector<std::string> channels;
    Matrix values;  ///< N x channels

    Index samples() const { return values.rows(); }
    double time(Index k) const { return static_cast<double>(k) * dt; }
    std::vector<double> column(Index j) const;
    Index channel_index(const std::string& name) const;  ///< -1 if absent
};

/// 12 significant digits; "nan" for non-finite values.
std::string format_number(double v);

/// Header "time,<channels>", one row per sample.
void write_csv(const std::filesystem::path& path, const TimeSeries& series);

/// Reads a CSV written by `write_csv` (or any file with a time column first and a header row).
/// Sampling must be uniform. Empty or "nan" cells become NaN.
TimeSeries read_csv(const std::filesystem::path& path);

/// Two columns (time, value) separated by commas, whitespace or semicolons; '#' starts a comment.
/// A non-numeric first line is treated as a header. Times must be strictly increasing.
struct Record {
    std::vector<double> time;
    std::vector<double> value;
    /// Linear interpolation, zero outside the record.
    double at(double t) const;
};
Record read_record(const std::filesystem::path& path);

}  // namespace gplfm::harness

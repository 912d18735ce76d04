#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gplfm/errors.hpp"
#include "gplfm/harness/timeseries.hpp"

namespace gplfm::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& line, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (seps.find(c) != std::string::npos) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    const std::string s = trim(text);
    if (s.empty() || s == "nan" || s == "NaN") {
        out = kNaN;
        return true;
    }
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0';
}

}  // namespace

std::vector<double> TimeSeries::column(Index j) const {
    std::vector<double> out(static_cast<std::size_t>(values.rows()));
    for (Index k = 0; k < values.rows(); ++k) out[static_cast<std::size_t>(k)] = values(k, j);
    return out;
}

Index TimeSeries::channel_index(const std::string& name) const {
    const auto it = std::find(channels.begin(), channels.end(), name);
    return it == channels.end() ? -1 : static_cast<Index>(it - channels.begin());
}

std::string format_number(double v) {
    if (!std::isfinite(v)) return "nan";
    if (v == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const TimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "time";
    for (const auto& c : series.channels) out << ',' << c;
    out << '\n';
    for (Index k = 0; k < series.samples(); ++k) {
        out << format_number(series.time(k));
        for (Index j = 0; j < series.values.cols(); ++j) out << ',' << format_number(series.values(k, j));
        out << '\n';
    }
    if (!out) throw Error("failed writing " + path.string());
}

TimeSeries read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open measurement file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("measurement file " + path.string() + " is empty");
    auto header = split(line, ",");
    if (header.size() < 2) throw ConfigError("measurement file needs a time column and at least one channel");
    TimeSeries ts;
    for (std::size_t i = 1; i < header.size(); ++i) ts.channels.push_back(trim(header[i]));
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(line, ",");
        if (cells.size() != header.size()) {
            throw ConfigError("row " + std::to_string(rows.size() + 2) + " of " + path.string() +
                              " has the wrong number of columns");
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!parse_double(cells[i], row[i])) throw ConfigError("malformed number '" + cells[i] + "' in " + path.string());
        }
        times.push_back(row[0]);
        row.erase(row.begin());
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw ConfigError("measurement file needs at least two samples");
    ts.dt = times[1] - times[0];
    if (!(ts.dt > 0.0)) throw ConfigError("measurement times must increase");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - times[k - 1] - ts.dt) > 1e-6 * ts.dt + 1e-9) {
            throw ConfigError("measurement file is not uniformly sampled");
        }
    }
    ts.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(ts.channels.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t j = 0; j < rows[k].size(); ++j) ts.values(static_cast<Index>(k), static_cast<Index>(j)) = rows[k][j];
    }
    return ts;
}

double Record::at(double t) const {
    if (time.empty() || t < time.front() || t > time.back()) return 0.0;
    const auto it = std::upper_bound(time.begin(), time.end(), t);
    if (it == time.end()) return value.back();
    const auto i = static_cast<std::size_t>(it - time.begin());
    const double w = (t - time[i - 1]) / (time[i] - time[i - 1]);
    return (1.0 - w) * value[i - 1] + w * value[i];
}

Record read_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open record file " + path.string());
    Record rec;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::vector<std::string> cells;
        for (auto& c : split(line, ",; \t")) {
            if (!trim(c).empty()) cells.push_back(c);
        }
        if (cells.empty()) continue;
        double t = 0.0;
        double v = 0.0;
        const bool ok = cells.size() == 2 && parse_double(cells[0], t) && parse_double(cells[1], v) &&
                        std::isfinite(t) && std::isfinite(v);
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw ConfigError("malformed line in record file " + path.string() + ": '" + line + "'");
        }
        first = false;
        if (!rec.time.empty() && !(t > rec.time.back())) throw ConfigError("record times must strictly increase");
        rec.time.push_back(t);
        rec.value.push_back(v);
    }
    if (rec.time.size() < 2) throw ConfigError("record file " + path.string() + " has fewer than two samples");
    return rec;
}

}  // namespace gplfm::harness

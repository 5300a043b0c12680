#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "crossint/errors.hpp"

namespace crossint {

/// One row of a convergence experiment. `runtime_seconds` is cumulative
/// elapsed time within the experiment when the row was produced, so
/// time-to-threshold reads directly off the rows.
struct ConvergenceRecord {
    std::string method;
    long long n = 0;
    double estimate = 0.0;
    double error = 0.0;
    double runtime_seconds = 0.0;
    long long evals = 0;

    bool operator==(const ConvergenceRecord&) const = default;
};

inline constexpr const char* kCsvHeader = "method,n,estimate,error,runtime_seconds,evals";

/// Shortest round-trip decimal rendering for every float column.
inline std::string to_csv(const std::vector<ConvergenceRecord>& records) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : records)
        out += fmt::format("{},{},{},{},{},{}\n", r.method, r.n, r.estimate, r.error,
                           r.runtime_seconds, r.evals);
    return out;
}

inline std::vector<ConvergenceRecord> from_csv(std::istream& in) {
    std::vector<ConvergenceRecord> records;
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw InvalidInputError("from_csv: missing or malformed header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        ConvergenceRecord r;
        std::string field;
        std::getline(ss, r.method, ',');
        std::getline(ss, field, ',');
        r.n = std::stoll(field);
        std::getline(ss, field, ',');
        r.estimate = std::stod(field);
        std::getline(ss, field, ',');
        r.error = std::stod(field);
        std::getline(ss, field, ',');
        r.runtime_seconds = std::stod(field);
        std::getline(ss, field, ',');
        r.evals = std::stoll(field);
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<ConvergenceRecord> read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("read_csv_file: cannot open " + path);
    return from_csv(in);
}

enum class SlopeAxis { NodeCount, Runtime };

/// Least-squares slope of log(error) versus log(x) over records whose x lies
/// in [range.first, range.second]. Rows with non-positive error are skipped.
inline double fit_slope(const std::vector<ConvergenceRecord>& records, SlopeAxis axis,
                        std::pair<double, double> range) {
    std::vector<double> lx, ly;
    for (const auto& r : records) {
        const double x = axis == SlopeAxis::NodeCount ? static_cast<double>(r.n)
                                                      : r.runtime_seconds;
        if (x < range.first || x > range.second) continue;
        if (!(r.error > 0.0) || !(x > 0.0)) continue;
        lx.push_back(std::log(x));
        ly.push_back(std::log(r.error));
    }
    if (lx.size() < 3)
        throw InvalidInputError("fit_slope: need at least 3 records with positive error in range");
    const double n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Pearson correlation of log(error) against x (not log x): near -1 indicates
/// a clean exponential decay.
inline double log_error_correlation(const std::vector<ConvergenceRecord>& records,
                                    std::pair<double, double> range) {
    std::vector<double> xs, ys;
    for (const auto& r : records) {
        const double x = static_cast<double>(r.n);
        if (x < range.first || x > range.second || !(r.error > 0.0)) continue;
        xs.push_back(x);
        ys.push_back(std::log(r.error));
    }
    if (xs.size() < 3) throw InvalidInputError("log_error_correlation: need at least 3 records");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        syy += ys[i] * ys[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) /
           std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

/// Measured time until each method first reaches error <= eps.
/// Unattained thresholds render as an em dash.
inline std::string threshold_table(const std::vector<ConvergenceRecord>& records,
                                   const std::vector<double>& thresholds) {
    std::vector<std::string> methods;
    for (const auto& r : records)
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);

    std::string out = fmt::format("{:<16}", "method");
    for (double eps : thresholds) out += fmt::format("{:>16}", fmt::format("t(err<={:g})", eps));
    out += '\n';
    for (const auto& method : methods) {
        out += fmt::format("{:<16}", method);
        for (double eps : thresholds) {
            double t = -1.0;
            for (const auto& r : records) {
                if (r.method != method || !(r.error <= eps)) continue;
                t = r.runtime_seconds;
                break;
            }
            out += t < 0.0 ? fmt::format("{:>16}", "—")
                           : fmt::format("{:>15.3f}s", t);
        }
        out += '\n';
    }
    return out;
}

/// First time-to-threshold for one method, or a negative value if unattained.
inline double time_to_threshold(const std::vector<ConvergenceRecord>& records,
                                const std::string& method, double eps) {
    for (const auto& r : records)
        if (r.method == method && r.error <= eps) return r.runtime_seconds;
    return -1.0;
}

/// Writes the records as CSV to `out_path` and an aligned time-to-threshold
/// table (wall-clock on this host, not a portable benchmark) next to it with
/// a .txt extension. Returns the table text.
inline std::string emit_report(const std::vector<ConvergenceRecord>& records,
                               const std::string& out_path,
                               const std::vector<double>& thresholds = {1e-3, 1e-6, 1e-9}) {
    if (records.empty()) throw InvalidInputError("emit_report: no records");
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::ios_base::failure("emit_report: cannot write " + out_path);
        out << to_csv(records);
    }
    std::string table = "time-to-threshold, measured wall-clock on this host\n";
    table += threshold_table(records, thresholds);

    std::string table_path = out_path;
    const auto dot = table_path.find_last_of('.');
    if (dot != std::string::npos) table_path.resize(dot);
    table_path += ".txt";
    std::ofstream tout(table_path, std::ios::binary);
    if (!tout) throw std::ios_base::failure("emit_report: cannot write " + table_path);
    tout << table;
    return table;
}

} // namespace crossint

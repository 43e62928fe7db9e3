#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpthresh/experiments.hpp"

namespace lpthresh {

inline constexpr const char* kCurveHeader = "sparsity,success_rate,mean_re,mean_iterations";
inline constexpr const char* kLongHeader = "algorithm,p,sparsity,success_rate,mean_re,mean_iterations";

/// One curve: header kCurveHeader, one line per sparsity. Reals are written
/// with 17 significant digits so parsing restores them exactly.
void write_curve_csv(std::ostream& out, const SuccessCurve& curve);
/// All curves in long format, header kLongHeader.
void write_long_csv(std::ostream& out, const std::vector<SuccessCurve>& curves);

/// Inverse of write_curve_csv. `trials` restores the success counts.
std::vector<CurvePoint> parse_curve_csv(std::istream& in, std::size_t trials);
std::vector<SuccessCurve> parse_long_csv(std::istream& in, std::size_t trials);

/// Tab-separated `sparsity<TAB>success_rate` series, for plotting tools.
void write_plot_tsv(std::ostream& out, const SuccessCurve& curve);

/// Writes curve_<label>.csv, curves.csv and plot_<label>.tsv under `dir`.
/// Returns the paths written. Throws std::runtime_error naming the path on
/// I/O failure and std::invalid_argument on an empty curve list.
std::vector<std::filesystem::path> emit_curve_files(const std::filesystem::path& dir,
                                                    const std::vector<SuccessCurve>& curves);
/// Only the plot series.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir,
                                                  const std::vector<SuccessCurve>& curves);

struct RunManifest {
    ExperimentSpec spec;  ///< effective spec (after --quick / --seed)
    std::string command;
    std::string tool_version;
    std::string timestamp;  ///< UTC, ISO 8601
    double runtime_seconds = 0.0;
    unsigned workers = 1;
};

nlohmann::json manifest_json(const RunManifest& manifest, const SweepResult& result);

/// Largest sparsity whose success rate is at least `level`; 0 if none.
std::size_t largest_reliable_sparsity(const SuccessCurve& curve, double level = 0.9);

/// Plain-text ranking of the curves by largest_reliable_sparsity.
void write_summary_table(std::ostream& out, const std::vector<SuccessCurve>& curves, double level = 0.9);

std::string utc_timestamp();
std::string tool_version();

}  // namespace lpthresh

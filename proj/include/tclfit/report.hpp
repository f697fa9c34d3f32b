#pragma once

#include "tclfit/calibrate.hpp"

#include <string>
#include <vector>

namespace tclfit {

inline constexpr double kHistogramWidth = 0.005;
inline constexpr double kHistogramMax = 0.3;

struct TableRow {
  std::string equation;
  std::string parameterization;
  Metrics metrics;
};

/// Counts per bin of width 0.005 on [0, 0.3]; values >= 0.3 land in the last bin.
std::vector<long> histogram(const std::vector<double>& values);

/// Rows in fixed order: Baseline, Lindblad, Linear TCL (Affine, Neural Network,
/// KL - Sq. Exp., KL - Exp.), Nonlinear TCL (Affine, Neural Network), then the rest.
std::vector<TableRow> metrics_table(const std::vector<FitResult>& results);
std::string metrics_csv(const std::vector<TableRow>& rows);

struct ReportBundle {
  std::vector<TableRow> table;
  std::string metrics_path;
  std::vector<std::string> bloch_paths;
  std::string interp_histogram_path;
  std::string extrap_histogram_path;
};

/// Writes metrics.csv, bloch_<experiment>.csv and histogram_{interpolation,extrapolation}.csv
/// into `dir` (created if needed). A Baseline row is added when no result is the baseline.
/// Predictions are recomputed from each result's model on `data`.
ReportBundle emit_report(const std::vector<FitResult>& results, const Dataset& data, const std::string& dir);

}  // namespace tclfit

#include "tclfit/report.hpp"

#include "tclfit/data_io.hpp"
#include "tclfit/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

namespace tclfit {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v + 0.0);
  return buf;
}

std::string cell(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g (%.3g)", mean, sd);
  return buf;
}

int row_rank(const std::string& eq, const std::string& par) {
  static const std::vector<std::pair<std::string, std::string>> order = {
      {"Baseline", "-"},
      {"Lindblad", "-"},
      {"Linear TCL", "Affine"},
      {"Linear TCL", "Neural Network"},
      {"Linear TCL", "KL - Sq. Exp."},
      {"Linear TCL", "KL - Exp."},
      {"Nonlinear TCL", "Affine"},
      {"Nonlinear TCL", "Neural Network"},
  };
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i].first == eq && order[i].second == par) return static_cast<int>(i);
  return static_cast<int>(order.size());
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (!out.empty() && out.back() != '-') out += '-';
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::vector<long> histogram(const std::vector<double>& values) {
  const int bins = static_cast<int>(std::lround(kHistogramMax / kHistogramWidth));
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    int b = static_cast<int>(std::floor(std::max(0.0, v) / kHistogramWidth));
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

std::vector<TableRow> metrics_table(const std::vector<FitResult>& results) {
  std::vector<TableRow> rows;
  for (const auto& r : results) rows.push_back({equation_label(r), parameterization_label(r), r.evaluation.metrics});
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow& a, const TableRow& b) {
    return row_rank(a.equation, a.parameterization) < row_rank(b.equation, b.parameterization);
  });
  return rows;
}

std::string metrics_csv(const std::vector<TableRow>& rows) {
  std::ostringstream os;
  os << "equation,parameterization,interpolation,extrapolation,interp_mean,interp_std,extrap_mean,extrap_std\n";
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    os << quote(r.equation) << ',' << quote(r.parameterization) << ',' << quote(cell(m.interp_mean, m.interp_std))
       << ',' << quote(cell(m.extrap_mean, m.extrap_std)) << ',' << num(m.interp_mean) << ',' << num(m.interp_std)
       << ',' << num(m.extrap_mean) << ',' << num(m.extrap_std) << '\n';
  }
  return os.str();
}

ReportBundle emit_report(const std::vector<FitResult>& input, const Dataset& data, const std::string& dir) {
  if (input.empty()) throw ValidationError("report: at least one result is required");
  data.validate();

  std::vector<FitResult> results;
  const bool has_baseline = std::any_of(input.begin(), input.end(), [](const FitResult& r) { return r.baseline; });
  if (!has_baseline) results.push_back(baseline_result(data, input.front().t_train, input.front().dt));
  for (const auto& r : input) {
    FitResult copy = r;
    copy.evaluation = evaluate(r.model, data, r.t_train, r.dt);
    results.push_back(std::move(copy));
  }
  std::stable_sort(results.begin(), results.end(), [](const FitResult& a, const FitResult& b) {
    return row_rank(equation_label(a), parameterization_label(a)) < row_rank(equation_label(b), parameterization_label(b));
  });

  std::vector<std::string> names;
  std::map<std::string, int> seen;
  for (const auto& r : results) {
    std::string base = r.model.spec().label.empty() || r.baseline
                           ? slug(equation_label(r) + (parameterization_label(r) == "-" ? "" : " " + parameterization_label(r)))
                           : slug(r.model.spec().label);
    const int n = seen[base]++;
    names.push_back(n == 0 ? base : base + "-" + std::to_string(n + 1));
  }

  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  ReportBundle bundle;
  bundle.table = metrics_table(results);
  bundle.metrics_path = (root / "metrics.csv").string();
  write_file(bundle.metrics_path, metrics_csv(bundle.table));

  if (data.system.dim == 2) {
    for (std::size_t e = 0; e < data.experiments.size(); ++e) {
      const Experiment& ex = data.experiments[e];
      std::ostringstream os;
      os << "t_us,measured_x,measured_y,measured_z";
      for (const auto& n : names) os << ',' << n << "_x," << n << "_y," << n << "_z";
      os << '\n';
      for (std::size_t k = 0; k < ex.measured.times.size(); ++k) {
        const BlochVector m = bloch_decompose(ex.measured.states[k]);
        os << num(ex.measured.times[k]) << ',' << num(m.a[0]) << ',' << num(m.a[1]) << ',' << num(m.a[2]);
        for (const auto& r : results) {
          const BlochVector p = bloch_decompose(r.evaluation.predicted[e].states[k]);
          os << ',' << num(p.a[0]) << ',' << num(p.a[1]) << ',' << num(p.a[2]);
        }
        os << '\n';
      }
      const std::string path = (root / ("bloch_" + slug(ex.id) + ".csv")).string();
      write_file(path, os.str());
      bundle.bloch_paths.push_back(path);
    }
  }

  auto write_hist = [&](bool interp, const std::string& file) {
    std::vector<std::vector<long>> counts;
    for (const auto& r : results) {
      std::vector<double> vals;
      for (const auto& s : r.evaluation.series)
        for (std::size_t k = 0; k < s.times.size(); ++k) {
          const bool in = s.times[k] <= r.t_train + 1e-9 * std::max(1.0, r.t_train);
          if (in == interp) vals.push_back(s.distances[k]);
        }
      counts.push_back(histogram(vals));
    }
    std::ostringstream os;
    os << "bin_lo,bin_hi";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    const std::size_t bins = counts.front().size();
    for (std::size_t b = 0; b < bins; ++b) {
      os << num(static_cast<double>(b) * kHistogramWidth) << ',' << num(static_cast<double>(b + 1) * kHistogramWidth);
      for (const auto& c : counts) os << ',' << c[b];
      os << '\n';
    }
    const std::string path = (root / file).string();
    write_file(path, os.str());
    return path;
  };
  bundle.interp_histogram_path = write_hist(true, "histogram_interpolation.csv");
  bundle.extrap_histogram_path = write_hist(false, "histogram_extrapolation.csv");
  return bundle;
}

}  // namespace tclfit

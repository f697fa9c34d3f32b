#include "tclfit/data_io.hpp"
#include "tclfit/errors.hpp"
#include "tclfit/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <sstream>

using namespace tclfit;

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      else if (c == ',' && !quoted) {
        cells.push_back(cur);
        cur.clear();
      } else cur += c;
    }
    cells.push_back(cur);
    rows.push_back(cells);
  }
  return rows;
}

Dataset dataset() {
  const SystemConfig cfg = qudit_testbed_config();
  SynthProtocol p;
  p.n_experiments = 2;
  p.duration_us = 2.0;
  p.sample_dt_us = 0.1;
  p.dt_us = 0.004;
  p.seed = 4;
  return generate_synthetic(baseline_model(cfg), cfg, p);
}

FitResult unfitted(ModelVariant v, bool state_dependent, const SystemConfig& cfg) {
  ModelSpec spec;
  spec.variant = v;
  spec.time_scale = 1.0;
  spec.state_dependent = state_dependent;
  if (v == ModelVariant::MLP) spec.set_hidden_layers({4});
  if (v == ModelVariant::KLExp) spec.kl.kernel = KernelKind::Exponential;
  const RVector base = baseline_theta(cfg);
  FitResult r(initialize_model(spec, &base, 3));
  r.t_train = 1.0;
  return r;
}

}  // namespace

TEST_CASE("histogram bins") {
  const std::vector<long> h = histogram({0.0, 0.0049, 0.005, 0.2999, 0.3, 5.0, -1e-17});
  REQUIRE(h.size() == 60);
  CHECK(h[0] == 3);
  CHECK(h[1] == 1);
  CHECK(h[59] == 3);
  CHECK(std::accumulate(h.begin(), h.end(), 0L) == 7);
}

TEST_CASE("metrics table follows the fixed row order") {
  const SystemConfig cfg = qudit_testbed_config();
  std::vector<FitResult> rs;
  rs.push_back(unfitted(ModelVariant::MLP, true, cfg));
  rs.push_back(unfitted(ModelVariant::KLExp, false, cfg));
  rs.push_back(unfitted(ModelVariant::Constant, false, cfg));
  rs.push_back(unfitted(ModelVariant::Affine, false, cfg));
  rs.push_back(unfitted(ModelVariant::Affine, true, cfg));
  rs.push_back(unfitted(ModelVariant::KLSqExp, false, cfg));
  rs.push_back(unfitted(ModelVariant::MLP, false, cfg));
  FitResult b(baseline_model(cfg));
  b.baseline = true;
  rs.push_back(b);
  const auto rows = metrics_table(rs);
  const std::vector<std::pair<std::string, std::string>> want = {
      {"Baseline", "-"},
      {"Lindblad", "-"},
      {"Linear TCL", "Affine"},
      {"Linear TCL", "Neural Network"},
      {"Linear TCL", "KL - Sq. Exp."},
      {"Linear TCL", "KL - Exp."},
      {"Nonlinear TCL", "Affine"},
      {"Nonlinear TCL", "Neural Network"},
  };
  REQUIRE(rows.size() == want.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].equation == want[i].first);
    CHECK(rows[i].parameterization == want[i].second);
  }

  std::vector<TableRow> one = {{"Linear TCL", "KL - Sq. Exp.", Metrics{0.025, 0.0122, 0.05, 0.03, 1, 1}}};
  const std::string csv = metrics_csv(one);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "equation,parameterization,interpolation,extrapolation,interp_mean,interp_std,extrap_mean,extrap_std");
  CHECK(csv.find("Linear TCL,KL - Sq. Exp.,0.025 (0.0122),0.05 (0.03),0.025,0.0122,0.05,0.03\n") !=
        std::string::npos);
}

TEST_CASE("emitted report") {
  const Dataset data = dataset();
  const SystemConfig& cfg = data.system;
  const std::string dir = (std::filesystem::temp_directory_path() / "tclfit_test_report").string();
  std::filesystem::remove_all(dir);

  const ReportBundle bundle =
      emit_report({unfitted(ModelVariant::KLSqExp, false, cfg), unfitted(ModelVariant::Constant, false, cfg)}, data, dir);

  // two models plus the baseline
  const auto table = read_csv(bundle.metrics_path);
  REQUIRE(table.size() == 4);
  CHECK(table[1][0] == "Baseline");
  CHECK(table[2][0] == "Lindblad");
  CHECK(table[3][0] == "Linear TCL");
  CHECK(table[3][1] == "KL - Sq. Exp.");
  for (const auto& row : table) CHECK(row.size() == 8);

  REQUIRE(bundle.bloch_paths.size() == 2);
  for (const auto& path : bundle.bloch_paths) {
    const auto bloch = read_csv(path);
    REQUIRE(bloch.size() == 22);
    CHECK(bloch[0].size() == 4 + 3 * 3);
    CHECK(bloch[1][0] == "0");
    CHECK(bloch[1][1] == "0");
    CHECK(bloch[1][2] == "0");
    CHECK(bloch[1][3] == "1");
    // every model starts from the measured initial state
    for (std::size_t c = 4; c < bloch[1].size(); ++c) CHECK(std::stod(bloch[1][c]) == doctest::Approx((c - 4) % 3 == 2 ? 1.0 : 0.0));
  }

  // interpolation: t <= 1 gives 11 samples per experiment; extrapolation the other 10
  for (const auto& [path, want] : {std::pair{bundle.interp_histogram_path, 22L}, {bundle.extrap_histogram_path, 20L}}) {
    const auto hist = read_csv(path);
    REQUIRE(hist.size() == 61);
    CHECK(hist[0][0] == "bin_lo");
    CHECK(hist[60][1] == "0.3");
    for (std::size_t c = 2; c < hist[0].size(); ++c) {
      long total = 0;
      for (std::size_t r = 1; r < hist.size(); ++r) total += std::stol(hist[r][c]);
      CHECK(total == want);
    }
  }
  CHECK(bundle.table[0].metrics.interp_count == 22);
  // the baseline reproduces noiseless baseline data
  CHECK(bundle.table[0].metrics.interp_mean < 1e-9);

  CHECK_THROWS_AS(emit_report({}, data, dir), ValidationError);
  std::filesystem::remove_all(dir);
}

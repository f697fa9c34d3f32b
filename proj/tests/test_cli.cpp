#include "tclfit/cli.hpp"
#include "tclfit/data_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace tclfit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tclfit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream err, out;
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  const int code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  return {code, err.str() + out.str()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "tclfit_test_cli") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::vector<std::string> kQuick = {"--stage1-iters", "5", "--stage1-step", "1e-3", "--stage2-iters", "5"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);

  TempDir dir;
  REQUIRE(run({"synth", "--out", dir / "d.json", "--experiments", "1", "--duration", "1", "--sample-dt", "0.1"}).code ==
          kExitOk);
  const Run bad = run({"fit", "--data", dir / "d.json", "--out", dir / "r.json", "--model", "transformer", "--t-train", "1"});
  CHECK(bad.code == kExitUsage);
  for (const char* name : {"baseline", "lindblad", "affine", "mlp", "kl-exp", "kl-sqexp"})
    CHECK(bad.err.find(name) != std::string::npos);

  CHECK(run({"fit", "--data", dir / "d.json", "--out", dir / "r.json", "--model", "lindblad"}).code == kExitUsage);
  CHECK(run({"fit", "--data", dir / "missing.json", "--out", dir / "r.json", "--model", "lindblad", "--t-train", "1"})
            .code == kExitUsage);
  CHECK(run({"synth", "--out", dir / "no/such/dir/d.json"}).code == kExitUsage);
  CHECK(run({"--log-level", "loud", "synth", "--out", dir / "x.json", "--duration", "1"}).code != kExitOk);
}

TEST_CASE("data errors exit 2") {
  TempDir dir;
  REQUIRE(run({"synth", "--out", dir / "d.json", "--experiments", "1", "--duration", "1", "--sample-dt", "0.1"}).code ==
          kExitOk);
  nlohmann::json doc = nlohmann::json::parse(read_file(dir / "d.json"));
  doc["version"] = 2;
  write_file(dir / "v2.json", doc.dump());
  const Run v2 = run({"fit", "--data", dir / "v2.json", "--out", dir / "r.json", "--model", "lindblad", "--t-train", "1"});
  CHECK(v2.code == kExitData);

  write_file(dir / "junk.json", "{");
  CHECK(run({"fit", "--data", dir / "junk.json", "--out", dir / "r.json", "--model", "lindblad", "--t-train", "1"}).code ==
        kExitData);
  // sample_dt not a multiple of dt
  CHECK(run({"synth", "--out", dir / "e.json", "--duration", "1", "--sample-dt", "0.005"}).code == kExitData);
}

TEST_CASE("numerical failures exit 3") {
  TempDir dir;
  ModelSpec spec;
  RVector theta = RVector::Zero(6);
  theta.tail(3).setConstant(-400.0);
  write_file(dir / "bad.json", dump_model(CoefficientModel(spec, theta)));
  const Run r = run({"synth", "--out", dir / "d.json", "--truth-model", dir / "bad.json", "--experiments", "1",
                     "--duration", "1", "--sample-dt", "0.1"});
  CHECK(r.code == kExitNumerical);
}

TEST_CASE("synth, fit, simulate, evaluate and report") {
  TempDir dir;
  const std::vector<std::string> synth = {"synth",       "--out",  dir / "d.json", "--experiments", "3",
                                          "--duration",  "30",     "--sample-dt",  "0.5",           "--shots",
                                          "2000",        "--seed", "5"};
  REQUIRE(run(synth).code == kExitOk);
  const std::string first = read_file(dir / "d.json");
  REQUIRE(run(synth).code == kExitOk);
  CHECK(read_file(dir / "d.json") == first);

  // KL fit with eight terms runs both stages
  const auto kl = with({"fit", "--data", dir / "d.json", "--out", dir / "kl.json", "--model", "kl-sqexp", "--M", "8",
                        "--t-train", "25", "--seed", "3"},
                       kQuick);
  REQUIRE(run(kl).code == kExitOk);
  const FitResult klr = load_result(dir / "kl.json");
  CHECK(klr.stage1_iterations > 0);
  CHECK(klr.stage2_iterations > 0);
  CHECK(klr.model.spec().kl.terms == 8);
  CHECK(klr.t_train == 25.0);
  CHECK(klr.evaluation.metrics.interp_count == 3 * 51);
  const std::string kl_bytes = read_file(dir / "kl.json");
  REQUIRE(run(kl).code == kExitOk);
  CHECK(read_file(dir / "kl.json") == kl_bytes);

  const auto mlp = with({"fit", "--data", dir / "d.json", "--out", dir / "mlp.json", "--model", "mlp", "--nonlinear",
                         "--hidden", "4", "--t-train", "25", "--validation", "1"},
                        kQuick);
  REQUIRE(run(mlp).code == kExitOk);
  const FitResult mr = load_result(dir / "mlp.json");
  CHECK(mr.model.spec().state_dependent);
  CHECK(mr.model.spec().variant == ModelVariant::MLP);
  CHECK(equation_label(mr) == "Nonlinear TCL");
  // scored on the held-out experiment only
  CHECK(mr.evaluation.series.size() == 1);

  CHECK(run(with({"fit", "--data", dir / "d.json", "--out", dir / "x.json", "--model", "kl-exp", "--nonlinear",
                  "--t-train", "25"},
                 kQuick))
            .code != kExitOk);

  REQUIRE(run({"fit", "--data", dir / "d.json", "--out", dir / "base.json", "--model", "baseline", "--t-train", "25"})
              .code == kExitOk);
  CHECK(load_result(dir / "base.json").baseline);

  REQUIRE(run({"simulate", "--model", dir / "kl.json", "--out", dir / "sim.csv", "--amplitude", "1.0", "--duration",
               "2", "--t-end", "4"})
              .code == kExitOk);
  const std::string sim = read_file(dir / "sim.csv");
  CHECK(sim.rfind("t_us,", 0) == 0);
  CHECK(std::count(sim.begin(), sim.end(), '\n') == 1 + 101);

  REQUIRE(run({"evaluate", "--model", dir / "kl.json", "--data", dir / "d.json", "--out", dir / "ev.json"}).code ==
          kExitOk);
  CHECK(load_result(dir / "ev.json").evaluation.metrics.interp_mean ==
        doctest::Approx(klr.evaluation.metrics.interp_mean).epsilon(1e-12));

  REQUIRE(run({"report", "--data", dir / "d.json", "--results", dir / "kl.json", dir / "mlp.json", "--out",
               dir / "report"})
              .code == kExitOk);
  CHECK(fs::exists(dir / "report/metrics.csv"));
  CHECK(fs::exists(dir / "report/histogram_interpolation.csv"));
  CHECK(fs::exists(dir / "report/histogram_extrapolation.csv"));
  const std::string metrics = read_file(dir / "report/metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 4);
  CHECK(metrics.find("Baseline") < metrics.find("KL - Sq. Exp."));
  CHECK(metrics.find("KL - Sq. Exp.") < metrics.find("Nonlinear TCL"));
}

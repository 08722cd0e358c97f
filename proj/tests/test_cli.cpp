#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/dataset_io.hpp"
#include "app/units.hpp"

using namespace qmem;
using namespace qmem::app;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = QMEM_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("qmem_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return dir_ / name;
  }

  CommonOptions opts(const fs::path& config, OutputFormat format = OutputFormat::Csv) const {
    CommonOptions o;
    o.config = config;
    o.out_dir = dir_;
    o.format = format;
    return o;
  }

  // Runs the installed executable; returns its exit status.
  int run(const std::string& args) const {
    const std::string cmd = std::string(QMEM_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

json experiment(const std::string& base) { return load_json(kData / "configs" / (base + ".json")); }

}  // namespace

TEST(Units, Quantities) {
  EXPECT_DOUBLE_EQ(parse_quantity("1.4 ms", Dimension::Time, "t"), 1.4e-3);
  EXPECT_DOUBLE_EQ(parse_quantity("35us", Dimension::Time, "t"), 35e-6);
  EXPECT_DOUBLE_EQ(parse_quantity("500 kHz", Dimension::Frequency, "f"), 500e3);
  EXPECT_DOUBLE_EQ(parse_quantity("5.4 GHz", Dimension::Frequency, "f"), 5.4e9);
  EXPECT_TRUE(std::isinf(parse_quantity("inf", Dimension::Time, "t", true)));
  EXPECT_THROW(parse_quantity("inf", Dimension::Time, "t"), ConfigError);
  EXPECT_THROW(parse_quantity("1.4", Dimension::Time, "t"), ConfigError);
  EXPECT_THROW(parse_quantity("1.4 kHz", Dimension::Time, "t"), ConfigError);
  EXPECT_THROW(quantity_from_json(json(1.4e-3), Dimension::Time, "t"), ConfigError);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_sig(8.59e7, 1), "9e7");
}

TEST(Config, BudgetFixturesMatchBuiltInTables) {
  const auto same = [](const std::vector<LossChannel>& a, const std::vector<LossChannel>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].name, b[i].name);
      EXPECT_EQ(a[i].kind, b[i].kind);
      EXPECT_DOUBLE_EQ(a[i].weight, b[i].weight);
      EXPECT_EQ(a[i].quality.has_value(), b[i].quality.has_value());
      if (a[i].quality && b[i].quality) EXPECT_DOUBLE_EQ(*a[i].quality, *b[i].quality);
      EXPECT_EQ(a[i].bound, b[i].bound);
    }
  };
  same(parse_budget(load_json(kData / "budgets/table1_6061.json")), stripline_storage_channels(PackageAlloy::Al6061));
  same(parse_budget(load_json(kData / "budgets/table1_5n.json")), stripline_storage_channels(PackageAlloy::Al5N));
  same(parse_budget(load_json(kData / "budgets/three_mode_storage_6061.json")),
       three_mode_storage_channels(PackageAlloy::Al6061));
  same(parse_budget(load_json(kData / "budgets/seam_package_storage_6061.json")),
       seam_package_storage_channels(PackageAlloy::Al6061));
}

TEST(Config, StrictKeysAndRanges) {
  json j = experiment("t1_fock");
  j["device"]["cavity_T2"] = "1 ms";
  EXPECT_THROW(parse_experiment(j), ConfigError);
  j = experiment("t1_fock");
  j["device"]["nbar_th"] = 1.5;
  EXPECT_THROW(parse_experiment(j), std::exception);
  j = experiment("t1_fock");
  j["experiment"]["kind"] = "t3";
  EXPECT_THROW(parse_experiment(j), std::exception);
  const ExperimentConfig cfg = parse_experiment(experiment("t1_fock"));
  EXPECT_DOUBLE_EQ(cfg.device.cavity_T1, 1.4e-3);
  EXPECT_EQ(cfg.readout.shots, 10000);
  EXPECT_DOUBLE_EQ(*cfg.protocol.span, 7e-3);
}

TEST_F(CliTest, BudgetTable6061) {
  ASSERT_EQ(cmd_budget(opts(kData / "budgets/table1_6061.json", OutputFormat::Json), out_, err_), kExitOk)
      << err_.str();
  const json report = json::parse(slurp(dir_ / "budget.json"));
  EXPECT_EQ(report["displayed_precision_total"]["rounded"].get<double>(), 8e7);
  EXPECT_EQ(report["total"]["symbol"], "≥");
  EXPECT_EQ(report["dominant"]["names"][0], "Package conductor");
  EXPECT_NEAR(report["dominant"]["share_displayed_precision"].get<double>(), 0.785, 0.01);
  const std::vector<double> printed{3e11, 2e12, 2e10, 8e9, 9e8, 1e8, 7e8, 8e10};
  ASSERT_EQ(report["channels"].size(), printed.size());
  for (std::size_t i = 0; i < printed.size(); ++i) {
    EXPECT_EQ(report["channels"][i]["q_limit_rounded"].get<double>(), printed[i]);
  }
  EXPECT_NE(out_.str().find("8e7"), std::string::npos) << out_.str();
}

TEST_F(CliTest, BudgetTable5N) {
  ASSERT_EQ(cmd_budget(opts(kData / "budgets/table1_5n.json", OutputFormat::Json), out_, err_), kExitOk);
  EXPECT_EQ(json::parse(slurp(dir_ / "budget.json"))["displayed_precision_total"]["rounded"].get<double>(), 3e8);
}

TEST_F(CliTest, BudgetLowerBoundMarksTotal) {
  ASSERT_EQ(cmd_budget(opts(kData / "budgets/lower_bound_example.json"), out_, err_), kExitOk);
  EXPECT_NE(out_.str().find("≥"), std::string::npos) << out_.str();
  const std::string csv = slurp(dir_ / "budget.csv");
  EXPECT_NE(csv.find("total,,,,lower,"), std::string::npos) << csv;
}

TEST_F(CliTest, BudgetErrors) {
  EXPECT_EQ(cmd_budget(opts(write("empty.json", R"({"channels": []})")), out_, err_), kExitConfig);
  EXPECT_EQ(cmd_budget(opts(write("bad.json", R"({"channels": [{"name": "x", "kind": "participation",
      "p": 2.0, "q": 10, "bound": "exact"}]})")),
                       out_, err_),
            kExitConfig);
  std::ostringstream err;
  EXPECT_EQ(cmd_budget(opts(write("syntax.json", "{\n  \"channels\": [\n    {,\n  ]\n}\n")), out_, err), kExitConfig);
  EXPECT_NE(err.str().find("line 3"), std::string::npos) << err.str();
  EXPECT_EQ(cmd_budget(opts(dir_ / "missing.json"), out_, err_), kExitConfig);
}

TEST_F(CliTest, SimulateThenFitFock) {
  ASSERT_EQ(cmd_simulate(opts(kData / "configs/t1_fock.json"), out_, err_), kExitOk) << err_.str();
  const Dataset ds = load_dataset(dir_ / "t1_fock.csv");
  EXPECT_EQ(ds.sweep_values.size(), 41u);
  EXPECT_EQ(ds.shots_per_point, 10000);
  EXPECT_TRUE(fs::exists(dir_ / "t1_fock.svg"));
  CommonOptions o = opts({}, OutputFormat::Json);
  ASSERT_EQ(cmd_fit(o, dir_ / "t1_fock.csv", "single_exp", out_, err_), kExitOk) << err_.str();
  const json f = json::parse(slurp(dir_ / "fit_single_exp.json"));
  EXPECT_TRUE(f["converged"].get<bool>());
  EXPECT_NEAR(f["params"]["T1"].get<double>() / 1.4e-3, 1.0, 0.02);
  EXPECT_GE(f["stderr"]["T1"].get<double>(), 0.0);
}

TEST_F(CliTest, DatasetRoundTripsInBothFormats) {
  ASSERT_EQ(cmd_simulate(opts(kData / "configs/t1_coherent.json"), out_, err_), kExitOk) << err_.str();
  ASSERT_EQ(cmd_simulate(opts(kData / "configs/t1_coherent.json", OutputFormat::Json), out_, err_), kExitOk);
  const Dataset a = load_dataset(dir_ / "t1_coherent.csv");
  const Dataset b = load_dataset(dir_ / "t1_coherent.json");
  EXPECT_EQ(a.sweep_values, b.sweep_values);
  EXPECT_EQ(a.probability, b.probability);
  EXPECT_EQ(a.shot_fraction, b.shot_fraction);
  EXPECT_EQ(dataset_to_csv(a), slurp(dir_ / "t1_coherent.csv"));
  // First point: vacuum weight of |sqrt 2>.
  const ExperimentConfig cfg = parse_experiment(experiment("t1_coherent"));
  EXPECT_NEAR(a.probability[0], cfg.readout.baseline + cfg.readout.contrast * std::exp(-2.0), 1e-9);
}

TEST_F(CliTest, SimulateRejectsEmptySweeps) {
  json j = experiment("t1_fock");
  j["experiment"]["points"] = 0;
  EXPECT_EQ(cmd_simulate(opts(write("zero.json", j.dump())), out_, err_), kExitConfig);
  j = experiment("t1_fock");
  j["experiment"]["span"] = "0 ms";
  EXPECT_EQ(cmd_simulate(opts(write("span.json", j.dump())), out_, err_), kExitConfig);
}

TEST_F(CliTest, FlatDataFailsFit) {
  std::string csv = "delay,probability\n";
  for (int i = 0; i < 20; ++i) csv += std::to_string(i * 1e-4) + ",0.5\n";
  EXPECT_EQ(cmd_fit(opts({}), write("flat.csv", csv), "single_exp", out_, err_), kExitFit);
  EXPECT_FALSE(fs::exists(dir_ / "fit_single_exp.csv"));
}

TEST_F(CliTest, MalformedDatasetReportsLine) {
  std::ostringstream err;
  EXPECT_EQ(cmd_fit(opts({}), write("bad.csv", "delay,probability\n0,1\n1e-4,abc\n"), "single_exp", out_, err),
            kExitConfig);
  EXPECT_NE(err.str().find("3"), std::string::npos) << err.str();
  EXPECT_EQ(cmd_fit(opts({}), write("ok.csv", "delay,probability\n0,1\n1e-4,0.5\n"), "cubic", out_, err_),
            kExitConfig);
}

TEST_F(CliTest, RamseyGivesTwiceT1) {
  json j = experiment("t2_ramsey");
  j["readout"]["shots"] = nullptr;
  ASSERT_EQ(cmd_simulate(opts(write("ramsey.json", j.dump())), out_, err_), kExitOk) << err_.str();
  ASSERT_EQ(cmd_fit(opts({}, OutputFormat::Json), dir_ / "t2_ramsey.csv", "ramsey_fringe", out_, err_), kExitOk)
      << err_.str();
  const json f = json::parse(slurp(dir_ / "fit_ramsey_fringe.json"));
  const double t1 = parse_experiment(j).device.cavity_T1;
  EXPECT_NEAR(f["params"]["T2"].get<double>() / (2 * t1), 1.0, 0.05);
}

TEST_F(CliTest, WignerMaps) {
  ASSERT_EQ(cmd_wigner(opts(kData / "configs/wigner_vacuum.json", OutputFormat::Json), out_, err_), kExitOk)
      << err_.str();
  ASSERT_EQ(cmd_wigner(opts(kData / "configs/wigner_fock1.json", OutputFormat::Json), out_, err_), kExitOk);
  ASSERT_EQ(cmd_wigner(opts(kData / "configs/wigner_superposition.json"), out_, err_), kExitOk);
  const json vac = json::parse(slurp(dir_ / "wigner_vacuum.json"));
  const json one = json::parse(slurp(dir_ / "wigner_fock1.json"));
  const auto centre = [](const json& g) {
    const std::size_t n = g["w"].size();
    return g["w"][n / 2][n / 2].get<double>();
  };
  EXPECT_NEAR(centre(vac), 2 / std::numbers::pi, 1e-6);
  EXPECT_NEAR(centre(one), -2 / std::numbers::pi, 1e-6);
  double vmax = -1.0;
  for (const auto& row : vac["w"]) {
    for (const auto& v : row) vmax = std::max(vmax, v.get<double>());
  }
  EXPECT_EQ(vmax, centre(vac));

  // CSV grid: re,im,w. The superposition is mirror-symmetric in Im but not in Re.
  std::istringstream csv(slurp(dir_ / "wigner_superposition.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "re,im,w");
  std::map<std::pair<long, long>, double> w;
  while (std::getline(csv, line)) {
    double re = 0, im = 0, v = 0;
    char c1 = 0, c2 = 0;
    std::istringstream(line) >> re >> c1 >> im >> c2 >> v;
    w[{std::lround(re * 1000), std::lround(im * 1000)}] = v;
  }
  EXPECT_EQ(w.size(), 61u * 61u);
  double re_asym = 0.0, im_asym = 0.0;
  for (const auto& [k, v] : w) {
    re_asym = std::max(re_asym, std::abs(v - w.at({-k.first, k.second})));
    im_asym = std::max(im_asym, std::abs(v - w.at({k.first, -k.second})));
  }
  EXPECT_GT(std::max(re_asym, im_asym), 0.1);
  EXPECT_LT(std::min(re_asym, im_asym), 0.02);
  EXPECT_NE(slurp(dir_ / "wigner_superposition.svg").find("<svg"), std::string::npos);
}

TEST_F(CliTest, WignerTruncationGuard) {
  json j = experiment("wigner_vacuum");
  j["hilbert"]["n_cav"] = 10;
  EXPECT_EQ(cmd_wigner(opts(write("guard.json", j.dump())), out_, err_), kExitConfig);
}

TEST_F(CliTest, PipelineRowsAndOutputs) {
  ASSERT_EQ(cmd_pipeline(opts(kData / "configs/pipeline.json", OutputFormat::Json), out_, err_), kExitOk)
      << err_.str();
  const json report = json::parse(slurp(dir_ / "pipeline.json"));
  const json& rows = report["rows"];
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0]["T1C"]["value"].get<double>() / 1.4e-3, 1.0, 0.05);
  EXPECT_NEAR(rows[0]["T2"]["value"].get<double>() / 2.8e-3, 1.0, 0.05);
  EXPECT_NEAR(rows[0]["nbar"].get<double>(), 0.05, 0.002);
  EXPECT_NEAR(rows[1]["T2"]["value"].get<double>() / 0.2e-3, 1.0, 0.05);
  EXPECT_EQ(rows[1]["status"], "ok");
}

TEST_F(CliTest, PipelineRejectsEmptyDeviceList) {
  json j = load_json(kData / "configs/pipeline.json");
  j["devices"] = json::array();
  EXPECT_EQ(cmd_pipeline(opts(write("empty.json", j.dump())), out_, err_), kExitConfig);
}

TEST_F(CliTest, ExecutableExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("budget"), kExitConfig);
  EXPECT_EQ(run("frobnicate"), kExitConfig);
  EXPECT_EQ(run("budget --config " + (kData / "budgets/table1_6061.json").string() + " --out " + dir_.string()),
            kExitOk);
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("Package conductor"), std::string::npos);
  EXPECT_EQ(run("simulate --config " + (kData / "configs/t1_fock.json").string() + " --shots zero"), kExitConfig);
  EXPECT_EQ(run("budget --config " + (kData / "budgets/table1_6061.json").string() + " --format xml"), kExitConfig);
}

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRuns) {
  const fs::path cfg = kData / "configs/t1_coherent.json";
  const std::string args = "simulate --config " + cfg.string() + " --seed 11 --out " + dir_.string();
  ASSERT_EQ(run(args), kExitOk);
  const std::string first = slurp(dir_ / "t1_coherent.csv");
  const std::string first_svg = slurp(dir_ / "t1_coherent.svg");
  ASSERT_EQ(run(args), kExitOk);
  EXPECT_EQ(first, slurp(dir_ / "t1_coherent.csv"));
  EXPECT_EQ(first_svg, slurp(dir_ / "t1_coherent.svg"));
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --seed 12 --out " + dir_.string()), kExitOk);
  EXPECT_NE(first, slurp(dir_ / "t1_coherent.csv"));
}

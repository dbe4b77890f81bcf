#include "cli/commands.hpp"
#include "cli/config.hpp"

#include "mfm/errors.hpp"
#include "mfm/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace mfm::cli {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mfm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MFM_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_config(const fs::path& dir, const std::string& name = "fig1a") {
  ExperimentConfig c = preset(name);
  c.seed = 5;
  c.synth.d = 20;
  c.synth.k = 2;
  c.n_train = 1200;
  c.n_test = 400;
  c.train.iterations = 30;
  c.out_dir = dir;
  return c;
}

TEST(Config, PresetsMatchExperiments) {
  const auto a = preset("fig1a");
  EXPECT_EQ(a.synth.d, 100);
  EXPECT_EQ(a.synth.k, 5);
  EXPECT_EQ(a.n_train, 15000);
  EXPECT_EQ(a.n_test, 10000);
  EXPECT_EQ(a.synth.m_star_form, MStarForm::PsdMinusDiag);
  EXPECT_EQ(a.synth.x_dist, FeatureDistribution::Gaussian);
  EXPECT_FALSE(a.synth.flip_labels);
  EXPECT_TRUE(preset("fig1b").synth.flip_labels);
  EXPECT_EQ(preset("fig1c").synth.m_star_form, MStarForm::AsymMinusDiag);
  EXPECT_THROW(preset("fig9"), ValidationError);
}

TEST(Config, JsonOverlayAndUnknownKeys) {
  ExperimentConfig c = preset("fig1a");
  apply_json(c, nlohmann::json::parse(R"({"seed": 9, "synth": {"d": 12, "x_dist": "rademacher"},
                                            "train": {"variant": "gfm", "k": 3, "sampling_mode": "fresh"}})"));
  EXPECT_EQ(*c.seed, 9u);
  EXPECT_EQ(c.synth.d, 12);
  EXPECT_EQ(c.synth.x_dist, FeatureDistribution::Rademacher);
  EXPECT_EQ(c.train.variant, Variant::GFM);
  EXPECT_TRUE(c.k_set);
  EXPECT_EQ(c.train.sampling_mode, SamplingMode::FreshBatches);
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"synth": {"dd": 1}})")), ValidationError);
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"train": {"k": "five"}})")), ValidationError);

  ExperimentConfig round = preset("custom");
  apply_json(round, to_json(c));
  EXPECT_EQ(to_json(round), to_json(c));
}

TEST(Config, ModelRankDefaultsToIdentifiable) {
  ExperimentConfig c = preset("fig1c");
  c.synth.d = 20;
  c.synth.k = 2;
  c.synth.seed = 1;
  const auto truth = gen_truth(c.synth);
  EXPECT_EQ(model_rank(c, truth), 4);
  c.k_set = true;
  c.train.k = 2;
  EXPECT_EQ(model_rank(c, truth), 2);
}

TEST(Config, SeedRequired) {
  ExperimentConfig c = preset("fig1a");
  EXPECT_THROW(require_seed(c), ValidationError);
}

TEST(Commands, GenTrainEvalRoundTrip) {
  const auto dir = temp_dir("roundtrip");
  auto c = small_config(dir);
  cmd_gen(c, true);
  for (const char* f : {"train.mfm", "test.mfm", "truth_model.mfm", "train.csv", "config.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto truth_eval = cmd_eval(dir / "truth_model.mfm", dir / "test.mfm", dir / "eval.json");
  EXPECT_LE(truth_eval["rmse"].get<double>(), 1e-8);

  ModelState zero = io::load_model(dir / "truth_model.mfm");
  zero.w.setZero();
  zero.v.setZero();
  io::save_model(dir / "zero.mfm", zero);
  const auto z = cmd_eval(dir / "zero.mfm", dir / "test.mfm", std::nullopt);
  const auto test = io::load_dataset(dir / "test.mfm").batch;
  const double rms_y = std::sqrt(test.y.squaredNorm() / static_cast<double>(test.size()));
  EXPECT_NEAR(z["rmse"].get<double>(), rms_y, 1e-12);
  EXPECT_NEAR(z["rmse"].get<double>() / testing::std_dev(test.y), 1.0, 0.02);

  TrainPaths paths{dir / "train.mfm", dir / "test.mfm", dir / "model.mfm", dir / "trace.csv"};
  const auto r = cmd_train(c, paths);
  const double in_memory = rmse(predict(r.state, test.x), test.y);
  const auto loaded = cmd_eval(dir / "model.mfm", dir / "test.mfm", std::nullopt);
  EXPECT_NEAR(loaded["rmse"].get<double>(), in_memory, 1e-12);
  EXPECT_NEAR(in_memory, *r.trace.back().test_rmse, 1e-12);
}

TEST(Commands, TraceIsByteIdenticalInDeterministicMode) {
  const auto dir = temp_dir("determinism");
  auto c = small_config(dir);
  cmd_gen(c, false);
  TrainPaths p1{dir / "train.mfm", dir / "test.mfm", dir / "m1.mfm", dir / "t1.csv"};
  TrainPaths p2{dir / "train.mfm", dir / "test.mfm", dir / "m2.mfm", dir / "t2.csv"};
  cmd_train(c, p1);
  cmd_train(c, p2);
  EXPECT_EQ(slurp(dir / "t1.csv"), slurp(dir / "t2.csv"));
  EXPECT_EQ(slurp(dir / "m1.mfm"), slurp(dir / "m2.mfm"));
  EXPECT_NE(slurp(dir / "t1.csv").find("iteration,test_rmse,recovery_error,sin_theta,wall_ms"),
            std::string::npos);
}

TEST(Commands, ZeroIterationsWritesOneRow) {
  const auto dir = temp_dir("zero_iter");
  auto c = small_config(dir);
  cmd_gen(c, false);
  c.train.iterations = 0;
  TrainPaths p{dir / "train.mfm", dir / "test.mfm", dir / "m.mfm", dir / "t.csv"};
  cmd_train(c, p);
  const std::string csv = slurp(dir / "t.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Commands, FlippedLabelsSeparateTheModels) {
  const auto dir = temp_dir("flip");
  auto c = small_config(dir, "fig1b");
  c.train.iterations = 100;
  const auto summary = cmd_experiment(c);
  EXPECT_LE(summary["ifm"]["final_rmse_over_std"].get<double>(), 0.05);
  EXPECT_GE(summary["fm"]["final_rmse_over_std"].get<double>(), 0.5);
  EXPECT_TRUE(fs::exists(dir / "ifm_trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "fm_trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  // Flipped labels carry no recovery error column values.
  const std::string csv = slurp(dir / "ifm_trace.csv");
  EXPECT_NE(csv.find(",,,0\n"), std::string::npos);
}

TEST(Commands, FreshSamplingFromDatasetTruth) {
  const auto dir = temp_dir("fresh");
  auto c = small_config(dir);
  cmd_gen(c, false);
  c.train.sampling_mode = SamplingMode::FreshBatches;
  c.train.iterations = 20;
  TrainPaths p{dir / "train.mfm", dir / "test.mfm", dir / "m.mfm", dir / "t.csv"};
  const auto r = cmd_train(c, p);
  EXPECT_LT(*r.trace.back().recovery_error, 1e-3 * *r.trace.front().recovery_error);
}

TEST(Commands, DiagnoseWritesReports) {
  const auto dir = temp_dir("diagnose");
  ExperimentConfig c = preset("bernoulli");
  c.seed = 3;
  c.out_dir = dir;
  const auto j = cmd_diagnose(c);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "bernoulli.json"));
  EXPECT_TRUE(fs::exists(dir / "bernoulli.csv"));

  ExperimentConfig m = preset("moments");
  m.seed = 4;
  m.out_dir = dir;
  m.diagnostics.d = 10;
  m.diagnostics.n_list = {500, 2000};
  m.diagnostics.trials = 20;
  const auto mj = cmd_diagnose(m);
  EXPECT_EQ(mj["reports"].size(), 4u);
  const std::string csv = slurp(dir / "moments.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "operator,n,mean_error,ratio_n_vs_4n,trials");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 2);
}

TEST(Config, CommittedFilesLoad) {
  const fs::path dir = MFM_CONFIG_DIR;
  const auto a = load_config(dir / "fig1a.json");
  EXPECT_EQ(a.synth.d, 100);
  EXPECT_EQ(a.train.iterations, 200);
  EXPECT_TRUE(load_config(dir / "fig1b.json").synth.flip_labels);
  EXPECT_EQ(load_config(dir / "fig1c.json").synth.m_star_form, MStarForm::AsymMinusDiag);
  const auto d = load_config(dir / "diagnostics.json");
  EXPECT_EQ(d.diagnostics.trials, 20);
  EXPECT_DOUBLE_EQ(d.diagnostics.band.lo, 1.3);
  EXPECT_DOUBLE_EQ(d.diagnostics.band.hi, 3.1);
  EXPECT_EQ(d.diagnostics.elim_trials, 50);
}

TEST(Binary, ExitCodes) {
  const auto dir = temp_dir("binary");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("gen --out " + dir.string()), 2);  // missing --seed
  EXPECT_EQ(run_cli("gen --seed 1 --bogus"), 2);
  EXPECT_EQ(run_cli("eval --model " + (dir / "none.mfm").string() + " --data " +
                    (dir / "none.mfm").string()),
            1);
  ASSERT_EQ(run_cli("gen --seed 2 --d 10 --truth-k 2 --n-train 300 --n-test 50 --dist rademacher --out " +
                    dir.string()),
            0);
  // gFM cannot eliminate moments of +-1 features.
  EXPECT_EQ(run_cli("train --seed 2 --variant gfm --iterations 2 --data " + (dir / "train.mfm").string() +
                    " --model-out " + (dir / "m.mfm").string() + " --trace-out " + (dir / "t.csv").string()),
            3);
  EXPECT_EQ(run_cli("train --seed 2 --variant ifm --iterations 2 --data " + (dir / "train.mfm").string() +
                    " --model-out " + (dir / "m.mfm").string() + " --trace-out " + (dir / "t.csv").string()),
            0);
  EXPECT_EQ(run_cli("diagnose --seed 1 --kind nope --out " + dir.string()), 2);
}

TEST(Binary, ConfigFileWithFlagOverride) {
  const auto dir = temp_dir("cfgfile");
  std::ofstream(dir / "c.json") << R"({"name": "fig1a", "seed": 3,
    "synth": {"d": 12, "k": 2, "n_train": 400, "n_test": 100},
    "output": {"dir": ")" << (dir / "ignored").string() << R"("}})";
  ASSERT_EQ(run_cli("gen --config " + (dir / "c.json").string() + " --d 8 --out " + (dir / "o").string()), 0);
  EXPECT_FALSE(fs::exists(dir / "ignored"));
  const auto data = io::load_dataset(dir / "o" / "train.mfm");
  EXPECT_EQ(data.batch.dim(), 8);
  EXPECT_EQ(data.batch.size(), 400);
}

}  // namespace
}  // namespace mfm::cli

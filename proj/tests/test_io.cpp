#include "mfm/errors.hpp"
#include "mfm/io.hpp"
#include "mfm/synth.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <cstring>

namespace mfm {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mfm_io_" + name);
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

TEST(Io, DatasetRoundTripWithTruth) {
  const auto dir = temp_dir("dataset");
  SynthSpec spec;
  spec.d = 9;
  spec.k = 2;
  spec.m_star_form = MStarForm::AsymMinusDiag;
  spec.seed = 3;
  const auto truth = gen_truth(spec);
  const auto batch = gen_batch(truth, spec, 17, streams::kTrain);
  io::save_dataset(dir / "d.mfm", batch, &truth, true);
  const auto back = io::load_dataset(dir / "d.mfm");
  EXPECT_EQ((back.batch.x - batch.x).norm(), 0.0);
  EXPECT_EQ((back.batch.y - batch.y).norm(), 0.0);
  EXPECT_TRUE(back.labels_flipped);
  ASSERT_TRUE(back.truth.has_value());
  EXPECT_EQ((back.truth->m_star - truth.m_star).norm(), 0.0);
  EXPECT_EQ((back.truth->w_star - truth.w_star).norm(), 0.0);
  EXPECT_EQ((back.truth->factor_basis - truth.factor_basis).norm(), 0.0);
  EXPECT_EQ((back.truth->left - truth.left).norm(), 0.0);
  EXPECT_EQ((back.truth->right - truth.right).norm(), 0.0);
  EXPECT_EQ((back.truth->singular_values - truth.singular_values).norm(), 0.0);
  EXPECT_EQ(back.truth->zero_diagonal, truth.zero_diagonal);
}

TEST(Io, DatasetWithoutTruth) {
  const auto dir = temp_dir("plain");
  Batch b{testing::random_matrix(1, 3, 4), testing::random_vector(2, 4)};
  io::save_dataset(dir / "p.mfm", b);
  const auto back = io::load_dataset(dir / "p.mfm");
  EXPECT_FALSE(back.truth.has_value());
  EXPECT_FALSE(back.labels_flipped);
  EXPECT_EQ((back.batch.x - b.x).norm(), 0.0);
}

TEST(Io, ModelRoundTripIsIdentity) {
  const auto dir = temp_dir("model");
  ModelState s;
  s.variant = Variant::GFM;
  s.w = testing::random_vector(1, 6);
  s.u_bar = testing::random_matrix(2, 6, 3);
  s.v = testing::random_matrix(3, 6, 3);
  s.iteration = 42;
  io::save_model(dir / "m.mfm", s);
  const auto back = io::load_model(dir / "m.mfm");
  EXPECT_EQ(back.variant, s.variant);
  EXPECT_EQ(back.iteration, 42);
  EXPECT_EQ((back.w - s.w).norm(), 0.0);
  EXPECT_EQ((back.u_bar - s.u_bar).norm(), 0.0);
  EXPECT_EQ((back.v - s.v).norm(), 0.0);
  io::save_model(dir / "m2.mfm", back);
  EXPECT_EQ(slurp(dir / "m.mfm"), slurp(dir / "m2.mfm"));

  ModelState fm = s;
  fm.variant = Variant::FMBaseline;
  fm.v = Mat::Zero(6, 0);
  io::save_model(dir / "fm.mfm", fm);
  EXPECT_EQ(io::load_model(dir / "fm.mfm").v.cols(), 0);
}

TEST(Io, RejectsWrongKindAndCorruption) {
  const auto dir = temp_dir("bad");
  Batch b{testing::random_matrix(1, 3, 4), testing::random_vector(2, 4)};
  io::save_dataset(dir / "d.mfm", b);
  EXPECT_THROW(io::load_model(dir / "d.mfm"), IoError);
  std::string bytes = slurp(dir / "d.mfm");
  std::ofstream(dir / "trunc.mfm", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(io::load_dataset(dir / "trunc.mfm"), IoError);
  bytes[0] = 'X';
  std::ofstream(dir / "magic.mfm", std::ios::binary) << bytes;
  EXPECT_THROW(io::load_dataset(dir / "magic.mfm"), IoError);
  EXPECT_THROW(io::load_dataset(dir / "missing.mfm"), IoError);
}

TEST(Io, HeaderLayout) {
  const auto dir = temp_dir("layout");
  Batch b{testing::random_matrix(1, 3, 4), testing::random_vector(2, 4)};
  io::save_dataset(dir / "d.mfm", b);
  const std::string bytes = slurp(dir / "d.mfm");
  EXPECT_EQ(bytes.substr(0, 4), "MFM1");
  // magic + kind + d + n + k + variant + flags, then X and y.
  EXPECT_EQ(bytes.size(), 4u + 4 + 8 + 8 + 8 + 4 + 4 + 8 * (12 + 4));
  std::uint64_t d = 0;
  std::memcpy(&d, bytes.data() + 8, 8);
  EXPECT_EQ(d, 3u);
}

TEST(Io, CsvExports) {
  const auto dir = temp_dir("csv");
  Batch b{Mat::Identity(2, 2), Vec::Ones(2)};
  io::export_csv(dir / "b.csv", b);
  EXPECT_EQ(slurp(dir / "b.csv"), "x0,x1,y\n1,0,1\n0,1,1\n");

  std::vector<TraceRecord> trace(2);
  trace[0].iteration = 0;
  trace[0].test_rmse = 0.5;
  trace[0].wall_ms = 3.25;
  trace[1].iteration = 1;
  trace[1].test_rmse = 0.25;
  trace[1].recovery_error = 0.125;
  trace[1].sin_theta = 0.0625;
  io::write_trace_csv(dir / "t.csv", trace, false);
  EXPECT_EQ(slurp(dir / "t.csv"),
            "iteration,test_rmse,recovery_error,sin_theta,wall_ms\n0,0.5,,,3.25\n1,0.25,0.125,0.0625,0\n");
  io::write_trace_csv(dir / "z.csv", trace, true);
  EXPECT_EQ(slurp(dir / "z.csv").find("3.25"), std::string::npos);
}

}  // namespace
}  // namespace mfm

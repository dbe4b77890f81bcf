#include "cli/commands.hpp"
#include "cli/config.hpp"

#include "mfm/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using mfm::cli::ExperimentConfig;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// Flag values; unset flags leave the JSON/preset value alone.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<mfm::Index> d, k_truth, n_train, n_test;
  std::optional<std::string> form, dist;
  std::optional<bool> flip;
  std::optional<double> noise;
  std::optional<std::string> variant, sampling;
  std::optional<mfm::Index> k, batch_size;
  std::optional<int> iterations;
  std::optional<double> tau_min, lr, init_scale, stop_relative;
  std::optional<bool> as_printed, early_stop, deterministic;
  std::optional<int> trials;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--deterministic,!--wall-time", o.deterministic,
                "zero the wall_ms trace column (default on)");
}

void add_synth(CLI::App* app, Overrides& o) {
  app->add_option("--preset", o.preset, "fig1a|fig1b|fig1c|custom");
  app->add_option("--d", o.d, "feature dimension");
  app->add_option("--truth-k", o.k_truth, "rank parameter of the planted model");
  app->add_option("--n-train", o.n_train, "training instances");
  app->add_option("--n-test", o.n_test, "test instances");
  app->add_option("--form", o.form, "psd-minus-diag|asym-minus-diag|general-low-rank|sym-low-rank");
  app->add_option("--dist", o.dist, "gaussian|rademacher|uniform");
  app->add_flag("--flip,!--no-flip", o.flip, "negate labels");
  app->add_option("--noise", o.noise, "label noise standard deviation");
}

void add_train(CLI::App* app, Overrides& o) {
  app->add_option("--variant", o.variant, "gfm|ifm|fm-baseline");
  app->add_option("--k", o.k, "model rank");
  app->add_option("--iterations", o.iterations, "iterations T");
  app->add_option("--batch-size", o.batch_size, "instances per step (0 = all)");
  app->add_option("--sampling", o.sampling, "fixed|fresh");
  app->add_option("--tau-min", o.tau_min, "moment gate threshold");
  app->add_option("--lr", o.lr, "FM-baseline learning rate");
  app->add_option("--init-scale", o.init_scale, "FM-baseline init scale");
  app->add_option("--stop-relative-error", o.stop_relative, "stop once eps_t < value * eps_0");
  app->add_flag("--as-printed", o.as_printed, "omit the trace correction of the gFM map");
  app->add_flag("--early-stop", o.early_stop, "stop when test RMSE stalls");
}

ExperimentConfig resolve(const Overrides& o, const std::string& default_name) {
  ExperimentConfig c = o.config ? mfm::cli::load_config(*o.config) : mfm::cli::preset(default_name);
  if (o.preset) {
    // A preset replaces the base; the config file then overlays it.
    c = mfm::cli::preset(*o.preset);
    if (o.config) {
      std::ifstream in(*o.config);
      auto j = nlohmann::json::parse(in);
      j.erase("name");
      mfm::cli::apply_json(c, j);
    }
  }
  nlohmann::json j;
  if (o.seed) j["seed"] = *o.seed;
  if (o.d) j["synth"]["d"] = *o.d;
  if (o.k_truth) j["synth"]["k"] = *o.k_truth;
  if (o.n_train) j["synth"]["n_train"] = *o.n_train;
  if (o.n_test) j["synth"]["n_test"] = *o.n_test;
  if (o.form) j["synth"]["m_star_form"] = *o.form;
  if (o.dist) j["synth"]["x_dist"] = *o.dist;
  if (o.flip) j["synth"]["flip_labels"] = *o.flip;
  if (o.noise) j["synth"]["noise_std"] = *o.noise;
  if (o.variant) j["train"]["variant"] = *o.variant;
  if (o.k) j["train"]["k"] = *o.k;
  if (o.iterations) j["train"]["iterations"] = *o.iterations;
  if (o.batch_size) j["train"]["batch_size"] = *o.batch_size;
  if (o.sampling) j["train"]["sampling_mode"] = *o.sampling;
  if (o.tau_min) j["train"]["tau_min"] = *o.tau_min;
  if (o.lr) j["train"]["learning_rate"] = *o.lr;
  if (o.init_scale) j["train"]["init_scale"] = *o.init_scale;
  if (o.stop_relative) j["train"]["stop_relative_error"] = *o.stop_relative;
  if (o.as_printed && *o.as_printed) j["train"]["trace_correction"] = "as-printed";
  if (o.early_stop) j["train"]["early_stop"] = *o.early_stop;
  if (o.trials) j["diagnostics"]["trials"] = *o.trials;
  if (o.out) j["output"]["dir"] = *o.out;
  if (o.deterministic) j["output"]["deterministic"] = *o.deterministic;
  if (!j.is_null()) mfm::cli::apply_json(c, j);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfm: factorization machines by alternating moment-eliminated descent"};
  app.require_subcommand(1);

  Overrides o;
  bool write_csv = false;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset and its planted model");
  add_common(gen, o);
  add_synth(gen, o);
  gen->add_flag("--csv", write_csv, "also export train.csv");

  mfm::cli::TrainPaths paths;
  std::optional<std::string> test_path;
  auto* train = app.add_subcommand("train", "train a model on a dataset file");
  add_common(train, o);
  add_train(train, o);
  train->add_option("--data", paths.train_data, "training dataset (.mfm)")->required();
  train->add_option("--test", test_path, "held-out dataset (.mfm)");
  train->add_option("--model-out", paths.model_out, "model file to write");
  train->add_option("--trace-out", paths.trace_out, "trace CSV to write");

  std::string model_path, data_path;
  std::optional<std::string> eval_out;
  auto* eval = app.add_subcommand("eval", "RMSE of a model on a dataset");
  eval->add_option("--model", model_path, "model file")->required();
  eval->add_option("--data", data_path, "dataset file")->required();
  eval->add_option("--out", eval_out, "JSON file to write");

  std::optional<std::string> kind;
  auto* diagnose = app.add_subcommand("diagnose", "Monte-Carlo checks: rip|elim|bernoulli|moments");
  add_common(diagnose, o);
  diagnose->add_option("--kind", kind, "rip|elim|bernoulli|moments");
  diagnose->add_option("--trials", o.trials, "trials per sample size");
  diagnose->add_option("--dist", o.dist, "feature distribution");

  auto* experiment = app.add_subcommand("experiment", "paired iFM / FM-baseline run of a named setting");
  add_common(experiment, o);
  add_synth(experiment, o);
  add_train(experiment, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) {
      const ExperimentConfig c = resolve(o, "fig1a");
      mfm::cli::require_seed(c);
      mfm::cli::cmd_gen(c, write_csv);
      std::cout << "wrote " << (c.out_dir / "train.mfm").string() << ", test.mfm, truth_model.mfm\n";
    } else if (*train) {
      if (test_path) paths.test_data = *test_path;
      const ExperimentConfig c = resolve(o, "custom");
      mfm::cli::require_seed(c);
      const auto r = mfm::cli::cmd_train(c, paths);
      const auto& last = r.trace.back();
      std::cout << "iterations " << last.iteration;
      if (last.test_rmse) std::cout << "  test_rmse " << *last.test_rmse;
      if (last.recovery_error) std::cout << "  recovery_error " << *last.recovery_error;
      std::cout << '\n';
    } else if (*eval) {
      std::optional<std::filesystem::path> out;
      if (eval_out) out = *eval_out;
      std::cout << mfm::cli::cmd_eval(model_path, data_path, out).dump(2) << '\n';
    } else if (*diagnose) {
      ExperimentConfig c = resolve(o, kind.value_or("rip"));
      if (kind) c.name = *kind;
      if (o.dist) c.diagnostics.x_dist = mfm::parse_distribution(*o.dist);
      mfm::cli::require_seed(c);
      const auto j = mfm::cli::cmd_diagnose(c);
      std::cout << j.dump(2) << '\n';
    } else if (*experiment) {
      const ExperimentConfig c = resolve(o, "fig1a");
      mfm::cli::require_seed(c);
      std::cout << mfm::cli::cmd_experiment(c).dump(2) << '\n';
    }
  } catch (const mfm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case mfm::ErrorKind::Validation: return kExitValidation;
      case mfm::ErrorKind::Numerical: return kExitNumerical;
      case mfm::ErrorKind::Io: return kExitOther;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid config: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOk;
}

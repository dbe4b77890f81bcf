#include "cli/config.hpp"

#include "mfm/errors.hpp"

#include <fstream>
#include <set>

namespace mfm::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ValidationError("config: unknown key '" + where + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::string text(const json& j, const char* key) {
  std::string s;
  read(j, key, s);
  return s;
}

SamplingMode parse_sampling(const std::string& s) {
  if (s == "fixed") return SamplingMode::FixedDatasetCycling;
  if (s == "fresh") return SamplingMode::FreshBatches;
  throw ValidationError("unknown sampling mode '" + s + "' (fixed|fresh)");
}

const char* sampling_name(SamplingMode m) {
  return m == SamplingMode::FreshBatches ? "fresh" : "fixed";
}

}  // namespace

bool is_diagnostic_name(const std::string& name) {
  return name == "rip" || name == "elim" || name == "bernoulli" || name == "moments";
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "fig1a" || name == "custom" || is_diagnostic_name(name)) return c;
  if (name == "fig1b") {
    c.synth.flip_labels = true;
    return c;
  }
  if (name == "fig1c") {
    c.synth.m_star_form = MStarForm::AsymMinusDiag;
    return c;
  }
  throw ValidationError("unknown experiment name '" + name +
                        "' (fig1a|fig1b|fig1c|custom|rip|elim|bernoulli|moments)");
}

void apply_json(ExperimentConfig& c, const json& j) {
  reject_unknown(j, {"name", "seed", "synth", "train", "diagnostics", "output"}, "");
  if (j.contains("name")) {
    const std::string name = text(j, "name");
    preset(name);  // validates
    c.name = name;
  }
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    read(j, "seed", s);
    c.seed = s;
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    reject_unknown(s, {"d", "k", "m_star_form", "x_dist", "flip_labels", "noise_std", "n_train",
                       "n_test"}, "synth.");
    read(s, "d", c.synth.d);
    read(s, "k", c.synth.k);
    if (s.contains("m_star_form")) c.synth.m_star_form = parse_m_star_form(text(s, "m_star_form"));
    if (s.contains("x_dist")) c.synth.x_dist = parse_distribution(text(s, "x_dist"));
    read(s, "flip_labels", c.synth.flip_labels);
    read(s, "noise_std", c.synth.noise_std);
    read(s, "n_train", c.n_train);
    read(s, "n_test", c.n_test);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"variant", "k", "iterations", "batch_size", "sampling_mode", "tau_min",
                       "trace_correction", "moment_batch", "learning_rate", "init_scale",
                       "halve_on_divergence", "early_stop", "stop_relative_error"}, "train.");
    if (t.contains("variant")) c.train.variant = parse_variant(text(t, "variant"));
    if (t.contains("k")) {
      read(t, "k", c.train.k);
      c.k_set = true;
    }
    read(t, "iterations", c.train.iterations);
    read(t, "batch_size", c.train.batch_size);
    if (t.contains("sampling_mode")) c.train.sampling_mode = parse_sampling(text(t, "sampling_mode"));
    read(t, "tau_min", c.train.tau_min);
    if (t.contains("trace_correction")) {
      const std::string s = text(t, "trace_correction");
      if (s == "corrected") c.train.trace_correction = TraceCorrection::Corrected;
      else if (s == "as-printed") c.train.trace_correction = TraceCorrection::AsPrinted;
      else throw ValidationError("trace_correction must be corrected|as-printed");
    }
    if (t.contains("moment_batch")) {
      const std::string s = text(t, "moment_batch");
      if (s == "dedicated") c.train.moment_batch = MomentBatch::Dedicated;
      else if (s == "reuse") c.train.moment_batch = MomentBatch::Reuse;
      else throw ValidationError("moment_batch must be dedicated|reuse");
    }
    read(t, "learning_rate", c.train.learning_rate);
    read(t, "init_scale", c.train.init_scale);
    read(t, "halve_on_divergence", c.train.halve_on_divergence);
    read(t, "early_stop", c.train.early_stop);
    if (t.contains("stop_relative_error")) {
      double v = 0.0;
      read(t, "stop_relative_error", v);
      c.train.stop_relative_error = v;
    }
  }
  if (j.contains("diagnostics")) {
    const json& g = j.at("diagnostics");
    reject_unknown(g, {"d", "k", "n_list", "trials", "band", "x_dist", "elim_n", "elim_trials",
                       "elim_traces", "bernoulli_d", "bernoulli_n", "bernoulli_trials"},
                   "diagnostics.");
    DiagnosticsConfig& d = c.diagnostics;
    read(g, "d", d.d);
    read(g, "k", d.k);
    read(g, "n_list", d.n_list);
    read(g, "trials", d.trials);
    if (g.contains("band")) {
      std::vector<double> band;
      read(g, "band", band);
      if (band.size() != 2 || !(band[0] < band[1])) {
        throw ValidationError("diagnostics.band must be [lo, hi] with lo < hi");
      }
      d.band = {band[0], band[1]};
    }
    if (g.contains("x_dist")) d.x_dist = parse_distribution(text(g, "x_dist"));
    read(g, "elim_n", d.elim_n);
    read(g, "elim_trials", d.elim_trials);
    read(g, "elim_traces", d.elim_traces);
    read(g, "bernoulli_d", d.bernoulli_d);
    read(g, "bernoulli_n", d.bernoulli_n);
    read(g, "bernoulli_trials", d.bernoulli_trials);
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"dir", "deterministic"}, "output.");
    if (o.contains("dir")) c.out_dir = text(o, "dir");
    read(o, "deterministic", c.deterministic);
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  ExperimentConfig c = j.contains("name") && j.at("name").is_string()
                           ? preset(j.at("name").get<std::string>())
                           : ExperimentConfig{};
  apply_json(c, j);
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  if (c.seed) j["seed"] = *c.seed;
  j["synth"] = {{"d", c.synth.d},
                {"k", c.synth.k},
                {"m_star_form", std::string(to_string(c.synth.m_star_form))},
                {"x_dist", std::string(to_string(c.synth.x_dist))},
                {"flip_labels", c.synth.flip_labels},
                {"noise_std", c.synth.noise_std},
                {"n_train", c.n_train},
                {"n_test", c.n_test}};
  j["train"] = {{"variant", std::string(to_string(c.train.variant))},
                {"iterations", c.train.iterations},
                {"batch_size", c.train.batch_size},
                {"sampling_mode", sampling_name(c.train.sampling_mode)},
                {"tau_min", c.train.tau_min},
                {"trace_correction", c.train.trace_correction == TraceCorrection::Corrected
                                         ? "corrected" : "as-printed"},
                {"moment_batch", c.train.moment_batch == MomentBatch::Dedicated ? "dedicated"
                                                                                : "reuse"},
                {"learning_rate", c.train.learning_rate},
                {"init_scale", c.train.init_scale},
                {"halve_on_divergence", c.train.halve_on_divergence},
                {"early_stop", c.train.early_stop}};
  if (c.k_set) j["train"]["k"] = c.train.k;
  if (c.train.stop_relative_error) j["train"]["stop_relative_error"] = *c.train.stop_relative_error;
  const DiagnosticsConfig& d = c.diagnostics;
  j["diagnostics"] = {{"d", d.d},
                      {"k", d.k},
                      {"n_list", d.n_list},
                      {"trials", d.trials},
                      {"band", {d.band.lo, d.band.hi}},
                      {"x_dist", std::string(to_string(d.x_dist))},
                      {"elim_n", d.elim_n},
                      {"elim_trials", d.elim_trials},
                      {"elim_traces", d.elim_traces},
                      {"bernoulli_d", d.bernoulli_d},
                      {"bernoulli_n", d.bernoulli_n},
                      {"bernoulli_trials", d.bernoulli_trials}};
  j["output"] = {{"dir", c.out_dir.string()}, {"deterministic", c.deterministic}};
  return j;
}

Index model_rank(const ExperimentConfig& c, const GroundTruth& truth) {
  return c.k_set ? c.train.k : truth.identifiable_rank();
}

std::uint64_t require_seed(const ExperimentConfig& c) {
  if (!c.seed) throw ValidationError("--seed is required (or set \"seed\" in the config file)");
  return *c.seed;
}

}  // namespace mfm::cli

// Command-line front end: dataset generation/conversion, streaming training,
// linear probing, policy comparison and gradient checks.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sdc/binary_io.hpp"
#include "sdc/compare.hpp"
#include "sdc/config.hpp"
#include "sdc/dataset.hpp"
#include "sdc/errors.hpp"
#include "sdc/gradcheck.hpp"
#include "sdc/harness.hpp"

namespace {

constexpr int kConfigExit = 1;
constexpr int kRuntimeExit = 2;

struct CommonRunFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string policy;
  std::uint64_t stc = 0;
  std::size_t buffer_size = 0;
  std::string lazy_interval;
  std::string seed;
  std::string dataset;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value config file");
    cmd->add_option("--set", overrides, "override a config key (key=value), repeatable");
    cmd->add_option("--policy", policy, "contrast | random | fifo | selective_bp | k_center");
    cmd->add_option("--stc", stc, "samples per same-class run");
    cmd->add_option("--buffer-size", buffer_size, "buffer capacity N (also the batch size)");
    cmd->add_option("--lazy-interval", lazy_interval, "re-score buffered samples every T iterations (0 = off)");
    cmd->add_option("--seed", seed, "base seed");
    cmd->add_option("--dataset", dataset, "SSDS dataset file (default: synthetic)");
  }

  sdc::RunConfig resolve() const {
    sdc::RunConfig c;
    if (!config_path.empty()) c = sdc::load_config(config_path);
    if (!policy.empty()) c.set("policy", policy);
    if (stc) c.stc = stc;
    if (buffer_size) c.buffer_size = buffer_size;
    if (!lazy_interval.empty()) c.set("lazy_interval", lazy_interval);
    if (!seed.empty()) c.set("seed", seed);
    if (!dataset.empty()) c.dataset_path = dataset;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw sdc::ConfigError("--set expects key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    c.validate();
    return c;
  }
};

int gen_data(std::uint32_t classes, std::size_t dim, std::size_t per_class, double separation, std::uint64_t seed,
             const std::string& out) {
  const sdc::Dataset ds = sdc::make_synthetic(classes, dim, per_class, separation, seed);
  sdc::save_dataset(out, ds);
  std::cout << "wrote " << ds.size() << " samples (" << classes << " classes, dim " << dim << ") to " << out << "\n";
  return 0;
}

int convert(const std::string& csv, std::uint32_t classes, const std::string& out) {
  std::ifstream in(csv);
  if (!in) throw sdc::DataError("cannot open '" + csv + "'");
  const sdc::Dataset ds = sdc::dataset_from_csv(in, classes);
  sdc::save_dataset(out, ds);
  std::cout << "wrote " << ds.size() << " samples (" << ds.num_classes() << " classes, dim " << ds.feature_dim()
            << ") to " << out << "\n";
  return 0;
}

int train(const CommonRunFlags& flags, const std::string& out) {
  const sdc::RunConfig config = flags.resolve();
  const sdc::RunData data = sdc::prepare_data(config);
  const auto result = sdc::run_stage1(config, data, std::filesystem::path(out));
  const auto& m = result.metrics;
  std::cout << "iterations " << m.iterations.size() << ", fresh scores " << m.total_fresh_scores()
            << ", reused scores " << m.total_reused_scores() << "\n";
  for (const auto& c : m.checkpoints) {
    std::cout << "checkpoint seen=" << c.seen_samples;
    if (c.probe_accuracy) std::cout << " probe_accuracy=" << *c.probe_accuracy;
    std::cout << "\n";
  }
  std::cout << "outputs in " << out << "\n";
  return 0;
}

int probe(const CommonRunFlags& flags, const std::string& checkpoint, double label_fraction) {
  sdc::RunConfig config = flags.resolve();
  if (label_fraction > 0.0) config.label_fraction = label_fraction;
  config.validate();
  const sdc::RunData data = sdc::prepare_data(config);
  const double acc = sdc::run_stage2(checkpoint, data, config.label_fraction, config.resolved_probe_seed(),
                                     sdc::probe_options_for(config));
  std::printf("label_fraction=%g accuracy=%.4f\n", config.label_fraction, acc);
  return 0;
}

int compare(const CommonRunFlags& flags, const std::vector<std::string>& config_files,
            const std::vector<std::string>& policies, std::size_t num_seeds, unsigned workers, const std::string& out) {
  std::vector<sdc::RunConfig> configs;
  const sdc::RunConfig base = flags.resolve();
  for (const auto& path : config_files) {
    sdc::RunConfig c = sdc::load_config(path, base);
    c.validate();
    configs.push_back(c);
  }
  if (configs.empty()) configs.push_back(base);
  if (!policies.empty()) {
    std::vector<sdc::RunConfig> expanded;
    for (const auto& c : configs)
      for (const auto& p : policies) {
        sdc::RunConfig e = c;
        e.policy = sdc::parse_policy(p);
        e.name = c.name + "/" + p;
        expanded.push_back(e);
      }
    configs = std::move(expanded);
  }
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < num_seeds; ++i) seeds.push_back(base.seed + i);
  const auto rows = sdc::compare_policies(configs, seeds, workers);
  const std::string csv = sdc::comparison_csv(rows);
  std::cout << csv;
  if (!out.empty()) {
    sdc::io::write_file(out, csv);
    sdc::io::write_file(out + ".json", sdc::comparison_json(rows));
  }
  return 0;
}

int gradient_check(double tolerance) {
  int failures = 0;
  std::size_t anchor_matches = 0, positive_matches = 0;
  for (const auto& spec : sdc::standard_gradient_cases()) {
    const auto r = sdc::check_gradients(spec, tolerance);
    const bool ok = r.autodiff_ok && (r.anchor_term_ok || r.positive_term_ok);
    anchor_matches += r.anchor_term_ok;
    positive_matches += r.positive_term_ok;
    if (!ok) ++failures;
    std::printf("%s N=%zu d=%zu tau=%.2f autodiff=%.2e anchor_term=%.2e positive_term=%.2e\n", ok ? "PASS" : "FAIL",
                spec.pairs, spec.dim, spec.temperature, r.autodiff_error, r.anchor_term_error, r.positive_term_error);
  }
  std::printf("closed form matching finite differences: anchor_term %zu/50, positive_term %zu/50\n", anchor_matches,
              positive_matches);
  std::printf("%s (%d failures)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? kRuntimeExit : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming contrastive learning with selective data contrast"};
  app.require_subcommand(1);

  std::uint32_t classes = 10;
  std::size_t dim = 32, per_class = 500;
  double separation = 3.0;
  std::uint64_t data_seed = 1;
  std::string out;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic Gaussian-mixture dataset");
  gen->add_option("--classes", classes);
  gen->add_option("--dim", dim);
  gen->add_option("--per-class", per_class);
  gen->add_option("--separation", separation);
  gen->add_option("--seed", data_seed);
  gen->add_option("--out", out)->required();

  std::string csv;
  std::uint32_t csv_classes = 0;
  auto* conv = app.add_subcommand("convert", "convert CSV (label first) to a dataset file");
  conv->add_option("--csv", csv)->required();
  conv->add_option("--classes", csv_classes, "number of classes (default: max label + 1)");
  conv->add_option("--out", out)->required();

  CommonRunFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "stage one: streaming contrastive training");
  train_flags.attach(train_cmd);
  train_cmd->add_option("--out", out, "output directory")->required();

  CommonRunFlags probe_flags;
  std::string checkpoint;
  double label_fraction = 0.0;
  auto* probe_cmd = app.add_subcommand("probe", "stage two: linear probe on a checkpoint");
  probe_flags.attach(probe_cmd);
  probe_cmd->add_option("--checkpoint", checkpoint)->required();
  probe_cmd->add_option("--label-fraction", label_fraction);

  CommonRunFlags compare_flags;
  std::vector<std::string> config_files, policies;
  std::size_t num_seeds = 3;
  unsigned workers = 0;
  auto* compare_cmd = app.add_subcommand("compare", "run several configs over shared seeds");
  compare_cmd->add_option("--base", compare_flags.config_path, "base config applied before each --run config");
  compare_cmd->add_option("--run", config_files, "per-run config file, repeatable");
  compare_cmd->add_option("--set", compare_flags.overrides, "override a base config key (key=value)");
  compare_cmd->add_option("--policies", policies, "policies to sweep")->delimiter(',');
  compare_cmd->add_option("--seed", compare_flags.seed, "first seed");
  compare_cmd->add_option("--seeds", num_seeds, "number of seeds");
  compare_cmd->add_option("--workers", workers, "parallel runs (default: hardware threads)");
  compare_cmd->add_option("--out", out, "CSV output path (JSON written alongside)");

  double tolerance = 1e-5;
  auto* grad_cmd = app.add_subcommand("gradient-check", "check loss gradients against finite differences");
  grad_cmd->add_option("--tolerance", tolerance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*gen) return gen_data(classes, dim, per_class, separation, data_seed, out);
    if (*conv) return convert(csv, csv_classes, out);
    if (*train_cmd) return train(train_flags, out);
    if (*probe_cmd) return probe(probe_flags, checkpoint, label_fraction);
    if (*compare_cmd) return compare(compare_flags, config_files, policies, num_seeds, workers, out);
    if (*grad_cmd) return gradient_check(tolerance);
  } catch (const sdc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return kRuntimeExit;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdc/scoring.hpp"
#include "sdc/selection.hpp"

namespace sdc {

struct RunConfig {
  std::string name = "run";

  // model
  std::vector<std::size_t> encoder_hidden = {256, 128};
  std::size_t representation_dim = 64;
  std::size_t projection_hidden = 64;
  std::size_t projection_dim = 32;

  // selection
  PolicyKind policy = PolicyKind::contrast;
  std::uint64_t lazy_interval = 0;  // 0 disables lazy scoring
  std::size_t buffer_size = 64;
  std::size_t segment_size = 0;  // 0 means buffer_size

  // stream
  std::uint64_t stc = 100;
  std::uint64_t total_emissions = 20000;
  bool geometric_runs = false;

  // data: a dataset file, or a synthetic Gaussian mixture when empty
  std::string dataset_path;
  std::uint32_t num_classes = 10;
  std::size_t dim = 32;
  std::size_t per_class = 500;
  double separation = 3.0;
  double train_fraction = 0.8;

  // training
  double learning_rate = 1e-4;
  double temperature = 0.5;
  double weight_decay = 1e-4;

  // augmentation
  double crop_min = 0.5;
  double crop_max = 1.0;
  double flip_probability = 0.0;
  double noise_sigma = 0.1;
  double mask_fraction = 0.1;

  // evaluation
  double label_fraction = 1.0;
  std::size_t probe_epochs = 100;
  double probe_learning_rate = 1e-3;
  std::size_t probe_batch_size = 256;
  double checkpoint_fraction = 0.1;  // checkpoint every this fraction of total emissions; 0 = final only
  bool probe_at_checkpoints = true;

  // seeds; unset ones derive from `seed`
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> data_seed, model_seed, stream_seed, augment_seed, policy_seed, probe_seed;

  std::uint64_t resolved_data_seed() const;
  std::uint64_t resolved_model_seed() const;
  std::uint64_t resolved_stream_seed() const;
  std::uint64_t resolved_augment_seed() const;
  std::uint64_t resolved_policy_seed() const;
  std::uint64_t resolved_probe_seed() const;

  std::size_t effective_segment_size() const { return segment_size == 0 ? buffer_size : segment_size; }
  LazyConfig lazy() const { return {lazy_interval > 0, lazy_interval == 0 ? 1 : lazy_interval}; }

  // Sets one key from its text form. Throws ConfigError on unknown keys or
  // unparsable values.
  void set(const std::string& key, const std::string& value);
  // Every key with its current text form, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  void validate() const;
};

// Reads `key = value` lines; '#' starts a comment.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

std::string to_config_text(const RunConfig& config);
std::string to_json(const RunConfig& config);

}  // namespace sdc

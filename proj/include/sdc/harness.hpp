#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdc/augment.hpp"
#include "sdc/buffer.hpp"
#include "sdc/config.hpp"
#include "sdc/dataset.hpp"
#include "sdc/model.hpp"
#include "sdc/errors.hpp"
#include "sdc/probe.hpp"
#include "sdc/scoring.hpp"

namespace sdc {

struct IterationRecord {
  std::uint64_t iteration = 0;
  std::uint64_t seen_samples = 0;
  double train_loss = 0.0;  // mean per anchor; NaN when no step was taken
  std::size_t fresh_scores = 0;
  std::size_t reused_scores = 0;
  std::size_t kept_from_buffer = 0;
  std::size_t kept_from_incoming = 0;
  double wall_time_ms = 0.0;
};

struct CheckpointRecord {
  std::uint64_t seen_samples = 0;
  std::optional<double> probe_accuracy;
  std::string file;
};

struct RunMetrics {
  std::vector<IterationRecord> iterations;
  std::vector<CheckpointRecord> checkpoints;

  std::size_t total_fresh_scores() const;
  std::size_t total_reused_scores() const;
};

// Train/test splits a run streams from and evaluates on.
struct RunData {
  Dataset train;
  Dataset test;
};

RunData prepare_data(const RunConfig& config);

// Optional observers for tests and tooling.
struct Stage1Hooks {
  // Called with the buffer that forms the training batch, before the step.
  std::function<void(std::uint64_t iteration, const Buffer&)> on_training_batch;
  // Called with each iteration's candidate records (contrast policy only).
  std::function<void(std::uint64_t iteration, const CandidateScores&)> on_scores;
};

struct Stage1Result {
  Model model;
  RunMetrics metrics;
  std::uint64_t label_reads_during_training = 0;
};

AugmentorConfig augmentor_for(const RunConfig& config, const Layout& layout);
ProbeOptions probe_options_for(const RunConfig& config);

// Streaming contrastive training. When out_dir is given, writes
// metrics.csv, timing.csv, probe.csv, config.json and checkpoints/ there.
Stage1Result run_stage1(const RunConfig& config, const RunData& data,
                        const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                        const Stage1Hooks& hooks = {});

// Linear probe on a frozen encoder.
double run_stage2(const Model& model, const RunData& data, double label_fraction, std::uint64_t seed,
                  const ProbeOptions& base = {});
double run_stage2(const std::filesystem::path& checkpoint, const RunData& data, double label_fraction,
                  std::uint64_t seed, const ProbeOptions& base = {});

std::string metrics_csv(const RunMetrics& metrics);
std::string timing_csv(const RunMetrics& metrics);
std::string probe_csv(const RunMetrics& metrics);

// Raised when stage one fails mid-run; carries the iteration.
class RunError : public Error {
 public:
  RunError(std::uint64_t iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

}  // namespace sdc

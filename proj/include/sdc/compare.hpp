#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdc/config.hpp"

namespace sdc {

struct ComparisonRow {
  std::string name;
  PolicyKind policy = PolicyKind::contrast;
  std::uint64_t lazy_interval = 0;
  std::size_t buffer_size = 0;
  std::vector<double> accuracies;  // one per seed, in seed order
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation
  double mean_fresh_scores = 0.0;
  double mean_reused_scores = 0.0;
};

// Final-model probe accuracy of one run.
struct RunSummary {
  double accuracy = 0.0;
  std::size_t fresh_scores = 0;
  std::size_t reused_scores = 0;
};

RunSummary run_once(const RunConfig& config);

// Runs every config under every seed (seed overrides config.seed and clears
// per-component seeds) and aggregates per config. Runs execute on up to
// `workers` threads; results do not depend on scheduling.
std::vector<ComparisonRow> compare_policies(const std::vector<RunConfig>& configs,
                                            const std::vector<std::uint64_t>& seeds, unsigned workers = 0);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_json(const std::vector<ComparisonRow>& rows);

}  // namespace sdc

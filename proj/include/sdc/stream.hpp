#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdc/dataset.hpp"
#include "sdc/rng.hpp"

namespace sdc {

struct StreamConfig {
  // Samples per same-class run.
  std::uint64_t stc = 100;
  std::uint64_t total_emissions = 0;
  std::uint64_t seed = 0;
  // Draw run lengths from a geometric law with mean stc instead of fixing them.
  bool geometric_runs = false;
};

// Temporally correlated stream over a dataset: runs of one class, each run
// drawing its items uniformly with replacement. Consecutive runs use
// different classes whenever more than one class exists.
class StreamEmitter {
 public:
  StreamEmitter(const Dataset& dataset, StreamConfig config);

  std::optional<Sample> next();
  // Up to n samples; fewer only when the stream is exhausted.
  std::vector<Sample> next_segment(std::size_t n);

  std::uint64_t emitted() const { return emitted_; }
  bool exhausted() const { return emitted_ >= config_.total_emissions; }

 private:
  void start_run();

  const Dataset& dataset_;
  StreamConfig config_;
  Rng rng_;
  std::uint64_t emitted_ = 0;
  std::uint64_t run_remaining_ = 0;
  std::optional<std::uint32_t> current_class_;
};

// Convenience: the whole stream as a vector.
std::vector<Sample> emit_stream(const Dataset& dataset, const StreamConfig& config);

}  // namespace sdc

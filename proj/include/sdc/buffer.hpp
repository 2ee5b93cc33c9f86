#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sdc/sample.hpp"

namespace sdc {

struct ScoreRecord {
  double value = 0.0;  // in [0, 2]
  std::uint64_t computed_at_iteration = 0;
  bool fresh = false;  // computed in the current iteration
};

struct BufferEntry {
  Sample sample;
  ScoreRecord score;
  // Completed training iterations since insertion.
  std::uint64_t age = 0;
  std::uint64_t insertion_iteration = 0;
};

// A segment of newly arrived samples, in stream order.
using Segment = std::vector<Sample>;

struct Buffer {
  std::size_t capacity = 0;
  std::vector<BufferEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

}  // namespace sdc

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdc/buffer.hpp"
#include "sdc/model.hpp"

namespace sdc {

struct LazyConfig {
  bool enabled = false;
  std::uint64_t interval = 1;  // T

  void validate() const;
};

// S(x) = 1 - z(x)·z(weak_view(x)), clamped to [0, 2]. Tape-free; never reads
// the label.
double contrast_score(const Model& model, const Sample& x, const Layout& layout);

// Scores for many samples in one forward pass. Each score is bitwise equal to
// contrast_score on that sample alone.
std::vector<double> contrast_scores(const Model& model, std::span<const Sample* const> samples, const Layout& layout);

// Whether a buffer entry of this age is re-scored. Age 0 never is: the entry
// was scored on arrival.
bool needs_rescore(std::uint64_t age, const LazyConfig& lazy);

struct CandidateScores {
  // Buffer entries first (buffer order), then incoming (arrival order).
  std::vector<ScoreRecord> records;
  std::size_t fresh = 0;
  std::size_t reused = 0;
};

CandidateScores score_candidates(const Model& model, const Buffer& buffer, const Segment& incoming,
                                 const LazyConfig& lazy, const Layout& layout, std::uint64_t iteration);

}  // namespace sdc

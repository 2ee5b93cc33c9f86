#pragma once

// Buffer replacement policies. Candidates are always ordered buffer entries
// first (buffer order), then incoming samples (arrival order). When the
// candidates fit in the buffer every policy keeps all of them. Selections
// preserve the age of surviving entries; new entries start at age 0.
// advance_ages is the only place ages grow.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdc/augment.hpp"
#include "sdc/buffer.hpp"
#include "sdc/model.hpp"
#include "sdc/rng.hpp"

namespace sdc {

enum class PolicyKind { contrast, random, fifo, selective_bp, k_center };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);  // throws ConfigError

// Ranking key shared by the score-based policies: higher score first, then
// buffer residents before newcomers, then earlier arrival.
struct CandidateKey {
  double score = 0.0;
  bool in_buffer = false;
  std::uint64_t arrival_index = 0;
};

bool ranks_before(const CandidateKey& a, const CandidateKey& b);

// Indices of the n best-ranked keys, best first.
std::vector<std::size_t> top_n(std::span<const CandidateKey> keys, std::size_t n);

// Keys for the candidates of (buffer, incoming) with the given scores.
std::vector<CandidateKey> candidate_keys(const Buffer& buffer, const Segment& incoming, std::span<const double> scores);

// New buffer holding the chosen candidates: survivors in their previous
// order, then newcomers in arrival order. `records` (optional, one per
// candidate) replaces the cached score of each kept candidate.
Buffer assemble(const Buffer& buffer, const Segment& incoming, std::span<const std::size_t> chosen,
                std::span<const ScoreRecord> records, std::uint64_t iteration);

Buffer select_contrast(const Buffer& buffer, const Segment& incoming, std::span<const ScoreRecord> scores,
                       std::uint64_t iteration);

Buffer select_random(const Buffer& buffer, const Segment& incoming, Rng& rng, std::uint64_t iteration);

Buffer select_fifo(const Buffer& buffer, const Segment& incoming, std::uint64_t iteration);

struct SelectiveBpOptions {
  AugmentorConfig augment;
  double temperature = 0.5;
};

// Per-candidate contrastive loss: each candidate contributes a strongly
// augmented pair, and its loss is the anchor term of its first view against
// all other views of the candidate set. Draws pairs from rng in candidate
// order.
std::vector<double> candidate_losses(const Model& model, const Buffer& buffer, const Segment& incoming,
                                     const SelectiveBpOptions& options, Rng& rng);

Buffer select_selective_bp(const Buffer& buffer, const Segment& incoming, const Model& model,
                           const SelectiveBpOptions& options, Rng& rng, std::uint64_t iteration);

// Greedy farthest-point traversal over the rows of `points` ([M×d]). The
// first center is the point farthest from the centroid. Ties go to the key
// that ranks first (scores in keys are ignored).
std::vector<std::size_t> k_center_greedy(const std::vector<std::vector<double>>& points,
                                         std::span<const CandidateKey> keys, std::size_t k);

// max over points of the distance to the nearest chosen center.
double covering_radius(const std::vector<std::vector<double>>& points, std::span<const std::size_t> centers);

Buffer select_k_center(const Buffer& buffer, const Segment& incoming, const Model& model, const Layout& layout,
                       std::uint64_t iteration);

void advance_ages(Buffer& buffer);

}  // namespace sdc

#include "sdc/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sdc/errors.hpp"
#include "sdc/objective.hpp"

namespace sdc {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::contrast: return "contrast";
    case PolicyKind::random: return "random";
    case PolicyKind::fifo: return "fifo";
    case PolicyKind::selective_bp: return "selective_bp";
    case PolicyKind::k_center: return "k_center";
  }
  return "unknown";
}

PolicyKind parse_policy(const std::string& name) {
  for (auto k : {PolicyKind::contrast, PolicyKind::random, PolicyKind::fifo, PolicyKind::selective_bp,
                 PolicyKind::k_center})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown policy '" + name + "' (expected contrast, random, fifo, selective_bp or k_center)");
}

bool ranks_before(const CandidateKey& a, const CandidateKey& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.in_buffer != b.in_buffer) return a.in_buffer;
  return a.arrival_index < b.arrival_index;
}

std::vector<std::size_t> top_n(std::span<const CandidateKey> keys, std::size_t n) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  n = std::min(n, keys.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) { return ranks_before(keys[a], keys[b]); });
  order.resize(n);
  return order;
}

std::vector<CandidateKey> candidate_keys(const Buffer& buffer, const Segment& incoming,
                                         std::span<const double> scores) {
  const std::size_t total = buffer.size() + incoming.size();
  if (!scores.empty() && scores.size() != total)
    throw ContractError("got " + std::to_string(scores.size()) + " scores for " + std::to_string(total) +
                        " candidates");
  std::vector<CandidateKey> keys(total);
  for (std::size_t i = 0; i < total; ++i) {
    const bool in_buffer = i < buffer.size();
    const Sample& s = in_buffer ? buffer.entries[i].sample : incoming[i - buffer.size()];
    keys[i] = {scores.empty() ? 0.0 : scores[i], in_buffer, s.arrival_index};
  }
  return keys;
}

Buffer assemble(const Buffer& buffer, const Segment& incoming, std::span<const std::size_t> chosen,
                std::span<const ScoreRecord> records, std::uint64_t iteration) {
  const std::size_t total = buffer.size() + incoming.size();
  if (!records.empty() && records.size() != total)
    throw ContractError("got " + std::to_string(records.size()) + " score records for " + std::to_string(total) +
                        " candidates");
  std::vector<bool> keep(total, false);
  for (std::size_t c : chosen) {
    if (c >= total) throw ContractError("selected candidate " + std::to_string(c) + " out of range");
    keep[c] = true;
  }
  Buffer out;
  out.capacity = buffer.capacity;
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (!keep[i]) continue;
    BufferEntry e = buffer.entries[i];
    if (!records.empty()) e.score = records[i];
    out.entries.push_back(std::move(e));
  }
  std::vector<std::size_t> newcomers;
  for (std::size_t i = buffer.size(); i < total; ++i)
    if (keep[i]) newcomers.push_back(i - buffer.size());
  std::sort(newcomers.begin(), newcomers.end(),
            [&](std::size_t a, std::size_t b) { return incoming[a].arrival_index < incoming[b].arrival_index; });
  for (std::size_t k : newcomers) {
    BufferEntry e;
    e.sample = incoming[k];
    if (!records.empty()) e.score = records[buffer.size() + k];
    e.age = 0;
    e.insertion_iteration = iteration;
    out.entries.push_back(std::move(e));
  }
  if (out.size() > out.capacity) throw ContractError("selection overfilled the buffer");
  return out;
}

namespace {

std::vector<std::size_t> all_candidates(const Buffer& buffer, const Segment& incoming) {
  std::vector<std::size_t> idx(buffer.size() + incoming.size());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

bool fits(const Buffer& buffer, const Segment& incoming) {
  return buffer.size() + incoming.size() <= buffer.capacity;
}

}  // namespace

Buffer select_contrast(const Buffer& buffer, const Segment& incoming, std::span<const ScoreRecord> scores,
                       std::uint64_t iteration) {
  const std::size_t total = buffer.size() + incoming.size();
  if (scores.size() != total)
    throw ContractError("select_contrast: " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(total) + " candidates");
  if (fits(buffer, incoming)) return assemble(buffer, incoming, all_candidates(buffer, incoming), scores, iteration);
  std::vector<double> values(total);
  for (std::size_t i = 0; i < total; ++i) values[i] = scores[i].value;
  const auto keys = candidate_keys(buffer, incoming, values);
  return assemble(buffer, incoming, top_n(keys, buffer.capacity), scores, iteration);
}

Buffer select_random(const Buffer& buffer, const Segment& incoming, Rng& rng, std::uint64_t iteration) {
  auto idx = all_candidates(buffer, incoming);
  if (fits(buffer, incoming)) return assemble(buffer, incoming, idx, {}, iteration);
  // Partial Fisher-Yates: the first `capacity` slots form a uniform sample
  // without replacement.
  for (std::size_t i = 0; i < buffer.capacity; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(buffer.capacity);
  return assemble(buffer, incoming, idx, {}, iteration);
}

Buffer select_fifo(const Buffer& buffer, const Segment& incoming, std::uint64_t iteration) {
  const std::size_t total = buffer.size() + incoming.size();
  std::vector<std::size_t> keep;
  if (total <= buffer.capacity) {
    keep = all_candidates(buffer, incoming);
  } else {
    // Incoming always enters; the oldest residents make room.
    std::vector<std::size_t> residents(buffer.size());
    std::iota(residents.begin(), residents.end(), 0);
    std::sort(residents.begin(), residents.end(), [&](std::size_t a, std::size_t b) {
      const auto& ea = buffer.entries[a];
      const auto& eb = buffer.entries[b];
      if (ea.insertion_iteration != eb.insertion_iteration) return ea.insertion_iteration > eb.insertion_iteration;
      return ea.sample.arrival_index > eb.sample.arrival_index;
    });
    const std::size_t newcomers = std::min(incoming.size(), buffer.capacity);
    const std::size_t room = buffer.capacity - newcomers;
    for (std::size_t i = 0; i < std::min(room, residents.size()); ++i) keep.push_back(residents[i]);
    // With more newcomers than capacity, the latest arrivals win.
    std::vector<std::size_t> order(incoming.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return incoming[a].arrival_index > incoming[b].arrival_index; });
    for (std::size_t i = 0; i < newcomers; ++i) keep.push_back(buffer.size() + order[i]);
  }
  return assemble(buffer, incoming, keep, {}, iteration);
}

std::vector<double> candidate_losses(const Model& model, const Buffer& buffer, const Segment& incoming,
                                     const SelectiveBpOptions& options, Rng& rng) {
  const std::size_t total = buffer.size() + incoming.size();
  if (total < 2) throw ContractError("selective-bp needs at least two candidates");
  const std::size_t d = options.augment.layout.size();
  std::vector<double> rows;
  rows.reserve(2 * total * d);
  for (std::size_t i = 0; i < total; ++i) {
    const Sample& s = i < buffer.size() ? buffer.entries[i].sample : incoming[i - buffer.size()];
    auto [a, b] = strong_pair(s, options.augment, rng);
    rows.insert(rows.end(), a.features.begin(), a.features.end());
    rows.insert(rows.end(), b.features.begin(), b.features.end());
  }
  const Tensor z = model.embed(Tensor({2 * total, d}, std::move(rows)));
  std::vector<double> losses(total);
  for (std::size_t i = 0; i < total; ++i) losses[i] = anchor_loss(z, options.temperature, 2 * i);
  return losses;
}

Buffer select_selective_bp(const Buffer& buffer, const Segment& incoming, const Model& model,
                           const SelectiveBpOptions& options, Rng& rng, std::uint64_t iteration) {
  if (fits(buffer, incoming)) return assemble(buffer, incoming, all_candidates(buffer, incoming), {}, iteration);
  const auto losses = candidate_losses(model, buffer, incoming, options, rng);
  const auto keys = candidate_keys(buffer, incoming, losses);
  return assemble(buffer, incoming, top_n(keys, buffer.capacity), {}, iteration);
}

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(sq);
}

// Index maximizing value; ties resolved by key rank.
std::size_t argmax_by(const std::vector<double>& value, const std::vector<bool>& eligible,
                      std::span<const CandidateKey> keys) {
  std::size_t best = value.size();
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!eligible[i]) continue;
    if (best == value.size() || value[i] > value[best]) {
      best = i;
    } else if (value[i] == value[best]) {
      CandidateKey a = keys[i], b = keys[best];
      a.score = b.score = 0.0;
      if (ranks_before(a, b)) best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<std::size_t> k_center_greedy(const std::vector<std::vector<double>>& points,
                                         std::span<const CandidateKey> keys, std::size_t k) {
  const std::size_t m = points.size();
  if (keys.size() != m) throw ContractError("k_center_greedy: one key per point required");
  k = std::min(k, m);
  if (k == 0) return {};
  const std::size_t d = points.front().size();
  std::vector<double> centroid(d, 0.0);
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j) centroid[j] += p[j];
  for (double& v : centroid) v /= static_cast<double>(m);

  std::vector<bool> eligible(m, true);
  std::vector<double> gap(m);
  for (std::size_t i = 0; i < m; ++i) gap[i] = distance(points[i], centroid);
  std::vector<std::size_t> centers{argmax_by(gap, eligible, keys)};
  eligible[centers.back()] = false;
  for (std::size_t i = 0; i < m; ++i) gap[i] = distance(points[i], points[centers.back()]);
  while (centers.size() < k) {
    const std::size_t next = argmax_by(gap, eligible, keys);
    centers.push_back(next);
    eligible[next] = false;
    for (std::size_t i = 0; i < m; ++i) gap[i] = std::min(gap[i], distance(points[i], points[next]));
  }
  return centers;
}

double covering_radius(const std::vector<std::vector<double>>& points, std::span<const std::size_t> centers) {
  if (centers.empty()) throw ContractError("covering radius of an empty center set");
  double radius = 0.0;
  for (const auto& p : points) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) nearest = std::min(nearest, distance(p, points[c]));
    radius = std::max(radius, nearest);
  }
  return radius;
}

Buffer select_k_center(const Buffer& buffer, const Segment& incoming, const Model& model, const Layout& layout,
                       std::uint64_t iteration) {
  if (fits(buffer, incoming)) return assemble(buffer, incoming, all_candidates(buffer, incoming), {}, iteration);
  const std::size_t total = buffer.size() + incoming.size();
  const std::size_t d = layout.size();
  std::vector<double> rows;
  rows.reserve(total * d);
  for (std::size_t i = 0; i < total; ++i) {
    const Sample& s = i < buffer.size() ? buffer.entries[i].sample : incoming[i - buffer.size()];
    if (s.features.size() != d) throw DimensionError("sample " + std::to_string(s.id) + " does not match layout");
    rows.insert(rows.end(), s.features.begin(), s.features.end());
  }
  const Tensor z = model.embed(Tensor({total, d}, std::move(rows)));
  std::vector<std::vector<double>> points(total);
  for (std::size_t i = 0; i < total; ++i)
    points[i].assign(z.data().begin() + i * z.cols(), z.data().begin() + (i + 1) * z.cols());
  const auto keys = candidate_keys(buffer, incoming, {});
  return assemble(buffer, incoming, k_center_greedy(points, keys, buffer.capacity), {}, iteration);
}

void advance_ages(Buffer& buffer) {
  for (auto& e : buffer.entries) e.age += 1;
}

}  // namespace sdc

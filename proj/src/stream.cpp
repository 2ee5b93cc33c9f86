#include "sdc/stream.hpp"

#include <cmath>

#include "sdc/errors.hpp"

namespace sdc {

StreamEmitter::StreamEmitter(const Dataset& dataset, StreamConfig config)
    : dataset_(dataset), config_(config), rng_(Rng::substream(config.seed, {0x57524541ULL})) {
  if (config_.stc < 1) throw ConfigError("stc must be at least 1");
  if (config_.total_emissions > 0) {
    for (std::uint32_t c = 0; c < dataset_.num_classes(); ++c)
      if (dataset_.class_members()[c].empty())
        throw DataError("class " + std::to_string(c) + " has no samples to stream");
  }
}

void StreamEmitter::start_run() {
  const std::uint32_t k = dataset_.num_classes();
  std::uint32_t next;
  if (!current_class_ || k == 1) {
    next = static_cast<std::uint32_t>(rng_.below(k));
  } else {
    // Uniform over the k-1 classes other than the current one.
    next = static_cast<std::uint32_t>(rng_.below(k - 1));
    if (next >= *current_class_) ++next;
  }
  current_class_ = next;
  if (config_.geometric_runs && config_.stc > 1) {
    // 1 + Geometric(p) with p = 1/stc has mean stc.
    const double p = 1.0 / static_cast<double>(config_.stc);
    double u = rng_.uniform();
    while (u <= 0.0) u = rng_.uniform();
    run_remaining_ = 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
  } else {
    run_remaining_ = config_.stc;
  }
}

std::optional<Sample> StreamEmitter::next() {
  if (exhausted()) return std::nullopt;
  if (run_remaining_ == 0) start_run();
  const auto& members = dataset_.class_members()[*current_class_];
  Sample s = dataset_[members[rng_.below(members.size())]];
  s.arrival_index = emitted_++;
  --run_remaining_;
  return s;
}

std::vector<Sample> StreamEmitter::next_segment(std::size_t n) {
  std::vector<Sample> out;
  out.reserve(n);
  while (out.size() < n) {
    auto s = next();
    if (!s) break;
    out.push_back(std::move(*s));
  }
  return out;
}

std::vector<Sample> emit_stream(const Dataset& dataset, const StreamConfig& config) {
  StreamEmitter emitter(dataset, config);
  std::vector<Sample> out;
  while (auto s = emitter.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace sdc

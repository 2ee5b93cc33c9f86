#include "sdc/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "sdc/augment.hpp"
#include "sdc/errors.hpp"

namespace sdc {

void LazyConfig::validate() const {
  if (interval < 1) throw ConfigError("lazy interval must be at least 1");
}

std::vector<double> contrast_scores(const Model& model, std::span<const Sample* const> samples,
                                    const Layout& layout) {
  if (samples.empty()) return {};
  const std::size_t d = layout.size();
  std::vector<double> rows;
  rows.reserve(2 * samples.size() * d);
  for (const Sample* s : samples) {
    if (s->features.size() != d)
      throw DimensionError("sample " + std::to_string(s->id) + " has " + std::to_string(s->features.size()) +
                           " features, layout expects " + std::to_string(d));
    rows.insert(rows.end(), s->features.begin(), s->features.end());
    const auto flipped = weak_view(s->features, layout);
    rows.insert(rows.end(), flipped.begin(), flipped.end());
  }
  const Tensor batch({2 * samples.size(), d}, std::move(rows));
  const Tensor raw = model.project_raw(batch);
  const std::size_t k = raw.cols();
  const auto P = raw.data();
  std::vector<double> scores(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double* a = P.data() + (2 * i) * k;
    const double* b = P.data() + (2 * i + 1) * k;
    double na = 0.0, nb = 0.0, dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      na += a[j] * a[j];
      nb += b[j] * b[j];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < kNormFloor || nb < kNormFloor)
      throw DomainError("degenerate projection while scoring sample " + std::to_string(samples[i]->id));
    for (std::size_t j = 0; j < k; ++j) dot += (a[j] / na) * (b[j] / nb);
    scores[i] = std::clamp(1.0 - dot, 0.0, 2.0);
  }
  return scores;
}

double contrast_score(const Model& model, const Sample& x, const Layout& layout) {
  const Sample* one[] = {&x};
  return contrast_scores(model, one, layout).front();
}

bool needs_rescore(std::uint64_t age, const LazyConfig& lazy) {
  if (!lazy.enabled) return true;
  return age > 0 && age % lazy.interval == 0;
}

CandidateScores score_candidates(const Model& model, const Buffer& buffer, const Segment& incoming,
                                 const LazyConfig& lazy, const Layout& layout, std::uint64_t iteration) {
  lazy.validate();
  CandidateScores out;
  out.records.resize(buffer.size() + incoming.size());
  std::vector<const Sample*> to_score;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const BufferEntry& e = buffer.entries[i];
    if (needs_rescore(e.age, lazy)) {
      to_score.push_back(&e.sample);
      slots.push_back(i);
    } else {
      out.records[i] = ScoreRecord{e.score.value, e.score.computed_at_iteration, false};
      ++out.reused;
    }
  }
  for (std::size_t i = 0; i < incoming.size(); ++i) {
    to_score.push_back(&incoming[i]);
    slots.push_back(buffer.size() + i);
  }
  const auto scores = contrast_scores(model, to_score, layout);
  for (std::size_t k = 0; k < scores.size(); ++k) out.records[slots[k]] = ScoreRecord{scores[k], iteration, true};
  out.fresh = scores.size();
  return out;
}

}  // namespace sdc

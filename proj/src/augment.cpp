#include "sdc/augment.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sdc/errors.hpp"

namespace sdc {

void AugmentorConfig::validate() const {
  if (layout.size() == 0) throw ConfigError("augmentor layout is empty");
  if (!(crop_min > 0.0 && crop_min <= crop_max && crop_max <= 1.0))
    throw ConfigError("crop fraction range must satisfy 0 < min <= max <= 1");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) throw ConfigError("flip probability must lie in [0, 1]");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise sigma must be non-negative");
  if (!(mask_fraction >= 0.0 && mask_fraction < 1.0)) throw ConfigError("mask fraction must lie in [0, 1)");
}

AugmentorConfig AugmentorConfig::identity(Layout layout) {
  AugmentorConfig c;
  c.layout = layout;
  c.crop_enabled = c.flip_enabled = c.noise_enabled = c.mask_enabled = false;
  return c;
}

std::vector<double> weak_view(std::span<const double> features, const Layout& layout) {
  if (features.size() != layout.size())
    throw DimensionError("sample has " + std::to_string(features.size()) + " features but layout expects " +
                         std::to_string(layout.size()));
  std::vector<double> out(features.begin(), features.end());
  if (layout.kind == Layout::Kind::vector) {
    std::reverse(out.begin(), out.end());
  } else {
    const std::size_t w = layout.width;
    for (std::size_t row = 0; row < layout.channels * layout.height; ++row)
      std::reverse(out.begin() + row * w, out.begin() + (row + 1) * w);
  }
  return out;
}

Sample weak_view(const Sample& x, const Layout& layout) {
  Sample out = x;
  out.features = weak_view(x.features, layout);
  return out;
}

namespace {

std::vector<double> crop_and_resize(const std::vector<double>& in, const Layout& l, double fraction, Rng& rng) {
  const std::size_t H = l.height, W = l.width;
  const auto ch = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * H)));
  const auto cw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * W)));
  const std::size_t top = rng.below(H - ch + 1);
  const std::size_t left = rng.below(W - cw + 1);
  std::vector<double> out(in.size());
  auto coord = [](std::size_t i, std::size_t out_n, std::size_t in_n) {
    // Align centers of the output grid to the crop grid.
    const double c = (static_cast<double>(i) + 0.5) * static_cast<double>(in_n) / static_cast<double>(out_n) - 0.5;
    return std::clamp(c, 0.0, static_cast<double>(in_n - 1));
  };
  for (std::size_t c = 0; c < l.channels; ++c) {
    const double* src = in.data() + c * H * W;
    double* dst = out.data() + c * H * W;
    for (std::size_t y = 0; y < H; ++y) {
      const double sy = coord(y, H, ch);
      const auto y0 = static_cast<std::size_t>(sy);
      const std::size_t y1 = std::min(y0 + 1, ch - 1);
      const double fy = sy - static_cast<double>(y0);
      for (std::size_t x = 0; x < W; ++x) {
        const double sx = coord(x, W, cw);
        const auto x0 = static_cast<std::size_t>(sx);
        const std::size_t x1 = std::min(x0 + 1, cw - 1);
        const double fx = sx - static_cast<double>(x0);
        auto at = [&](std::size_t yy, std::size_t xx) { return src[(top + yy) * W + left + xx]; };
        const double upper = at(y0, x0) * (1.0 - fx) + at(y0, x1) * fx;
        const double lower = at(y1, x0) * (1.0 - fx) + at(y1, x1) * fx;
        dst[y * W + x] = upper * (1.0 - fy) + lower * fy;
      }
    }
  }
  return out;
}

double feature_std(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  return std::sqrt(var / static_cast<double>(x.size()));
}

}  // namespace

Sample strong_view(const Sample& x, const AugmentorConfig& config, Rng& rng) {
  const Layout& l = config.layout;
  if (x.features.size() != l.size())
    throw DimensionError("sample has " + std::to_string(x.features.size()) + " features but layout expects " +
                         std::to_string(l.size()));
  Sample out = x;
  std::vector<double>& f = out.features;
  if (config.crop_enabled && l.kind == Layout::Kind::image) {
    f = crop_and_resize(f, l, rng.uniform(config.crop_min, config.crop_max), rng);
  }
  if (config.flip_enabled && rng.uniform() < config.flip_probability) {
    f = weak_view(f, l);
  }
  if (config.noise_enabled && config.noise_sigma > 0.0) {
    const double sigma = config.noise_sigma * feature_std(x.features);
    for (double& v : f) v += sigma * rng.normal();
  }
  if (config.mask_enabled && config.mask_fraction > 0.0) {
    const auto len = static_cast<std::size_t>(std::lround(config.mask_fraction * static_cast<double>(f.size())));
    if (len > 0) {
      const std::size_t start = rng.below(f.size() - len + 1);
      std::fill(f.begin() + start, f.begin() + start + len, 0.0);
    }
  }
  return out;
}

std::pair<Sample, Sample> strong_pair(const Sample& x, const AugmentorConfig& config, Rng& rng) {
  Sample first = strong_view(x, config, rng);
  Sample second = strong_view(x, config, rng);
  return {std::move(first), std::move(second)};
}

std::pair<Sample, Sample> strong_pair_at(const Sample& x, const AugmentorConfig& config, std::uint64_t iteration,
                                         std::uint64_t slot) {
  Rng first_rng = Rng::substream(config.seed, {iteration, slot, 0});
  Rng second_rng = Rng::substream(config.seed, {iteration, slot, 1});
  return {strong_view(x, config, first_rng), strong_view(x, config, second_rng)};
}

}  // namespace sdc

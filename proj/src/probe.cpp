#include "sdc/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdc/adam.hpp"
#include "sdc/errors.hpp"
#include "sdc/rng.hpp"

namespace sdc {

std::vector<std::size_t> stratified_subset(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("label fraction must lie in (0, 1]");
  if (fraction * static_cast<double>(dataset.size()) < static_cast<double>(dataset.num_classes()))
    throw ConfigError("label fraction " + std::to_string(fraction) + " of " + std::to_string(dataset.size()) +
                      " samples cannot cover " + std::to_string(dataset.num_classes()) + " classes");
  std::vector<std::size_t> out;
  const auto& members = dataset.class_members();
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::vector<std::size_t> order = members[c];
    Rng rng = Rng::substream(seed, {c});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto take = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(order.size()) + 1e-9));
    if (take == 0)
      throw ConfigError("class " + std::to_string(c) + " has no labeled samples at fraction " +
                        std::to_string(fraction));
    out.insert(out.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Tensor representations(const Encoder& encoder, const Dataset& dataset, std::span<const std::size_t> indices) {
  const std::size_t d = dataset.feature_dim();
  std::vector<double> rows;
  rows.reserve(indices.size() * d);
  for (std::size_t i : indices) rows.insert(rows.end(), dataset[i].features.begin(), dataset[i].features.end());
  return encoder.forward(Tensor({indices.size(), d}, std::move(rows)), nullptr);
}

ProbeResult run_probe(const Encoder& encoder, const Dataset& train, const Dataset& test, const ProbeOptions& options) {
  if (test.size() == 0) throw ConfigError("probe needs a non-empty test split");
  if (options.batch_size == 0) throw ConfigError("probe batch size must be positive");
  const auto labeled = stratified_subset(train, options.label_fraction, options.seed);
  const Tensor train_h = representations(encoder, train, labeled);
  std::vector<std::size_t> all_test(test.size());
  std::iota(all_test.begin(), all_test.end(), 0);
  const Tensor test_h = representations(encoder, test, all_test);

  const std::size_t n = labeled.size(), d = train_h.cols(), classes = train.num_classes();
  std::vector<std::uint32_t> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = train[labeled[i]].label();

  // Standardize with labeled-set statistics.
  std::vector<double> mu(d, 0.0), sd(d, 0.0);
  const auto H = train_h.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mu[j] += H[i * d + j];
  for (double& v : mu) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) sd[j] += (H[i * d + j] - mu[j]) * (H[i * d + j] - mu[j]);
  for (double& v : sd) v = std::max(std::sqrt(v / static_cast<double>(n)), 1e-8);
  auto standardized = [&](const Tensor& t) {
    std::vector<double> out(t.data().begin(), t.data().end());
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] = (out[i * d + j] - mu[j]) / sd[j];
    return out;
  };
  const std::vector<double> X = standardized(train_h);

  Tensor weight = Tensor::zeros({d, classes}, true);
  Tensor bias = Tensor::zeros({1, classes}, true);
  std::vector<Tensor> params{weight, bias};
  AdamOptions adam;
  adam.learning_rate = options.learning_rate;
  adam.weight_decay = 0.0;
  AdamState state = make_adam_state(params, adam);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> logits(classes);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    Rng rng = Rng::substream(options.seed, {0x50524f42ULL, epoch});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t end = std::min(n, start + options.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      auto dw = weight.mutable_grad();
      auto db = bias.mutable_grad();
      std::fill(dw.begin(), dw.end(), 0.0);
      std::fill(db.begin(), db.end(), 0.0);
      const auto W = weight.data();
      const auto B = bias.data();
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const double* x = X.data() + i * d;
        double max_logit = -INFINITY;
        for (std::size_t c = 0; c < classes; ++c) {
          double v = B[c];
          for (std::size_t j = 0; j < d; ++j) v += x[j] * W[j * classes + c];
          logits[c] = v;
          max_logit = std::max(max_logit, v);
        }
        double total = 0.0;
        for (double& v : logits) {
          v = std::exp(v - max_logit);
          total += v;
        }
        // d CE / d logit = softmax - onehot
        for (std::size_t c = 0; c < classes; ++c) {
          const double g = (logits[c] / total - (c == y[i] ? 1.0 : 0.0)) * scale;
          db[c] += g;
          for (std::size_t j = 0; j < d; ++j) dw[j * classes + c] += g * x[j];
        }
      }
      adam_step(state, params);
    }
  }

  const std::vector<double> Xt = standardized(test_h);
  const auto W = weight.data();
  const auto B = bias.data();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    std::size_t best = 0;
    double best_v = -INFINITY;
    for (std::size_t c = 0; c < classes; ++c) {
      double v = B[c];
      for (std::size_t j = 0; j < d; ++j) v += Xt[i * d + j] * W[j * classes + c];
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    if (best == test[i].label()) ++correct;
  }
  return {static_cast<double>(correct) / static_cast<double>(test.size()), n, test.size()};
}

}  // namespace sdc

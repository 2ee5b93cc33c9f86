#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sdc/rng.hpp"
#include "sdc/tensor.hpp"

namespace sdc::oracle {

// Central differences of a scalar function of every entry of x, evaluated on
// a private copy so the caller's tensor is never perturbed.
inline std::vector<double> numeric_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                        double eps = 1e-6) {
  Tensor probe = x.detach();
  std::vector<double> g(probe.numel());
  auto v = probe.mutable_data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + eps;
    const double up = f(probe);
    v[i] = keep - eps;
    const double down = f(probe);
    v[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

inline double max_rel_err(std::span<const double> got, std::span<const double> want) {
  double diff = 0.0, scale = 1e-12;
  for (std::size_t i = 0; i < want.size(); ++i) {
    diff = std::max(diff, std::abs(got[i] - want[i]));
    scale = std::max(scale, std::abs(want[i]));
  }
  return diff / scale;
}

inline Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = true) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.mutable_data()) v = rng.normal();
  return t;
}

inline Tensor unit_rows(std::size_t rows, std::size_t dim, Rng& rng) {
  Tensor t = random_tensor({rows, dim}, rng, false);
  auto d = t.mutable_data();
  for (std::size_t r = 0; r < rows; ++r) {
    double n = 0.0;
    for (std::size_t j = 0; j < dim; ++j) n += d[r * dim + j] * d[r * dim + j];
    n = std::sqrt(n);
    for (std::size_t j = 0; j < dim; ++j) d[r * dim + j] /= n;
  }
  return t;
}

}  // namespace sdc::oracle

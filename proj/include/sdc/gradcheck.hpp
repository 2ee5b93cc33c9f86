#pragma once

// Finite-difference checks of the contrastive objective. These evaluate the
// loss forward only, so they are independent of the tape's backward rules and
// of the closed-form gradients they are compared with.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdc/objective.hpp"
#include "sdc/rng.hpp"

namespace sdc {

// Central differences of f at x, step eps, one coordinate at a time.
std::vector<double> finite_difference(const std::function<double(const Tensor&)>& f, const Tensor& x, double eps);

// max_i |a_i - b_i| / max(max_i |b_i|, 1e-12)
double relative_error(std::span<const double> a, std::span<const double> b);

// [rows×dim] with i.i.d. Gaussian entries, rows normalized.
Tensor random_unit_rows(std::size_t rows, std::size_t dim, Rng& rng);

struct GradientCheckCase {
  std::size_t pairs = 2;
  std::size_t dim = 4;
  double temperature = 0.5;
  std::uint64_t seed = 0;
};

struct GradientCheckResult {
  GradientCheckCase spec;
  double autodiff_error = 0.0;       // full loss, all rows
  double anchor_term_error = 0.0;     // worst anchor
  double positive_term_error = 0.0;  // worst anchor
  bool autodiff_ok = false;
  bool anchor_term_ok = false;
  bool positive_term_ok = false;
};

// 50 cases cycling pairs {2,4,8}, dim {4,16,32} and τ {0.07, 0.5}.
std::vector<GradientCheckCase> standard_gradient_cases(std::uint64_t seed = 2024);

GradientCheckResult check_gradients(const GradientCheckCase& spec, double tolerance = 1e-5, double eps = 1e-6);

}  // namespace sdc

#include "sdc/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sdc {

std::vector<double> finite_difference(const std::function<double(const Tensor&)>& f, const Tensor& x, double eps) {
  std::vector<double> grad(x.numel());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    Tensor plus = x.detach();
    Tensor minus = x.detach();
    plus.mutable_data()[i] += eps;
    minus.mutable_data()[i] -= eps;
    grad[i] = (f(plus) - f(minus)) / (2.0 * eps);
  }
  return grad;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / std::max(scale, 1e-12);
}

Tensor random_unit_rows(std::size_t rows, std::size_t dim, Rng& rng) {
  std::vector<double> data(rows * dim);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      data[r * dim + j] = rng.normal();
      sq += data[r * dim + j] * data[r * dim + j];
    }
    const double norm = std::sqrt(sq);
    for (std::size_t j = 0; j < dim; ++j) data[r * dim + j] /= norm;
  }
  return Tensor({rows, dim}, std::move(data));
}

std::vector<GradientCheckCase> standard_gradient_cases(std::uint64_t seed) {
  const std::size_t pairs[] = {2, 4, 8};
  const std::size_t dims[] = {4, 16, 32};
  const double temps[] = {0.07, 0.5};
  std::vector<GradientCheckCase> out;
  for (std::size_t i = 0; i < 50; ++i)
    out.push_back({pairs[i % 3], dims[(i / 3) % 3], temps[(i / 9) % 2], mix64(seed + i)});
  return out;
}

GradientCheckResult check_gradients(const GradientCheckCase& spec, double tolerance, double eps) {
  GradientCheckResult result;
  result.spec = spec;
  Rng rng(spec.seed);
  const Tensor z = random_unit_rows(2 * spec.pairs, spec.dim, rng);
  const double tau = spec.temperature;

  // Autodiff of the whole loss against differences of the whole loss.
  Tensor leaf = z.detach();
  leaf.set_requires_grad(true);
  Tape tape;
  const Tensor loss = nt_xent_loss(ContrastBatch{leaf, tau}, &tape);
  tape.backward(loss);
  const auto fd = finite_difference([tau](const Tensor& x) { return nt_xent_loss_rows(x, tau).item(); }, z, eps);
  result.autodiff_error = relative_error(leaf.grad(), fd);

  // Closed forms against differences of one anchor term in its own row.
  const ContrastBatch batch{z, tau};
  const std::size_t d = spec.dim;
  for (std::size_t anchor = 0; anchor < 2 * spec.pairs; ++anchor) {
    std::vector<double> numeric(d);
    for (std::size_t k = 0; k < d; ++k) {
      Tensor plus = z.detach(), minus = z.detach();
      plus.mutable_data()[anchor * d + k] += eps;
      minus.mutable_data()[anchor * d + k] -= eps;
      numeric[k] = (anchor_loss(plus, tau, anchor) - anchor_loss(minus, tau, anchor)) / (2.0 * eps);
    }
    const auto anchor_form = analytic_grad_z(batch, anchor, GradientForm::anchor_term);
    const auto positive = analytic_grad_z(batch, anchor, GradientForm::positive_term);
    result.anchor_term_error = std::max(result.anchor_term_error, relative_error(anchor_form, numeric));
    result.positive_term_error = std::max(result.positive_term_error, relative_error(positive, numeric));
  }
  result.autodiff_ok = result.autodiff_error <= tolerance;
  result.anchor_term_ok = result.anchor_term_error <= tolerance;
  result.positive_term_ok = result.positive_term_error <= tolerance;
  return result;
}

}  // namespace sdc

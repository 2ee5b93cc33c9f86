#include "sdc/objective.hpp"

#include <algorithm>
#include <cmath>

#include "sdc/errors.hpp"

namespace sdc {

namespace {

void check_structure(const Tensor& z, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive, got " + std::to_string(temperature));
  if (z.rank() != 2) throw DimensionError("contrast batch must be 2-D, got " + shape_to_string(z.shape()));
  if (z.rows() % 2 != 0) throw ContractError("contrast batch needs an even number of rows");
  if (z.rows() < 4) throw ContractError("contrast batch needs at least two positive pairs");
}

}  // namespace

void ContrastBatch::validate() const {
  check_structure(z, temperature);
  const std::size_t d = z.cols();
  const auto Z = z.data();
  for (std::size_t r = 0; r < z.rows(); ++r) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += Z[r * d + j] * Z[r * d + j];
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-9)
      throw ContractError("contrast batch row " + std::to_string(r) + " is not unit norm");
  }
}

Tensor nt_xent_loss(const ContrastBatch& batch, Tape* tape) {
  batch.validate();
  return nt_xent_loss_rows(batch.z, batch.temperature, tape);
}

Tensor nt_xent_loss_rows(const Tensor& z, double temperature, Tape* tape) {
  check_structure(z, temperature);
  const std::size_t n = z.rows();
  // Logits s_ij = z_i·z_j / τ.
  Tensor logits = div_scalar(matmul(z, transpose(z, tape), tape), temperature, tape);
  std::vector<double> off_diagonal(n * n, 1.0), positive(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    off_diagonal[i * n + i] = 0.0;
    positive[i * n + partner_of(i)] = 1.0;
  }
  const Tensor off_mask({n, n}, std::move(off_diagonal));
  const Tensor pos_mask({n, n}, std::move(positive));
  // For unit rows |z_i·z_j| <= 1, so exp(s_ij) <= exp(1/τ) and no max-shift
  // is needed for the temperatures in use.
  Tensor denominators = sum_rows(mul(exp(logits, tape), off_mask, tape), tape);
  Tensor log_denominators = log(denominators, tape);
  Tensor positive_logits = sum_rows(mul(logits, pos_mask, tape), tape);
  return sum(sub(log_denominators, positive_logits, tape), tape);
}

double anchor_loss(const Tensor& z, double temperature, std::size_t anchor) {
  check_structure(z, temperature);
  const std::size_t n = z.rows(), d = z.cols();
  if (anchor >= n) throw ContractError("anchor " + std::to_string(anchor) + " out of range");
  const auto Z = z.data();
  std::vector<double> logits(n);
  double max_logit = -INFINITY;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += Z[anchor * d + k] * Z[j * d + k];
    logits[j] = dot / temperature;
    max_logit = std::max(max_logit, logits[j]);
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (j != anchor) acc += std::exp(logits[j] - max_logit);
  return max_logit + std::log(acc) - logits[partner_of(anchor)];
}

std::vector<double> per_anchor_losses(const ContrastBatch& batch) {
  batch.validate();
  std::vector<double> out(batch.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = anchor_loss(batch.z, batch.temperature, i);
  return out;
}

double MatchingProbabilities::positive() const {
  const std::size_t partner = partner_of(anchor);
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (rows[k] == partner) return p[k];
  throw ContractError("partner row missing from matching probabilities");
}

MatchingProbabilities matching_probabilities(const ContrastBatch& batch, std::size_t anchor) {
  batch.validate();
  const std::size_t n = batch.rows(), d = batch.z.cols();
  if (anchor >= n) throw ContractError("anchor " + std::to_string(anchor) + " out of range");
  const auto Z = batch.z.data();
  MatchingProbabilities out;
  out.anchor = anchor;
  double max_logit = -INFINITY;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += Z[anchor * d + k] * Z[j * d + k];
    out.rows.push_back(j);
    out.p.push_back(dot / batch.temperature);
    max_logit = std::max(max_logit, out.p.back());
  }
  double total = 0.0;
  for (double& v : out.p) {
    v = std::exp(v - max_logit);
    total += v;
  }
  for (double& v : out.p) v /= total;
  return out;
}

std::vector<double> analytic_grad_z(const ContrastBatch& batch, std::size_t anchor, GradientForm form) {
  const MatchingProbabilities probs = matching_probabilities(batch, anchor);
  const std::size_t d = batch.z.cols();
  const auto Z = batch.z.data();
  const std::size_t partner = partner_of(anchor);
  const std::size_t lead_row = form == GradientForm::anchor_term ? anchor : partner;
  const double p_pos = probs.positive();

  std::vector<double> inner(d);
  for (std::size_t k = 0; k < d; ++k) inner[k] = (1.0 - p_pos) * Z[lead_row * d + k];
  for (std::size_t c = 0; c < probs.rows.size(); ++c) {
    const std::size_t row = probs.rows[c];
    if (row == partner) continue;
    for (std::size_t k = 0; k < d; ++k) inner[k] -= probs.p[c] * Z[row * d + k];
  }
  for (double& v : inner) v *= -1.0 / batch.temperature;
  return inner;
}

}  // namespace sdc

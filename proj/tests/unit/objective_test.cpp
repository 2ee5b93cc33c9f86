#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sdc/errors.hpp"
#include "sdc/objective.hpp"
#include "support.hpp"

using namespace sdc;
using sdc::oracle::max_rel_err;
using sdc::oracle::numeric_grad;
using sdc::oracle::unit_rows;

namespace {

Tensor at_angles(std::initializer_list<double> degrees) {
  std::vector<std::vector<double>> rows;
  for (double d : degrees) {
    const double r = d * std::numbers::pi / 180.0;
    rows.push_back({std::cos(r), std::sin(r)});
  }
  return Tensor::matrix(rows);
}

// Direct evaluation of the summed pairwise softmax loss from its definition.
double loss_oracle(const Tensor& z, double tau) {
  const std::size_t n = z.rows(), d = z.cols();
  auto dot = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += z.at(a, j) * z.at(b, j);
    return s;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = i % 2 == 0 ? i + 1 : i - 1;
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (k != i) denom += std::exp(dot(i, k) / tau);
    total += -std::log(std::exp(dot(i, pos) / tau) / denom);
  }
  return total;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Anchor e0, partner at score s in the (e0, e1) plane, negatives along the
// remaining axes so they are orthogonal to the anchor.
ContrastBatch case_batch(double score, std::size_t pairs, double tau) {
  const std::size_t rows = 2 * pairs, dim = rows;
  std::vector<std::vector<double>> z(rows, std::vector<double>(dim, 0.0));
  const double c = 1.0 - score;
  z[0][0] = 1.0;
  z[1][0] = c;
  z[1][1] = std::sqrt(1.0 - c * c);
  for (std::size_t r = 2; r < rows; ++r) z[r][r] = 1.0;
  return {Tensor::matrix(z), tau};
}

}  // namespace

TEST(NtXent, IdenticalRowsGiveFourLogThree) {
  const auto z = Tensor::matrix({{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}});
  const double loss = nt_xent_loss({z, 0.5}).item();
  EXPECT_NEAR(loss, 4.0 * std::log(3.0), 1e-12);
  EXPECT_NEAR(loss, 4.394, 5e-4);
}

TEST(NtXent, AngleExampleMatchesScalarOracle) {
  const auto z = at_angles({0, 10, 90, 100});
  // Closed form for this geometry: pair similarity cos10°, cross similarities
  // cos90°, cos100°, cos80°.
  const double c10 = std::cos(10 * std::numbers::pi / 180), c80 = std::cos(80 * std::numbers::pi / 180);
  const double tau = 0.5;
  auto anchor = [&](double pos, double n1, double n2) {
    return -std::log(std::exp(pos / tau) / (std::exp(pos / tau) + std::exp(n1 / tau) + std::exp(n2 / tau)));
  };
  // Row 0 sees rows 2,3 at 90°,100°; row 1 at 80°,90°; row 2 at 90°,80°; row 3 at 100°,90°.
  const double expected = anchor(c10, 0.0, -c80) + anchor(c10, c80, 0.0) + anchor(c10, 0.0, c80) +
                          anchor(c10, -c80, 0.0);
  EXPECT_NEAR(nt_xent_loss({z, tau}).item(), expected, 1e-12);
  EXPECT_NEAR(nt_xent_loss({z, tau}).item(), loss_oracle(z, tau), 1e-12);
}

TEST(NtXent, MatchesOracleOnRandomBatches) {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto z = unit_rows(2 * (2 + t % 5), 3 + t % 7, rng);
    const double tau = t % 2 ? 0.07 : 0.5;
    EXPECT_NEAR(nt_xent_loss({z, tau}).item() / loss_oracle(z, tau), 1.0, 1e-12);
  }
}

TEST(NtXent, RotationInvariance) {
  Rng rng(4);
  const auto z = unit_rows(8, 2, rng);
  const double th = 0.7;
  std::vector<std::vector<double>> rotated;
  for (std::size_t r = 0; r < 8; ++r)
    rotated.push_back({std::cos(th) * z.at(r, 0) - std::sin(th) * z.at(r, 1),
                       std::sin(th) * z.at(r, 0) + std::cos(th) * z.at(r, 1)});
  EXPECT_NEAR(nt_xent_loss({z, 0.5}).item(), nt_xent_loss({Tensor::matrix(rotated), 0.5}).item(), 1e-12);
}

TEST(NtXent, LossFallsAsPositiveSimilarityRises) {
  // Only the first pair's similarity moves; every other dot product stays put.
  const double r = 1.0 / std::sqrt(2.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double angle : {120.0, 90.0, 60.0, 30.0, 5.0}) {
    const double a = angle * std::numbers::pi / 180.0;
    const auto z = Tensor::matrix({{1, 0, 0, 0}, {std::cos(a), std::sin(a), 0, 0}, {0, 0, 1, 0}, {0, 0, r, r}});
    const double loss = nt_xent_loss({z, 0.5}).item();
    EXPECT_LT(loss, previous) << angle;
    previous = loss;
  }
}

TEST(NtXent, ContractViolations) {
  EXPECT_THROW(nt_xent_loss({Tensor::matrix({{1, 0}, {0, 1}}), 0.5}), ContractError);
  EXPECT_THROW(nt_xent_loss({at_angles({0, 1, 2, 3}), 0.0}), DomainError);
  EXPECT_THROW(nt_xent_loss({at_angles({0, 1, 2, 3}), -1.0}), DomainError);
  EXPECT_THROW(nt_xent_loss({Tensor::matrix({{1, 0}, {0, 1}, {1, 0}, {0, 2}}), 0.5}), ContractError);
  EXPECT_THROW(nt_xent_loss({Tensor::matrix({{1, 0}, {0, 1}, {1, 0}}), 0.5}), ContractError);
}

TEST(NtXent, AutodiffMatchesFiniteDifferences) {
  Rng rng(77);
  for (std::size_t pairs : {2u, 4u, 8u}) {
    Tensor z = unit_rows(2 * pairs, 16, rng);
    z.set_requires_grad(true);
    Tape tape;
    tape.backward(nt_xent_loss({z, 0.07}, &tape));
    const auto fd = numeric_grad([](const Tensor& x) { return nt_xent_loss_rows(x, 0.07).item(); }, z);
    EXPECT_LE(max_rel_err(z.grad(), fd), 1e-5);
  }
}

TEST(NtXent, PerAnchorLossesSumToTotal) {
  Rng rng(12);
  const ContrastBatch b{unit_rows(10, 6, rng), 0.3};
  const auto parts = per_anchor_losses(b);
  ASSERT_EQ(parts.size(), 10u);
  double s = 0.0;
  for (double p : parts) s += p;
  EXPECT_NEAR(s, nt_xent_loss(b).item(), 1e-11);
}

TEST(Matching, EquidistantCandidatesAreUniform) {
  const auto z = Tensor::matrix({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
  const auto u = l2_normalize_rows(z);
  const auto m = matching_probabilities({u, 0.5}, 2);
  EXPECT_EQ(m.rows, (std::vector<std::size_t>{0, 1, 3}));
  for (double p : m.p) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(Matching, SharpPositiveDominates) {
  // Anchor equals its partner; negatives orthogonal.
  const auto b = case_batch(0.0, 4, 0.05);
  EXPECT_GT(matching_probabilities(b, 0).positive(), 0.99);
}

TEST(Matching, SumsToOneOnRandomBatches) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const ContrastBatch b{unit_rows(2 * (2 + t % 7), 5, rng), t % 2 ? 0.07 : 0.5};
    const auto m = matching_probabilities(b, t % b.rows());
    double s = 0.0;
    for (double p : m.p) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(ClosedForm, PositiveTermFormMatchesFiniteDifferences) {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const ContrastBatch b{unit_rows(8, 6, rng), 0.5};
    const std::size_t anchor = t % 8;
    const auto fd = numeric_grad(
        [&](const Tensor& z) { return anchor_loss(z, b.temperature, anchor); }, b.z);
    std::vector<double> fd_row(fd.begin() + anchor * 6, fd.begin() + (anchor + 1) * 6);
    EXPECT_LE(max_rel_err(analytic_grad_z(b, anchor, GradientForm::positive_term), fd_row), 1e-7);
    // Pairing (1 − p+) with the anchor itself instead of its partner does not agree.
    EXPECT_GT(max_rel_err(analytic_grad_z(b, anchor, GradientForm::anchor_term), fd_row), 1e-3);
  }
}

TEST(ClosedForm, VanishesWhenPositiveProbabilityApproachesOne) {
  // Anchor = partner, negatives orthogonal, sharp temperature: 1 − p+ ≈ 0 and
  // each negative weight is tiny.
  const auto b = case_batch(0.0, 2, 0.02);
  EXPECT_LT(norm(analytic_grad_z(b, 0, GradientForm::positive_term)), 1e-15);
  EXPECT_LT(norm(analytic_grad_z(b, 0, GradientForm::anchor_term)), 1e-15);
}

TEST(ClosedForm, HalvingTemperatureDoublesLeadingFactor) {
  // Holding probabilities fixed means rescaling logits; here the anchor
  // similarities all vanish except the partner's, so we compare the
  // bracketed term via the explicit 1/τ factor on a uniform batch.
  const auto u = l2_normalize_rows(Tensor::matrix({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}));
  const auto g1 = analytic_grad_z({u, 0.5}, 0, GradientForm::positive_term);
  const auto g2 = analytic_grad_z({u, 0.25}, 0, GradientForm::positive_term);
  // Orthogonal rows: probabilities are uniform at any τ.
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g2[j], 2.0 * g1[j], 1e-15);
}

TEST(ClosedForm, GradientNormGrowsWithScore) {
  double previous = -1.0;
  for (double s : {0.01, 0.5, 1.0, 1.5}) {
    const double n = norm(analytic_grad_z(case_batch(s, 4, 0.5), 0, GradientForm::positive_term));
    EXPECT_GT(n, previous) << "score " << s;
    previous = n;
  }
}

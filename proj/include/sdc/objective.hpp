#pragma once

// NT-Xent contrastive loss and the closed-form per-anchor gradient.
//
// Rows of the batch come in positive pairs (2k, 2k+1). Every row acts as an
// anchor once; its candidates are the other 2N-1 rows, of which its partner
// is the positive and the remaining 2N-2 are negatives.

#include <cstddef>
#include <vector>

#include "sdc/tensor.hpp"

namespace sdc {

struct ContrastBatch {
  Tensor z;  // [2N×d], unit-norm rows
  double temperature = 0.5;

  std::size_t rows() const { return z.rows(); }
  std::size_t pairs() const { return z.rows() / 2; }

  // Throws unless N >= 2, rows are unit norm within 1e-9 and temperature > 0.
  void validate() const;
};

inline std::size_t partner_of(std::size_t row) { return row ^ std::size_t{1}; }

// Σ over all 2N anchors of -log softmax(positive). Tape-recorded when a tape
// is given and z requires grad.
Tensor nt_xent_loss(const ContrastBatch& batch, Tape* tape = nullptr);

// Same sum over arbitrary rows: only the pairing structure and τ are checked,
// so finite-difference probes may step off the unit sphere.
Tensor nt_xent_loss_rows(const Tensor& z, double temperature, Tape* tape = nullptr);

// Per-anchor loss terms, evaluated directly without the tape.
std::vector<double> per_anchor_losses(const ContrastBatch& batch);

// A single anchor's loss term over arbitrary rows.
double anchor_loss(const Tensor& z, double temperature, std::size_t anchor);

// Softmax of z_anchor·z_j/τ over the candidate rows j != anchor.
struct MatchingProbabilities {
  std::size_t anchor = 0;
  std::vector<std::size_t> rows;  // ascending, anchor excluded
  std::vector<double> p;          // aligned with rows

  double positive() const;
};

MatchingProbabilities matching_probabilities(const ContrastBatch& batch, std::size_t anchor);

// Two closed forms for d loss(anchor) / d z_anchor, holding the other rows fixed:
//   anchor_term:   -(1/τ)·[(1 - p+)·z_anchor  - Σ p-·z-]
//   positive_term: -(1/τ)·[(1 - p+)·z_partner - Σ p-·z-]
enum class GradientForm { anchor_term, positive_term };

std::vector<double> analytic_grad_z(const ContrastBatch& batch, std::size_t anchor, GradientForm form);

}  // namespace sdc

#pragma once

// Dense float64 tensors with a reverse-mode tape.
//
// A Tensor is a shared handle: copies alias the same storage, so parameters
// held by a model and the handles captured by tape nodes see the same data and
// gradient buffers. Operations never mutate their inputs. When a Tape is
// passed and at least one input requires a gradient, the operation records a
// node whose backward rule accumulates into the inputs' gradient buffers.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sdc {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  // Row-major matrix from nested rows; all rows must have equal length.
  static Tensor matrix(const std::vector<std::vector<double>>& rows, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t rows() const;  // 2-D only
  std::size_t cols() const;  // 2-D only

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;  // numel() == 1
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();  // allocates a zero buffer if absent
  void zero_grad();
  void clear_grad();

  // Fresh storage with the same contents; never requires grad.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty when absent
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> impl_;

  const Storage& storage() const;
  Storage& storage();
};

// Records the forward computation for one backward pass.
class Tape {
 public:
  using BackwardFn = std::function<void(std::span<const double> out_grad)>;

  void record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward);

  // Populates gradients of every requires_grad tensor that `loss` depends on.
  // Leaf gradients accumulate across calls; intermediate gradients are reset
  // at the start of each call so a repeated call adds exactly one more
  // gradient to the leaves.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// ---- operations ------------------------------------------------------------
// Each takes an optional tape; with nullptr the call is a plain forward pass.

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor transpose(const Tensor& a, Tape* tape = nullptr);
// x[B×in] · weight[in×out] + bias[1×out] broadcast over rows.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias, Tape* tape = nullptr);

// Elementwise with equal shapes, or one operand having a single element.
Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor div_scalar(const Tensor& a, double divisor, Tape* tape = nullptr);
Tensor relu(const Tensor& a, Tape* tape = nullptr);
Tensor exp(const Tensor& a, Tape* tape = nullptr);
Tensor log(const Tensor& a, Tape* tape = nullptr);

Tensor sum(const Tensor& a, Tape* tape = nullptr);
Tensor mean(const Tensor& a, Tape* tape = nullptr);
// [R×C] -> [R×1]
Tensor sum_rows(const Tensor& a, Tape* tape = nullptr);

// Minimum norm accepted by the normalizers.
inline constexpr double kNormFloor = 1e-12;

// Unit-norm copy of a 1-D tensor.
Tensor l2_normalize(const Tensor& v, Tape* tape = nullptr);
// Each row of a 2-D tensor scaled to unit norm.
Tensor l2_normalize_rows(const Tensor& m, Tape* tape = nullptr);

}  // namespace sdc

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sdc/rng.hpp"
#include "sdc/tensor.hpp"

namespace sdc {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct DenseLayer {
  Tensor weight;  // [in×out]
  Tensor bias;    // [1×out]

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

// Weights and biases uniform in [-1/sqrt(in), 1/sqrt(in)].
DenseLayer make_dense(std::size_t in, std::size_t out, Rng& rng);

// The representation network f. Implementations must be pure functions of
// (parameters, input).
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual Tensor forward(const Tensor& batch, Tape* tape) const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual std::vector<NamedTensor> parameters() const = 0;
};

// Dense layers with relu between them (none after the last).
class MlpEncoder final : public Encoder {
 public:
  explicit MlpEncoder(std::vector<DenseLayer> layers);

  Tensor forward(const Tensor& batch, Tape* tape) const override;
  std::size_t input_dim() const override { return layers_.front().in_dim(); }
  std::size_t output_dim() const override { return layers_.back().out_dim(); }
  std::vector<NamedTensor> parameters() const override;

  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

// h = x. Useful as a raw-feature baseline for the linear probe.
class IdentityEncoder final : public Encoder {
 public:
  explicit IdentityEncoder(std::size_t dim) : dim_(dim) {}

  Tensor forward(const Tensor& batch, Tape*) const override;
  std::size_t input_dim() const override { return dim_; }
  std::size_t output_dim() const override { return dim_; }
  std::vector<NamedTensor> parameters() const override { return {}; }

 private:
  std::size_t dim_;
};

// g: dense -> relu -> dense.
struct ProjectionHead {
  DenseLayer hidden;
  DenseLayer output;
};

Tensor encode(const Encoder& encoder, const Tensor& batch, Tape* tape = nullptr);
// Raw projection; callers normalize rows.
Tensor project(const ProjectionHead& head, const Tensor& h, Tape* tape = nullptr);

struct ModelConfig {
  std::size_t input_dim = 32;
  std::vector<std::size_t> encoder_hidden = {256, 128};
  std::size_t representation_dim = 64;
  std::size_t projection_hidden = 64;
  std::size_t projection_dim = 32;
};

class Model {
 public:
  Model(std::unique_ptr<Encoder> encoder, ProjectionHead head);

  const Encoder& encoder() const { return *encoder_; }
  const ProjectionHead& head() const { return head_; }

  // Unit-norm projections z, one row per input row.
  Tensor embed(const Tensor& batch, Tape* tape = nullptr) const;
  // Projections before normalization.
  Tensor project_raw(const Tensor& batch, Tape* tape = nullptr) const;

  // Encoder parameters prefixed "encoder.", head parameters prefixed "head.".
  std::vector<NamedTensor> parameters() const;
  std::vector<Tensor> parameter_tensors() const;
  void zero_grad();

  // Rebuilds a model from named parameters (see parameters()). Only the
  // dense encoder layout is supported.
  static Model from_parameters(const std::vector<NamedTensor>& params);

 private:
  std::unique_ptr<Encoder> encoder_;
  ProjectionHead head_;
};

Model make_model(const ModelConfig& config, std::uint64_t seed);

}  // namespace sdc

#include "sdc/model.hpp"

#include <cmath>
#include <map>

#include "sdc/errors.hpp"

namespace sdc {

DenseLayer make_dense(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::vector<double> w(in * out);
  for (double& v : w) v = rng.uniform(-bound, bound);
  std::vector<double> b(out);
  for (double& v : b) v = rng.uniform(-bound, bound);
  return {Tensor({in, out}, std::move(w), true), Tensor({1, out}, std::move(b), true)};
}

MlpEncoder::MlpEncoder(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ContractError("encoder needs at least one layer");
  for (std::size_t i = 1; i < layers_.size(); ++i)
    if (layers_[i - 1].out_dim() != layers_[i].in_dim())
      throw DimensionError("encoder layer " + std::to_string(i) + " expects " +
                           std::to_string(layers_[i].in_dim()) + " inputs but previous layer emits " +
                           std::to_string(layers_[i - 1].out_dim()));
}

Tensor MlpEncoder::forward(const Tensor& batch, Tape* tape) const {
  if (batch.rank() != 2 || batch.cols() != input_dim())
    throw DimensionError("encoder expects [Bx" + std::to_string(input_dim()) + "] input, got " +
                         shape_to_string(batch.shape()));
  Tensor x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = linear(x, layers_[i].weight, layers_[i].bias, tape);
    if (i + 1 < layers_.size()) x = relu(x, tape);
  }
  return x;
}

std::vector<NamedTensor> MlpEncoder::parameters() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.push_back({"layer" + std::to_string(i) + ".weight", layers_[i].weight});
    out.push_back({"layer" + std::to_string(i) + ".bias", layers_[i].bias});
  }
  return out;
}

Tensor IdentityEncoder::forward(const Tensor& batch, Tape*) const {
  if (batch.rank() != 2 || batch.cols() != dim_)
    throw DimensionError("identity encoder expects [Bx" + std::to_string(dim_) + "] input, got " +
                         shape_to_string(batch.shape()));
  return batch;
}

Tensor encode(const Encoder& encoder, const Tensor& batch, Tape* tape) {
  return encoder.forward(batch, tape);
}

Tensor project(const ProjectionHead& head, const Tensor& h, Tape* tape) {
  if (h.rank() != 2 || h.cols() != head.hidden.in_dim())
    throw DimensionError("projection head expects [Bx" + std::to_string(head.hidden.in_dim()) + "] input, got " +
                         shape_to_string(h.shape()));
  Tensor x = relu(linear(h, head.hidden.weight, head.hidden.bias, tape), tape);
  return linear(x, head.output.weight, head.output.bias, tape);
}

Model::Model(std::unique_ptr<Encoder> encoder, ProjectionHead head)
    : encoder_(std::move(encoder)), head_(std::move(head)) {
  if (!encoder_) throw ContractError("model needs an encoder");
  if (head_.hidden.in_dim() != encoder_->output_dim())
    throw DimensionError("projection head input " + std::to_string(head_.hidden.in_dim()) +
                         " does not match encoder output " + std::to_string(encoder_->output_dim()));
  if (head_.hidden.out_dim() != head_.output.in_dim())
    throw DimensionError("projection head layers do not compose");
}

Tensor Model::project_raw(const Tensor& batch, Tape* tape) const {
  return project(head_, encode(*encoder_, batch, tape), tape);
}

Tensor Model::embed(const Tensor& batch, Tape* tape) const {
  return l2_normalize_rows(project_raw(batch, tape), tape);
}

std::vector<NamedTensor> Model::parameters() const {
  std::vector<NamedTensor> out;
  for (auto& p : encoder_->parameters()) out.push_back({"encoder." + p.name, p.tensor});
  out.push_back({"head.hidden.weight", head_.hidden.weight});
  out.push_back({"head.hidden.bias", head_.hidden.bias});
  out.push_back({"head.output.weight", head_.output.weight});
  out.push_back({"head.output.bias", head_.output.bias});
  return out;
}

std::vector<Tensor> Model::parameter_tensors() const {
  std::vector<Tensor> out;
  for (auto& p : parameters()) out.push_back(p.tensor);
  return out;
}

void Model::zero_grad() {
  for (auto& t : parameter_tensors()) t.zero_grad();
}

Model Model::from_parameters(const std::vector<NamedTensor>& params) {
  std::map<std::string, Tensor> by_name;
  for (const auto& p : params) {
    if (!by_name.emplace(p.name, p.tensor).second) throw DataError("duplicate parameter '" + p.name + "'");
  }
  auto take = [&](const std::string& name) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("missing parameter '" + name + "'");
    Tensor t = it->second;
    by_name.erase(it);
    t.set_requires_grad(true);
    return t;
  };
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0;; ++i) {
    const std::string prefix = "encoder.layer" + std::to_string(i);
    if (!by_name.count(prefix + ".weight")) break;
    layers.push_back({take(prefix + ".weight"), take(prefix + ".bias")});
  }
  ProjectionHead head{{take("head.hidden.weight"), take("head.hidden.bias")},
                      {take("head.output.weight"), take("head.output.bias")}};
  if (!by_name.empty()) throw DataError("unexpected parameter '" + by_name.begin()->first + "'");
  return Model(std::make_unique<MlpEncoder>(std::move(layers)), std::move(head));
}

Model make_model(const ModelConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t in = config.input_dim;
  for (std::size_t width : config.encoder_hidden) {
    layers.push_back(make_dense(in, width, rng));
    in = width;
  }
  layers.push_back(make_dense(in, config.representation_dim, rng));
  ProjectionHead head{make_dense(config.representation_dim, config.projection_hidden, rng),
                      make_dense(config.projection_hidden, config.projection_dim, rng)};
  return Model(std::make_unique<MlpEncoder>(std::move(layers)), std::move(head));
}

}  // namespace sdc

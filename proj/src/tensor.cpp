#include "sdc/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "sdc/errors.hpp"

namespace sdc {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2)
    throw DimensionError(std::string(op) + ": expected a 2-D tensor, got " +
                         shape_to_string(t.shape()));
}

bool tracks(Tape* tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

}  // namespace

// ---- Tensor ----------------------------------------------------------------

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (std::size_t d : shape)
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  if (product(shape) != data.size())
    throw DimensionError("shape " + shape_to_string(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  impl_ = std::make_shared<Storage>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::matrix(const std::vector<std::vector<double>>& rows, bool requires_grad) {
  if (rows.empty()) throw DimensionError("matrix needs at least one row");
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw DimensionError("ragged matrix rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(data), requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values), requires_grad);
}

const Tensor::Storage& Tensor::storage() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return *impl_;
}

Tensor::Storage& Tensor::storage() {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return storage().shape; }
std::size_t Tensor::numel() const { return storage().data.size(); }

std::size_t Tensor::rows() const {
  require_matrix(*this, "rows");
  return shape()[0];
}

std::size_t Tensor::cols() const {
  require_matrix(*this, "cols");
  return shape()[1];
}

std::span<const double> Tensor::data() const { return storage().data; }
std::span<double> Tensor::mutable_data() { return storage().data; }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on a tensor of shape " + shape_to_string(shape()));
  return storage().data[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  return storage().data[row * cols() + col];
}

bool Tensor::requires_grad() const { return storage().requires_grad; }
void Tensor::set_requires_grad(bool flag) { storage().requires_grad = flag; }

bool Tensor::has_grad() const { return !storage().grad.empty(); }
std::span<const double> Tensor::grad() const { return storage().grad; }

std::span<double> Tensor::mutable_grad() {
  Storage& s = storage();
  if (s.grad.empty()) s.grad.assign(s.data.size(), 0.0);
  return s.grad;
}

void Tensor::zero_grad() {
  Storage& s = storage();
  s.grad.assign(s.data.size(), 0.0);
}

void Tensor::clear_grad() { storage().grad.clear(); }

Tensor Tensor::detach() const {
  return Tensor(shape(), std::vector<double>(data().begin(), data().end()));
}

// ---- Tape ------------------------------------------------------------------

void Tape::record(std::vector<Tensor> inputs, Tensor output, BackwardFn backward) {
  nodes_.push_back(Node{std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw ContractError("backward requires a scalar loss, got shape " + shape_to_string(loss.shape()));

  bool produced = false;
  for (Node& node : nodes_) {
    node.output.zero_grad();
    if (node.output.same_storage(loss)) produced = true;
  }
  Tensor seed = loss;
  if (!produced) {
    if (seed.requires_grad()) seed.mutable_grad()[0] += 1.0;
    return;
  }
  seed.mutable_grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward(it->output.grad());
}

// ---- matrix ops ------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw DimensionError("matmul: inner dimensions disagree: " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  std::vector<double> out(m * n, 0.0);
  const auto A = a.data();
  const auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* c_row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double a_ip = A[i * k + p];
      const double* b_row = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) c_row[j] += a_ip * b_row[j];
    }
  }
  const bool track = tracks(tape, {&a, &b});
  Tensor result({m, n}, std::move(out), track);
  if (track) {
    tape->record({a, b}, result, [a = Tensor(a), b = Tensor(b), m, k, n](std::span<const double> dc) mutable {
      if (a.requires_grad()) {
        auto da = a.mutable_grad();
        const auto B = b.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            const double* dc_row = dc.data() + i * n;
            const double* b_row = B.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) acc += dc_row[j] * b_row[j];
            da[i * k + p] += acc;
          }
      }
      if (b.requires_grad()) {
        auto db = b.mutable_grad();
        const auto A = a.data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double a_ip = A[i * k + p];
            const double* dc_row = dc.data() + i * n;
            double* db_row = db.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) db_row[j] += a_ip * dc_row[j];
          }
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& a, Tape* tape) {
  require_matrix(a, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  const auto A = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = A[i * c + j];
  const bool track = tracks(tape, {&a});
  Tensor result({c, r}, std::move(out), track);
  if (track) {
    tape->record({a}, result, [a = Tensor(a), r, c](std::span<const double> g) mutable {
      auto da = a.mutable_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) da[i * c + j] += g[j * r + i];
    });
  }
  return result;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias, Tape* tape) {
  require_matrix(weight, "linear");
  const std::size_t out_dim = weight.cols();
  if (bias.numel() != out_dim)
    throw DimensionError("linear: bias " + shape_to_string(bias.shape()) + " does not match weight " +
                         shape_to_string(weight.shape()));
  Tensor prod = matmul(x, weight, tape);
  const std::size_t rows = prod.rows();
  std::vector<double> out(prod.data().begin(), prod.data().end());
  const auto b = bias.data();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < out_dim; ++j) out[i * out_dim + j] += b[j];
  const bool track = tracks(tape, {&prod, &bias});
  Tensor result({rows, out_dim}, std::move(out), track);
  if (track) {
    tape->record({prod, bias}, result, [prod, bias = Tensor(bias), rows, out_dim](std::span<const double> g) mutable {
      if (prod.requires_grad()) {
        auto dp = prod.mutable_grad();
        for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto db = bias.mutable_grad();
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < out_dim; ++j) db[j] += g[i * out_dim + j];
      }
    });
  }
  return result;
}

// ---- elementwise -----------------------------------------------------------

namespace {

enum class Binary { add, sub, mul };

Tensor binary(Binary op, const Tensor& a, const Tensor& b, Tape* tape) {
  const bool a_scalar = a.numel() == 1 && b.numel() != 1;
  const bool b_scalar = b.numel() == 1 && a.numel() != 1;
  if (!a_scalar && !b_scalar && a.shape() != b.shape())
    throw DimensionError("elementwise: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
  const Shape out_shape = a_scalar ? b.shape() : a.shape();
  const std::size_t n = a_scalar ? b.numel() : a.numel();
  const auto A = a.data();
  const auto B = b.data();
  auto av = [&](std::size_t i) { return a_scalar ? A[0] : A[i]; };
  auto bv = [&](std::size_t i) { return b_scalar ? B[0] : B[i]; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (op) {
      case Binary::add: out[i] = av(i) + bv(i); break;
      case Binary::sub: out[i] = av(i) - bv(i); break;
      case Binary::mul: out[i] = av(i) * bv(i); break;
    }
  }
  const bool track = tracks(tape, {&a, &b});
  Tensor result(out_shape, std::move(out), track);
  if (track) {
    tape->record({a, b}, result, [op, a = Tensor(a), b = Tensor(b), a_scalar, b_scalar, n](std::span<const double> g) mutable {
      const auto A = a.data();
      const auto B = b.data();
      if (a.requires_grad()) {
        auto da = a.mutable_grad();
        for (std::size_t i = 0; i < n; ++i) {
          double d = g[i];
          if (op == Binary::mul) d *= b_scalar ? B[0] : B[i];
          da[a_scalar ? 0 : i] += d;
        }
      }
      if (b.requires_grad()) {
        auto db = b.mutable_grad();
        for (std::size_t i = 0; i < n; ++i) {
          double d = g[i];
          if (op == Binary::sub) d = -d;
          if (op == Binary::mul) d *= a_scalar ? A[0] : A[i];
          db[b_scalar ? 0 : i] += d;
        }
      }
    });
  }
  return result;
}

// Unary op whose derivative is expressed through the input x and output y.
template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Tape* tape, Fwd fwd, Deriv deriv) {
  const auto A = a.data();
  std::vector<double> out(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = fwd(A[i]);
  const bool track = tracks(tape, {&a});
  Tensor result(a.shape(), std::move(out), track);
  if (track) {
    Tensor y = result;
    tape->record({a}, result, [a = Tensor(a), y, deriv](std::span<const double> g) mutable {
      auto da = a.mutable_grad();
      const auto x = a.data();
      const auto yv = y.data();
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i] * deriv(x[i], yv[i]);
    });
  }
  return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) { return binary(Binary::add, a, b, tape); }
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape) { return binary(Binary::sub, a, b, tape); }
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) { return binary(Binary::mul, a, b, tape); }

Tensor div_scalar(const Tensor& a, double divisor, Tape* tape) {
  if (divisor == 0.0) throw DomainError("div_scalar: division by zero");
  return unary(
      a, tape, [divisor](double x) { return x / divisor; },
      [divisor](double, double) { return 1.0 / divisor; });
}

Tensor relu(const Tensor& a, Tape* tape) {
  return unary(
      a, tape, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a, Tape* tape) {
  return unary(
      a, tape, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a, Tape* tape) {
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (!(a.data()[i] > 0.0))
      throw DomainError("log of non-positive value " + std::to_string(a.data()[i]) + " at index " +
                        std::to_string(i));
  return unary(
      a, tape, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

// ---- reductions ------------------------------------------------------------

Tensor sum(const Tensor& a, Tape* tape) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  const bool track = tracks(tape, {&a});
  Tensor result = Tensor::scalar(acc, track);
  if (track) {
    tape->record({a}, result, [a = Tensor(a)](std::span<const double> g) mutable {
      auto da = a.mutable_grad();
      for (double& d : da) d += g[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& a, Tape* tape) {
  return div_scalar(sum(a, tape), static_cast<double>(a.numel()), tape);
}

Tensor sum_rows(const Tensor& a, Tape* tape) {
  require_matrix(a, "sum_rows");
  const std::size_t r = a.rows(), c = a.cols();
  const auto A = a.data();
  std::vector<double> out(r, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i] += A[i * c + j];
  const bool track = tracks(tape, {&a});
  Tensor result({r, 1}, std::move(out), track);
  if (track) {
    tape->record({a}, result, [a = Tensor(a), r, c](std::span<const double> g) mutable {
      auto da = a.mutable_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) da[i * c + j] += g[i];
    });
  }
  return result;
}

// ---- normalization ---------------------------------------------------------

namespace {

// Normalizes `count` contiguous vectors of length `dim`.
Tensor normalize_blocks(const Tensor& in, std::size_t count, std::size_t dim, Tape* tape) {
  const auto X = in.data();
  std::vector<double> out(X.size());
  std::vector<double> norms(count);
  for (std::size_t r = 0; r < count; ++r) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) sq += X[r * dim + j] * X[r * dim + j];
    const double norm = std::sqrt(sq);
    if (norm < kNormFloor)
      throw DomainError("l2_normalize: vector " + std::to_string(r) + " has norm " + std::to_string(norm) +
                        " below the 1e-12 floor");
    norms[r] = norm;
    for (std::size_t j = 0; j < dim; ++j) out[r * dim + j] = X[r * dim + j] / norm;
  }
  const bool track = tracks(tape, {&in});
  Tensor result(in.shape(), std::move(out), track);
  if (track) {
    Tensor y = result;
    tape->record({in}, result, [in = Tensor(in), y, norms, count, dim](std::span<const double> g) mutable {
      auto dx = in.mutable_grad();
      const auto Y = y.data();
      for (std::size_t r = 0; r < count; ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) dot += Y[r * dim + j] * g[r * dim + j];
        for (std::size_t j = 0; j < dim; ++j)
          dx[r * dim + j] += (g[r * dim + j] - Y[r * dim + j] * dot) / norms[r];
      }
    });
  }
  return result;
}

}  // namespace

Tensor l2_normalize(const Tensor& v, Tape* tape) {
  if (v.rank() != 1) throw DimensionError("l2_normalize expects a 1-D tensor, got " + shape_to_string(v.shape()));
  return normalize_blocks(v, 1, v.numel(), tape);
}

Tensor l2_normalize_rows(const Tensor& m, Tape* tape) {
  require_matrix(m, "l2_normalize_rows");
  return normalize_blocks(m, m.rows(), m.cols(), tape);
}

}  // namespace sdc

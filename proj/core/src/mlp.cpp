#include "dsacd/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace dsacd::nn {

namespace {

// tanh(softplus(x)) = (e^2x + 2e^x) / (e^2x + 2e^x + 2), one exp instead of three
// transcendental calls.
double tanh_softplus(double x) {
  if (x > 20.0) return 1.0;
  const double e = std::exp(x);
  const double n = e * (e + 2.0);
  return n / (n + 2.0);
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::mish:
      return x * tanh_softplus(x);
    case Activation::gelu: {
      constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
      return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
    }
    case Activation::tanh:
      return std::tanh(x);
  }
  return x;
}

double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::mish: {
      if (x > 20.0) return 1.0;
      const double e = std::exp(x);
      const double n = e * (e + 2.0);
      const double tsp = n / (n + 2.0);
      const double sig = e / (1.0 + e);
      return tsp + x * (1.0 - tsp * tsp) * sig;
    }
    case Activation::gelu: {
      constexpr double k = 0.7978845608028654;
      const double u = k * (x + 0.044715 * x * x * x);
      const double th = std::tanh(u);
      const double du = k * (1.0 + 3.0 * 0.044715 * x * x);
      return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
    }
    case Activation::tanh: {
      const double th = std::tanh(x);
      return 1.0 - th * th;
    }
  }
  return 1.0;
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "mish") return Activation::mish;
  if (name == "gelu") return Activation::gelu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::mish:
      return "mish";
    case Activation::gelu:
      return "gelu";
    case Activation::tanh:
      return "tanh";
  }
  return "?";
}

Mlp::Mlp(std::vector<Index> layer_sizes, Activation activation)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const Index in = sizes_[l], out = sizes_[l + 1];
    if (in < 1 || out < 1) throw std::invalid_argument("Mlp layer sizes must be positive");
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
  }
  params_ = Vector::Zero(offset);
}

void Mlp::initialize(Rng& rng, double output_scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(L.in));
    const double scale = l + 1 == layers_.size() ? output_scale : 1.0;
    for (Index i = 0; i < L.in * L.out + L.out; ++i)
      params_[L.w_offset + i] = scale * bound * (2.0 * rng.uniform() - 1.0);
  }
}

void Mlp::set_params(const Vector& p) {
  if (p.size() != params_.size())
    throw std::invalid_argument("Mlp::set_params: expected " + std::to_string(params_.size()) +
                                " parameters, got " + std::to_string(p.size()));
  params_ = p;
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
  if (x.rows() != input_dim())
    throw std::invalid_argument("Mlp::forward: input has " + std::to_string(x.rows()) +
                                " rows, expected " + std::to_string(input_dim()));
  if (cache) {
    cache->clear();
    cache->reserve(1 + 2 * (layers_.size() - 1));
    cache->push_back(x);
  }
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    Eigen::Map<const Matrix> w(params_.data() + L.w_offset, L.out, L.in);
    Eigen::Map<const Vector> b(params_.data() + L.b_offset, L.out);
    Matrix z = w * h;
    z.colwise() += b;
    if (l + 1 == layers_.size()) return z;
    Matrix a = z.unaryExpr([this](double v) { return activate(activation_, v); });
    if (cache) {
      cache->push_back(std::move(z));
      cache->push_back(a);
    }
    h = std::move(a);
  }
  return h;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& grad_out, Vector* grad_params) const {
  if (grad_params && grad_params->size() != params_.size())
    throw std::invalid_argument("Mlp::backward: gradient buffer has the wrong size");
  Matrix g = grad_out;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& L = layers_[li];
    const Matrix& input = li == 0 ? cache[0] : cache[2 * li];
    Eigen::Map<const Matrix> w(params_.data() + L.w_offset, L.out, L.in);
    if (grad_params) {
      Eigen::Map<Matrix> gw(grad_params->data() + L.w_offset, L.out, L.in);
      Eigen::Map<Vector> gb(grad_params->data() + L.b_offset, L.out);
      gw.noalias() += g * input.transpose();
      gb += g.rowwise().sum();
    }
    Matrix gin = w.transpose() * g;
    if (li > 0) {
      const Matrix& pre = cache[2 * li - 1];
      gin.array() *= pre.unaryExpr([this](double v) { return activate_grad(activation_, v); }).array();
    }
    g = std::move(gin);
  }
  return g;
}

}  // namespace dsacd::nn

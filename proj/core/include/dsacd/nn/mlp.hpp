#pragma once

#include <string>
#include <vector>

#include "dsacd/random.hpp"
#include "dsacd/types.hpp"

namespace dsacd::nn {

enum class Activation { mish, gelu, tanh };

Activation parse_activation(const std::string& name);
const char* to_string(Activation a);

/// Fully connected network with a linear output layer. Parameters live in a
/// single flat vector (per layer: weight matrix column-major, then bias) so
/// optimizers, soft updates and checkpoints all operate on one buffer.
class Mlp {
 public:
  /// Forward record: {input, pre_0, post_0, pre_1, post_1, ...} over the
  /// hidden layers.
  using Cache = std::vector<Matrix>;

  Mlp() = default;
  Mlp(std::vector<Index> layer_sizes, Activation activation);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization; the output
  /// layer is additionally scaled by `output_scale`.
  void initialize(Rng& rng, double output_scale = 1.0);

  Index input_dim() const { return sizes_.front(); }
  Index output_dim() const { return sizes_.back(); }
  Index param_count() const { return static_cast<Index>(params_.size()); }
  const std::vector<Index>& layer_sizes() const { return sizes_; }
  Activation activation() const { return activation_; }

  const Vector& params() const { return params_; }
  void set_params(const Vector& p);

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;

  /// Returns d loss / d input and accumulates d loss / d params.
  Matrix backward(const Cache& cache, const Matrix& grad_out, Vector* grad_params) const;

 private:
  struct LayerView {
    Index in, out, w_offset, b_offset;
  };
  std::vector<Index> sizes_;
  std::vector<LayerView> layers_;
  Activation activation_ = Activation::mish;
  Vector params_;
};

}  // namespace dsacd::nn

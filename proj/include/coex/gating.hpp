// Copyright 2026 The CoEx Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Mask-conditioned gates over patch embeddings: linear interpolation,
// residual transform, spatial attention and FiLM.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "coex/types.hpp"

namespace coex {

enum class GateVariant { kLinear, kResidual, kSpatialAttention, kFilm };

std::string_view to_string(GateVariant v);
GateVariant parse_gate_variant(std::string_view s);

/// Two-layer perceptron out = W2 gelu(W1 x + b1) + b2, evaluated without
/// dropout.
struct Mlp {
  Eigen::MatrixXf w1;  // hidden x in
  Eigen::VectorXf b1;  // hidden
  Eigen::MatrixXf w2;  // out x hidden
  Eigen::VectorXf b2;  // out

  int in_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int out_dim() const { return static_cast<int>(w2.rows()); }

  bool consistent() const {
    return b1.size() == w1.rows() && w2.cols() == w1.rows() && b2.size() == w2.rows();
  }

  static Mlp zeros(int in, int hidden, int out) {
    return {Eigen::MatrixXf::Zero(hidden, in), Eigen::VectorXf::Zero(hidden),
            Eigen::MatrixXf::Zero(out, hidden), Eigen::VectorXf::Zero(out)};
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static Mlp seeded(int in, int hidden, int out, std::mt19937_64& rng) {
    auto fill = [&rng](Eigen::Index rows, Eigen::Index cols, int fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      Eigen::MatrixXf m(rows, cols);
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        // 53 random bits -> [0, 1); fixed across standard libraries.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        m.data()[i] = static_cast<float>((2.0 * u - 1.0) * bound);
      }
      return m;
    };
    Mlp mlp;
    mlp.w1 = fill(hidden, in, in);
    mlp.b1 = fill(hidden, 1, in);
    mlp.w2 = fill(out, hidden, hidden);
    mlp.b2 = fill(out, 1, hidden);
    return mlp;
  }
};

struct GateParams {
  GateVariant variant = GateVariant::kFilm;
  int dim = 0;          // embedding width d
  double alpha = 0.1;   // linear and spatial-attention strength
  double epsilon = 1e-6;
  Mlp transform;        // residual: d -> hidden -> d
  Mlp film_gamma;       // film: 1 -> hidden -> d
  Mlp film_beta;
  std::uint64_t seed = 0;

  /// Parameters for `variant` at width `dim`; MLP weights drawn from the
  /// seeded initializer. Hidden width defaults to `dim`.
  static GateParams init(GateVariant variant, int dim, std::uint64_t seed, int hidden = 0) {
    require(dim >= 1, "embedding width must be positive");
    GateParams p;
    p.variant = variant;
    p.dim = dim;
    p.seed = seed;
    const int h = hidden > 0 ? hidden : dim;
    std::mt19937_64 rng(seed);
    if (variant == GateVariant::kResidual) p.transform = Mlp::seeded(dim, h, dim, rng);
    if (variant == GateVariant::kFilm) {
      p.film_gamma = Mlp::seeded(1, h, dim, rng);
      p.film_beta = Mlp::seeded(1, h, dim, rng);
    }
    return p;
  }

  /// FiLM with all-zero MLPs, which leaves embeddings unchanged.
  static GateParams zero_film(int dim, int hidden = 0) {
    GateParams p;
    p.variant = GateVariant::kFilm;
    p.dim = dim;
    const int h = hidden > 0 ? hidden : dim;
    p.film_gamma = Mlp::zeros(1, h, dim);
    p.film_beta = Mlp::zeros(1, h, dim);
    return p;
  }

  void validate() const;
};

namespace detail {

template <typename Derived>
auto gelu(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) {
    return Scalar(0.5) * v * (Scalar(1) + std::erf(v / std::sqrt(Scalar(2))));
  });
}

/// Applies `mlp` to each row of `x` (n x in) and returns n x out.
template <typename Scalar, typename Derived>
EmbeddingGrid<Scalar> mlp_rows(const Mlp& mlp, const Eigen::MatrixBase<Derived>& x) {
  const auto w1 = mlp.w1.cast<Scalar>();
  const auto w2 = mlp.w2.cast<Scalar>();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> b1 = mlp.b1.cast<Scalar>().transpose();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> b2 = mlp.b2.cast<Scalar>().transpose();
  EmbeddingGrid<Scalar> hidden = (x * w1.transpose()).rowwise() + b1;
  hidden = gelu(hidden.array()).matrix();
  EmbeddingGrid<Scalar> out = (hidden * w2.transpose()).rowwise() + b2;
  return out;
}

}  // namespace detail

/// Gates embeddings `e` (n x d) with the per-patch mask `m` (n values in
/// [0, 1], any shape with n entries). Output has the shape of `e`.
template <typename DerivedE, typename DerivedM>
EmbeddingGrid<typename DerivedE::Scalar> gate(const Eigen::MatrixBase<DerivedE>& e,
                                              const Eigen::DenseBase<DerivedM>& mask,
                                              const GateParams& p) {
  using Scalar = typename DerivedE::Scalar;
  using Column = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  require(mask.size() == e.rows(), "mask length differs from the number of patches");
  require(p.dim == e.cols(), "gate width differs from the embedding width");
  p.validate();
  const Column m = mask.derived().template reshaped<Eigen::RowMajor>().template cast<Scalar>();
  require((m.array() >= Scalar(0)).all() && (m.array() <= Scalar(1)).all(),
          "mask values must lie in [0, 1]");
  const Scalar alpha = static_cast<Scalar>(p.alpha);

  switch (p.variant) {
    case GateVariant::kLinear: {
      const Column scale = (alpha * m.array() + (Scalar(1) - alpha)).matrix();
      return scale.asDiagonal() * e;
    }
    case GateVariant::kResidual: {
      const EmbeddingGrid<Scalar> t = detail::mlp_rows<Scalar>(p.transform, e);
      const Column keep = (Scalar(1) - m.array()).matrix();
      return EmbeddingGrid<Scalar>(m.asDiagonal() * t + keep.asDiagonal() * e);
    }
    case GateVariant::kSpatialAttention: {
      const Scalar total = m.sum() + static_cast<Scalar>(p.epsilon);
      const Column scale = (Scalar(1) + alpha * m.array() / total).matrix();
      return scale.asDiagonal() * e;
    }
    case GateVariant::kFilm: {
      const EmbeddingGrid<Scalar> gamma = detail::mlp_rows<Scalar>(p.film_gamma, m);
      const EmbeddingGrid<Scalar> beta = detail::mlp_rows<Scalar>(p.film_beta, m);
      return EmbeddingGrid<Scalar>(e.array() * (Scalar(1) + gamma.array()) + beta.array());
    }
  }
  throw Error("unknown gate variant");
}

}  // namespace coex

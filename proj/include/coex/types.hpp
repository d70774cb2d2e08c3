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

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace coex {

/// Thrown on contract violations (bad shapes, out-of-range arguments,
/// malformed input files).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major rows x cols grid. Heatmaps, masks and image planes all use it.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Heatmap = Grid<double>;
using MaskGrid = Grid<bool>;

/// n x d patch embeddings, one row per patch.
template <typename Scalar>
using EmbeddingGrid = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GridShape {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  bool operator==(const GridShape&) const = default;
};

template <typename Derived>
GridShape shape_of(const Eigen::DenseBase<Derived>& g) {
  return {static_cast<int>(g.rows()), static_cast<int>(g.cols())};
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

}  // namespace coex

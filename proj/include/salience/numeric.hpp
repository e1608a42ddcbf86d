// Copyright 2026 The Salience Authors.
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

// Dense numeric kernels shared by retrieval, scoring and the salience
// measures. Everything is templated on the Eigen expression so callers can
// pass blocks, maps and lazy expressions without materializing them.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "salience/errors.hpp"

namespace salience {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

// Softmax with max subtraction. Throws EmptyScores on an empty input.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  if (scores.size() == 0) throw EmptyScores("softmax of an empty score list");
  const Scalar peak = scores.maxCoeff();
  VectorX<Scalar> w = (scores.derived().array() - peak).exp().matrix();
  return w / w.sum();
}

// log(sum_i exp(x_i)), stable for large magnitudes.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar peak = x.maxCoeff();
  if (!std::isfinite(peak)) return peak;
  return peak + std::log((x.derived().array() - peak).exp().sum());
}

// Cosine similarity; zero when either side has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return std::clamp(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
}

// Half the squared distance between the unit vectors; equal to 1 - cos.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(1);
  return Scalar(0.5) * (a / na - b / nb).squaredNorm();
}

// L2-normalized copy; the zero vector maps to itself.
template <typename Derived>
VectorX<typename Derived::Scalar> l2_normalized(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = v.norm();
  if (n == Scalar(0)) return v;
  return v / n;
}

// Row-wise L2 normalization of a matrix; zero rows stay zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> normalize_rows(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Scalar n = out.row(r).norm();
    if (n > Scalar(0)) out.row(r) /= n;
  }
  return out;
}

// Per-column mixture in log space:
//   out_t = log sum_z w_z exp(logp_{z,t})
// Rows with zero weight never contribute, so a one-hot weight vector returns
// the selected row bit-for-bit.
template <typename DerivedL, typename DerivedW>
VectorX<typename DerivedL::Scalar> marginalize(const Eigen::MatrixBase<DerivedL>& logprobs,
                                               const Eigen::MatrixBase<DerivedW>& weights) {
  using Scalar = typename DerivedL::Scalar;
  if (weights.size() != logprobs.rows()) {
    throw ShapeError("marginalize: " + std::to_string(weights.size()) +
                     " weights for " + std::to_string(logprobs.rows()) + " rows");
  }
  if (logprobs.rows() == 0) throw ShapeError("marginalize: no rows");
  if ((weights.array() < Scalar(0)).any()) throw ShapeError("marginalize: negative weight");
  if (std::abs(weights.sum() - Scalar(1)) > Scalar(1e-9)) {
    throw ShapeError("marginalize: weights do not sum to 1");
  }
  VectorX<Scalar> out(logprobs.cols());
  for (Eigen::Index t = 0; t < logprobs.cols(); ++t) {
    Scalar peak = -std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index z = 0; z < logprobs.rows(); ++z) {
      if (weights(z) > Scalar(0)) peak = std::max(peak, logprobs(z, t));
    }
    Scalar acc(0);
    for (Eigen::Index z = 0; z < logprobs.rows(); ++z) {
      if (weights(z) > Scalar(0)) acc += weights(z) * std::exp(logprobs(z, t) - peak);
    }
    out(t) = peak + std::log(acc);
  }
  return out;
}

// Per-chapter standardization; a constant input maps to all zeros.
template <typename Derived>
VectorX<typename Derived::Scalar> zscore(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  VectorX<Scalar> out = VectorX<Scalar>::Zero(n);
  if (n == 0) return out;
  const Scalar mean = x.mean();
  const Scalar var = (x.derived().array() - mean).square().sum() / Scalar(n);
  const Scalar sd = std::sqrt(var);
  if (!(sd > Scalar(0))) return out;
  return ((x.derived().array() - mean) / sd).matrix();
}

}  // namespace salience

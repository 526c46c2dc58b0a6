// Copyright 2026 The metaloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METALOOP_AUTODIFF_OPS_HPP
#define METALOOP_AUTODIFF_OPS_HPP

#include <span>
#include <vector>

#include "autodiff/rng.hpp"
#include "autodiff/tensor.hpp"

namespace metaloop::ad {

// Binary elementwise ops accept equal shapes, or one operand whose shape
// equals the other's shape without its leading (batch) dimension.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor neg(const Tensor& a);

/// [m x k] * [k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
/// Requires strictly positive entries.
Tensor log(const Tensor& a);
/// Elementwise a^p; entries must be positive unless p is a non-negative
/// integer.
Tensor pow(const Tensor& a, double p);
Tensor square(const Tensor& a);

/// Sum of all entries, shape {}.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Sum over one axis, keeping it with extent 1.
Tensor sum_axis(const Tensor& a, std::size_t axis);
/// Repeats an extent-1 axis `n` times (adjoint of sum_axis).
Tensor expand_axis(const Tensor& a, std::size_t axis, std::size_t n);
/// Sum over the leading dimension, dropping it.
Tensor sum_leading(const Tensor& a);
/// Stacks `n` copies of `a` along a new leading dimension.
Tensor broadcast_leading(const Tensor& a, std::size_t n);

/// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& a, std::size_t axis);
Tensor log_softmax(const Tensor& a, std::size_t axis);

inline constexpr double kLayerNormEpsilon = 1e-5;

/// Normalizes over the last axis, then applies gain and bias (both shaped
/// like the last axis).
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias,
                  double epsilon = kLayerNormEpsilon);

/// Rows of a [vocab x dim] table, one per id.
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);
/// Adds row i of `rows` into row ids[i] of a zero [num_rows x dim] table.
Tensor scatter_rows(const Tensor& rows, std::span<const int> ids,
                    std::size_t num_rows);

/// out[b] = a[b, index[b]] for a [batch x k] matrix.
Tensor pick(const Tensor& a, std::span<const int> index);
/// Adjoint of pick: places v[b] at [b, index[b]] of a zero [batch x k].
Tensor place(const Tensor& v, std::span<const int> index, std::size_t k);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin,
             std::size_t end);
/// Zero-pads `a` along `axis` so it occupies [begin, begin + extent) of a
/// `total`-long axis (adjoint of slice).
Tensor pad(const Tensor& a, std::size_t axis, std::size_t begin,
           std::size_t total);

/// Inverted dropout: survivors are scaled by 1/(1 - rate). Identity when
/// `training` is false or rate is zero.
Tensor dropout(const Tensor& a, double rate, const RngStream& stream,
               bool training);

/// Mean over the batch of -log_softmax(logits)[label].
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);
/// Mean squared error over all entries.
Tensor mse(const Tensor& pred, const Tensor& target);

}  // namespace metaloop::ad

#endif  // METALOOP_AUTODIFF_OPS_HPP

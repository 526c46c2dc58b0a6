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

#include "autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"

namespace metaloop::ad {

namespace {

enum class Broadcast { none, b_over_a, a_over_b };

Shape drop_leading(const Shape& s) { return Shape(s.begin() + 1, s.end()); }

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::none;
  if (a.rank() == b.rank() + 1 && drop_leading(a.shape()) == b.shape()) {
    return Broadcast::b_over_a;
  }
  if (b.rank() == a.rank() + 1 && drop_leading(b.shape()) == a.shape()) {
    return Broadcast::a_over_b;
  }
  fail(ErrorKind::shape, std::string(op) + ": shape mismatch " +
                             shape_string(a.shape()) + " vs " +
                             shape_string(b.shape()));
}

// Reduces a gradient back to an operand's shape after leading broadcast.
Tensor reduce_to(const Tensor& g, const Shape& shape) {
  return g.shape() == shape ? g : sum_leading(g);
}

template <class F>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, F f,
              BackwardFn backward) {
  const Broadcast kind = broadcast_kind(a, b, op);
  const Tensor& big = kind == Broadcast::a_over_b ? b : a;
  const std::size_t n = big.size();
  std::vector<double> out(n);
  const auto& av = a.values();
  const auto& bv = b.values();
  switch (kind) {
    case Broadcast::none:
      for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i], bv[i]);
      break;
    case Broadcast::b_over_a: {
      const std::size_t m = bv.size();
      for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i], bv[i % m]);
      break;
    }
    case Broadcast::a_over_b: {
      const std::size_t m = av.size();
      for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i % m], bv[i]);
      break;
    }
  }
  return Tensor::make_result(big.shape(), std::move(out), {a, b},
                             std::move(backward), op);
}

template <class F>
std::vector<double> map_values(const Tensor& a, F f) {
  std::vector<double> out(a.size());
  const auto& v = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(v[i]);
  return out;
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    fail(ErrorKind::shape, std::string(op) + ": axis " + std::to_string(axis) +
                               " out of range for shape " + shape_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Tensor expand_scalar(const Tensor& g, const Shape& shape) {
  std::vector<double> out(element_count(shape), g.item());
  return Tensor::make_result(shape, std::move(out), {g},
                             [](const Tensor& gg) { return std::vector<Tensor>{sum(gg)}; },
                             "expand_scalar");
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    fail(ErrorKind::shape, std::string(op) + ": expected a matrix, got " +
                               shape_string(a.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const Shape sa = a.shape(), sb = b.shape();
  return binary(a, b, "add", [](double x, double y) { return x + y; },
                [sa, sb](const Tensor& g) {
                  return std::vector<Tensor>{reduce_to(g, sa), reduce_to(g, sb)};
                });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const Shape sa = a.shape(), sb = b.shape();
  return binary(a, b, "sub", [](double x, double y) { return x - y; },
                [sa, sb](const Tensor& g) {
                  return std::vector<Tensor>{reduce_to(g, sa),
                                             reduce_to(neg(g), sb)};
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(a, b, "mul", [](double x, double y) { return x * y; },
                [a, b](const Tensor& g) {
                  std::vector<Tensor> out(2);
                  if (a.requires_grad()) out[0] = reduce_to(mul(g, b), a.shape());
                  if (b.requires_grad()) out[1] = reduce_to(mul(g, a), b.shape());
                  return out;
                });
}

Tensor scale(const Tensor& a, double c) {
  return Tensor::make_result(
      a.shape(), map_values(a, [c](double x) { return x * c; }), {a},
      [c](const Tensor& g) { return std::vector<Tensor>{scale(g, c)}; }, "scale");
}

Tensor add_scalar(const Tensor& a, double c) {
  return Tensor::make_result(
      a.shape(), map_values(a, [c](double x) { return x + c; }), {a},
      [](const Tensor& g) { return std::vector<Tensor>{g}; }, "add_scalar");
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    fail(ErrorKind::shape, "matmul: inner dimensions differ " +
                               shape_string(a.shape()) + " vs " +
                               shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      if (x == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += x * brow[j];
    }
  }
  return Tensor::make_result({m, n}, std::move(out), {a, b},
                             [a, b](const Tensor& g) {
                               std::vector<Tensor> out(2);
                               if (a.requires_grad()) out[0] = matmul(g, transpose(b));
                               if (b.requires_grad()) out[1] = matmul(transpose(a), g);
                               return out;
                             },
                             "matmul");
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<double> out(r * c);
  const auto& v = a.values();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = v[i * c + j];
  }
  return Tensor::make_result(
      {c, r}, std::move(out), {a},
      [](const Tensor& g) { return std::vector<Tensor>{transpose(g)}; },
      "transpose");
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.size()) {
    fail(ErrorKind::shape, "reshape: " + shape_string(a.shape()) + " to " +
                               shape_string(shape));
  }
  const Shape original = a.shape();
  return Tensor::make_result(
      std::move(shape), a.values(), {a},
      [original](const Tensor& g) {
        return std::vector<Tensor>{reshape(g, original)};
      },
      "reshape");
}

Tensor tanh(const Tensor& a) {
  return Tensor::make_result(
      a.shape(), map_values(a, [](double x) { return std::tanh(x); }), {a},
      [a](const Tensor& g) {
        const Tensor y = tanh(a);
        return std::vector<Tensor>{mul(g, add_scalar(neg(square(y)), 1.0))};
      },
      "tanh");
}

Tensor sigmoid(const Tensor& a) {
  return Tensor::make_result(
      a.shape(),
      map_values(a, [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      }),
      {a},
      [a](const Tensor& g) {
        const Tensor s = sigmoid(a);
        return std::vector<Tensor>{mul(g, mul(s, add_scalar(neg(s), 1.0)))};
      },
      "sigmoid");
}

Tensor relu(const Tensor& a) {
  return Tensor::make_result(
      a.shape(), map_values(a, [](double x) { return x > 0.0 ? x : 0.0; }), {a},
      [a](const Tensor& g) {
        const Tensor mask = Tensor::constant(
            a.shape(), map_values(a, [](double x) { return x > 0.0 ? 1.0 : 0.0; }));
        return std::vector<Tensor>{mul(g, mask)};
      },
      "relu");
}

Tensor exp(const Tensor& a) {
  return Tensor::make_result(
      a.shape(), map_values(a, [](double x) { return std::exp(x); }), {a},
      [a](const Tensor& g) { return std::vector<Tensor>{mul(g, exp(a))}; },
      "exp");
}

Tensor log(const Tensor& a) {
  for (double x : a.data()) {
    if (!(x > 0.0)) fail(ErrorKind::numeric, "log: non-positive input");
  }
  return Tensor::make_result(
      a.shape(), map_values(a, [](double x) { return std::log(x); }), {a},
      [a](const Tensor& g) { return std::vector<Tensor>{mul(g, pow(a, -1.0))}; },
      "log");
}

Tensor pow(const Tensor& a, double p) {
  return Tensor::make_result(
      a.shape(), map_values(a, [p](double x) { return std::pow(x, p); }), {a},
      [a, p](const Tensor& g) {
        if (p == 0.0) return std::vector<Tensor>{Tensor::zeros(a.shape())};
        return std::vector<Tensor>{mul(g, scale(pow(a, p - 1.0), p))};
      },
      "pow");
}

Tensor square(const Tensor& a) {
  return Tensor::make_result(
      a.shape(), map_values(a, [](double x) { return x * x; }), {a},
      [a](const Tensor& g) { return std::vector<Tensor>{scale(mul(g, a), 2.0)}; },
      "square");
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double x : a.data()) total += x;
  const Shape shape = a.shape();
  return Tensor::make_result(
      {}, {total}, {a},
      [shape](const Tensor& g) {
        return std::vector<Tensor>{expand_scalar(g, shape)};
      },
      "sum");
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) fail(ErrorKind::shape, "mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum_axis(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis, "sum_axis");
  std::vector<double> out(s.outer * s.inner, 0.0);
  const auto& v = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t j = 0; j < s.extent; ++j) {
      const double* src = v.data() + (o * s.extent + j) * s.inner;
      double* dst = out.data() + o * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += src[i];
    }
  }
  Shape shape = a.shape();
  shape[axis] = 1;
  const std::size_t n = s.extent;
  return Tensor::make_result(
      std::move(shape), std::move(out), {a},
      [axis, n](const Tensor& g) {
        return std::vector<Tensor>{expand_axis(g, axis, n)};
      },
      "sum_axis");
}

Tensor expand_axis(const Tensor& a, std::size_t axis, std::size_t n) {
  const AxisSplit s = split_axis(a.shape(), axis, "expand_axis");
  if (s.extent != 1) {
    fail(ErrorKind::shape, "expand_axis: axis extent must be 1 in " +
                               shape_string(a.shape()));
  }
  std::vector<double> out(s.outer * n * s.inner);
  const auto& v = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t j = 0; j < n; ++j) {
      std::copy_n(v.data() + o * s.inner, s.inner,
                  out.data() + (o * n + j) * s.inner);
    }
  }
  Shape shape = a.shape();
  shape[axis] = n;
  return Tensor::make_result(
      std::move(shape), std::move(out), {a},
      [axis](const Tensor& g) { return std::vector<Tensor>{sum_axis(g, axis)}; },
      "expand_axis");
}

Tensor sum_leading(const Tensor& a) {
  if (a.rank() == 0) fail(ErrorKind::shape, "sum_leading of a scalar");
  const std::size_t n = a.dim(0);
  const std::size_t m = n == 0 ? 0 : a.size() / n;
  Shape shape = drop_leading(a.shape());
  std::vector<double> out(element_count(shape), 0.0);
  const auto& v = a.values();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < m; ++i) out[i] += v[r * m + i];
  }
  return Tensor::make_result(
      std::move(shape), std::move(out), {a},
      [n](const Tensor& g) { return std::vector<Tensor>{broadcast_leading(g, n)}; },
      "sum_leading");
}

Tensor broadcast_leading(const Tensor& a, std::size_t n) {
  Shape shape{n};
  shape.insert(shape.end(), a.shape().begin(), a.shape().end());
  std::vector<double> out;
  out.reserve(n * a.size());
  for (std::size_t r = 0; r < n; ++r) {
    out.insert(out.end(), a.values().begin(), a.values().end());
  }
  return Tensor::make_result(
      std::move(shape), std::move(out), {a},
      [](const Tensor& g) { return std::vector<Tensor>{sum_leading(g)}; },
      "broadcast_leading");
}

Tensor softmax(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis, "softmax");
  std::vector<double> out(a.size());
  const auto& v = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < s.extent; ++j) {
        peak = std::max(peak, v[base + j * s.inner]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < s.extent; ++j) {
        const double e = std::exp(v[base + j * s.inner] - peak);
        out[base + j * s.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < s.extent; ++j) out[base + j * s.inner] /= total;
    }
  }
  const std::size_t n = s.extent;
  return Tensor::make_result(
      a.shape(), std::move(out), {a},
      [a, axis, n](const Tensor& g) {
        const Tensor y = softmax(a, axis);
        const Tensor gy = mul(g, y);
        return std::vector<Tensor>{
            sub(gy, mul(y, expand_axis(sum_axis(gy, axis), axis, n)))};
      },
      "softmax");
}

Tensor log_softmax(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis, "log_softmax");
  std::vector<double> out(a.size());
  const auto& v = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < s.extent; ++j) {
        peak = std::max(peak, v[base + j * s.inner]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < s.extent; ++j) {
        total += std::exp(v[base + j * s.inner] - peak);
      }
      const double lse = peak + std::log(total);
      for (std::size_t j = 0; j < s.extent; ++j) {
        out[base + j * s.inner] = v[base + j * s.inner] - lse;
      }
    }
  }
  const std::size_t n = s.extent;
  return Tensor::make_result(
      a.shape(), std::move(out), {a},
      [a, axis, n](const Tensor& g) {
        const Tensor y = softmax(a, axis);
        return std::vector<Tensor>{
            sub(g, mul(y, expand_axis(sum_axis(g, axis), axis, n)))};
      },
      "log_softmax");
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias,
                  double epsilon) {
  if (a.rank() == 0 || a.rank() > 2) {
    fail(ErrorKind::shape, "layer_norm: expected rank 1 or 2, got " +
                               shape_string(a.shape()));
  }
  const std::size_t axis = a.rank() - 1;
  const std::size_t n = a.dim(axis);
  if (gain.shape() != Shape{n} || bias.shape() != Shape{n}) {
    fail(ErrorKind::shape, "layer_norm: gain/bias must be [" + std::to_string(n) +
                               "], got " + shape_string(gain.shape()) + " and " +
                               shape_string(bias.shape()));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Tensor mu = scale(sum_axis(a, axis), inv_n);
  const Tensor centered = sub(a, expand_axis(mu, axis, n));
  const Tensor var = scale(sum_axis(square(centered), axis), inv_n);
  const Tensor inv_std = pow(add_scalar(var, epsilon), -0.5);
  const Tensor normalized = mul(centered, expand_axis(inv_std, axis, n));
  return add(mul(normalized, gain), bias);
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  require_matrix(table, "embedding_lookup");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  const auto& v = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      fail(ErrorKind::invalid_argument,
           "embedding_lookup: id " + std::to_string(ids[i]) +
               " outside table of " + std::to_string(rows) + " rows");
    }
    std::copy_n(v.data() + static_cast<std::size_t>(ids[i]) * d, d,
                out.data() + i * d);
  }
  std::vector<int> kept(ids.begin(), ids.end());
  return Tensor::make_result(
      {ids.size(), d}, std::move(out), {table},
      [kept, rows](const Tensor& g) {
        return std::vector<Tensor>{scatter_rows(g, kept, rows)};
      },
      "embedding_lookup");
}

Tensor scatter_rows(const Tensor& rows, std::span<const int> ids,
                    std::size_t num_rows) {
  require_matrix(rows, "scatter_rows");
  if (rows.dim(0) != ids.size()) {
    fail(ErrorKind::shape, "scatter_rows: row count differs from id count");
  }
  const std::size_t d = rows.dim(1);
  std::vector<double> out(num_rows * d, 0.0);
  const auto& v = rows.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= num_rows) {
      fail(ErrorKind::invalid_argument, "scatter_rows: id out of range");
    }
    double* dst = out.data() + static_cast<std::size_t>(ids[i]) * d;
    for (std::size_t j = 0; j < d; ++j) dst[j] += v[i * d + j];
  }
  std::vector<int> kept(ids.begin(), ids.end());
  return Tensor::make_result(
      {num_rows, d}, std::move(out), {rows},
      [kept](const Tensor& g) {
        return std::vector<Tensor>{embedding_lookup(g, kept)};
      },
      "scatter_rows");
}

Tensor pick(const Tensor& a, std::span<const int> index) {
  require_matrix(a, "pick");
  const std::size_t b = a.dim(0), k = a.dim(1);
  if (index.size() != b) {
    fail(ErrorKind::shape, "pick: " + std::to_string(index.size()) +
                               " indices for " + std::to_string(b) + " rows");
  }
  std::vector<double> out(b);
  for (std::size_t i = 0; i < b; ++i) {
    if (index[i] < 0 || static_cast<std::size_t>(index[i]) >= k) {
      fail(ErrorKind::invalid_argument,
           "label " + std::to_string(index[i]) + " outside [0, " +
               std::to_string(k) + ")");
    }
    out[i] = a.values()[i * k + static_cast<std::size_t>(index[i])];
  }
  std::vector<int> kept(index.begin(), index.end());
  return Tensor::make_result(
      {b}, std::move(out), {a},
      [kept, k](const Tensor& g) { return std::vector<Tensor>{place(g, kept, k)}; },
      "pick");
}

Tensor place(const Tensor& v, std::span<const int> index, std::size_t k) {
  if (v.rank() != 1 || v.dim(0) != index.size()) {
    fail(ErrorKind::shape, "place: value shape " + shape_string(v.shape()) +
                               " does not match index count");
  }
  const std::size_t b = index.size();
  std::vector<double> out(b * k, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    out[i * k + static_cast<std::size_t>(index[i])] = v.values()[i];
  }
  std::vector<int> kept(index.begin(), index.end());
  return Tensor::make_result(
      {b, k}, std::move(out), {v},
      [kept](const Tensor& g) { return std::vector<Tensor>{pick(g, kept)}; },
      "place");
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) fail(ErrorKind::shape, "concat of zero tensors");
  const Shape& first = parts[0].shape();
  const AxisSplit s0 = split_axis(first, axis, "concat");
  std::size_t total = 0;
  std::vector<std::size_t> extents;
  for (const Tensor& p : parts) {
    if (p.rank() != first.size()) fail(ErrorKind::shape, "concat: rank mismatch");
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (i != axis && p.dim(i) != first[i]) {
        fail(ErrorKind::shape, "concat: shape mismatch " + shape_string(first) +
                                   " vs " + shape_string(p.shape()));
      }
    }
    extents.push_back(p.dim(axis));
    total += p.dim(axis);
  }
  std::vector<double> out(s0.outer * total * s0.inner);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t chunk = extents[k] * s0.inner;
    const auto& v = parts[k].values();
    for (std::size_t o = 0; o < s0.outer; ++o) {
      std::copy_n(v.data() + o * chunk, chunk,
                  out.data() + (o * total + offset) * s0.inner);
    }
    offset += extents[k];
  }
  Shape shape = first;
  shape[axis] = total;
  return Tensor::make_result(
      std::move(shape), std::move(out),
      std::vector<Tensor>(parts.begin(), parts.end()),
      [axis, extents](const Tensor& g) {
        std::vector<Tensor> out;
        std::size_t begin = 0;
        for (std::size_t e : extents) {
          out.push_back(slice(g, axis, begin, begin + e));
          begin += e;
        }
        return out;
      },
      "concat");
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin,
             std::size_t end) {
  const AxisSplit s = split_axis(a.shape(), axis, "slice");
  if (begin > end || end > s.extent) {
    fail(ErrorKind::shape, "slice: range [" + std::to_string(begin) + ", " +
                               std::to_string(end) + ") outside " +
                               shape_string(a.shape()));
  }
  const std::size_t n = end - begin;
  std::vector<double> out(s.outer * n * s.inner);
  const auto& v = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(v.data() + (o * s.extent + begin) * s.inner, n * s.inner,
                out.data() + o * n * s.inner);
  }
  Shape shape = a.shape();
  shape[axis] = n;
  const std::size_t total = s.extent;
  return Tensor::make_result(
      std::move(shape), std::move(out), {a},
      [axis, begin, total](const Tensor& g) {
        return std::vector<Tensor>{pad(g, axis, begin, total)};
      },
      "slice");
}

Tensor pad(const Tensor& a, std::size_t axis, std::size_t begin,
           std::size_t total) {
  const AxisSplit s = split_axis(a.shape(), axis, "pad");
  if (begin + s.extent > total) fail(ErrorKind::shape, "pad: does not fit");
  std::vector<double> out(s.outer * total * s.inner, 0.0);
  const auto& v = a.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(v.data() + o * s.extent * s.inner, s.extent * s.inner,
                out.data() + (o * total + begin) * s.inner);
  }
  Shape shape = a.shape();
  shape[axis] = total;
  const std::size_t n = s.extent;
  return Tensor::make_result(
      std::move(shape), std::move(out), {a},
      [axis, begin, n](const Tensor& g) {
        return std::vector<Tensor>{slice(g, axis, begin, begin + n)};
      },
      "pad");
}

Tensor dropout(const Tensor& a, double rate, const RngStream& stream,
               bool training) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    fail(ErrorKind::invalid_argument,
         "dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return a;
  Rng rng = stream.engine();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(a.size());
  for (double& m : mask) m = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return mul(a, Tensor::constant(a.shape(), std::move(mask)));
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_matrix(logits, "cross_entropy");
  if (logits.dim(0) == 0) fail(ErrorKind::shape, "cross_entropy: empty batch");
  const Tensor picked = pick(log_softmax(logits, 1), labels);
  return scale(sum(picked), -1.0 / static_cast<double>(logits.dim(0)));
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  if (pred.size() == 0) fail(ErrorKind::shape, "mse: empty batch");
  if (pred.shape() != target.shape()) {
    fail(ErrorKind::shape, "mse: shape mismatch " + shape_string(pred.shape()) +
                               " vs " + shape_string(target.shape()));
  }
  return mean(square(sub(pred, target)));
}

}  // namespace metaloop::ad

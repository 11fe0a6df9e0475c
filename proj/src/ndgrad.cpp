/*
 * Copyright 2026 The eegatt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "eegatt/ndgrad.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace eegatt::nd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void check_finite(const char* op, const std::vector<double>& data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite value in output");
  }
}

// Splits `shape` around `axis` into (outer, n, inner) for strided loops.
struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

void require_axis(const char* op, const NdValue& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for shape " +
                     to_string(x.shape()));
  }
}

// Output shape and per-operand strides (0 on broadcast axes), right-aligned.
struct BroadcastPlan {
  Shape out;
  std::vector<std::size_t> stride_a, stride_b;
  bool trivial = false;
};

std::vector<std::size_t> natural_strides(const Shape& s) {
  std::vector<std::size_t> st(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
  return st;
}

BroadcastPlan plan_broadcast(const char* op, const Shape& a, const Shape& b) {
  BroadcastPlan p;
  if (a == b) {
    p.out = a;
    p.trivial = true;
    return p;
  }
  const std::size_t r = std::max(a.size(), b.size());
  p.out.assign(r, 1);
  p.stride_a.assign(r, 0);
  p.stride_b.assign(r, 0);
  const auto na = natural_strides(a);
  const auto nb = natural_strides(b);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t off_a = r - a.size(), off_b = r - b.size();
    const std::size_t da = i >= off_a ? a[i - off_a] : 1;
    const std::size_t db = i >= off_b ? b[i - off_b] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(a) + " with " +
                       to_string(b));
    }
    p.out[i] = std::max(da, db);
    if (i >= off_a && da != 1) p.stride_a[i] = na[i - off_a];
    if (i >= off_b && db != 1) p.stride_b[i] = nb[i - off_b];
  }
  return p;
}

// Calls fn(out_index, a_index, b_index) for every output element.
template <class Fn>
void for_each_broadcast(const BroadcastPlan& p, Fn&& fn) {
  const std::size_t total = numel(p.out);
  if (p.trivial) {
    for (std::size_t i = 0; i < total; ++i) fn(i, i, i);
    return;
  }
  const std::size_t r = p.out.size();
  std::vector<std::size_t> idx(r, 0);
  const std::size_t last = p.out[r - 1];
  const std::size_t sa_last = p.stride_a[r - 1], sb_last = p.stride_b[r - 1];
  std::size_t ia = 0, ib = 0;
  for (std::size_t o = 0; o < total; o += last) {
    for (std::size_t j = 0; j < last; ++j) fn(o + j, ia + j * sa_last, ib + j * sb_last);
    // advance the odometer over all but the last axis
    for (std::size_t d = r - 1; d-- > 0;) {
      ++idx[d];
      ia += p.stride_a[d];
      ib += p.stride_b[d];
      if (idx[d] < p.out[d]) break;
      ia -= p.stride_a[d] * idx[d];
      ib -= p.stride_b[d] * idx[d];
      idx[d] = 0;
    }
  }
}

enum class BinOp { add, sub, mul };

NdValue binary(Tape& tape, BinOp kind, const NdValue& a, const NdValue& b) {
  static constexpr const char* names[] = {"add", "sub", "mul"};
  const char* name = names[static_cast<int>(kind)];
  auto plan = plan_broadcast(name, a.shape(), b.shape());
  std::vector<double> out(numel(plan.out));
  const auto da = a.data();
  const auto db = b.data();
  switch (kind) {
    case BinOp::add:
      for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = da[i] + db[j]; });
      break;
    case BinOp::sub:
      for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = da[i] - db[j]; });
      break;
    case BinOp::mul:
      for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = da[i] * db[j]; });
      break;
  }
  NdValue y = make_result(name, plan.out, std::move(out), {&a, &b});
  if (y.requires_grad()) {
    tape.record(y, [kind, plan, a, b, y]() mutable {
      const auto g = y.grad();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        if (kind == BinOp::mul) {
          const auto db = b.data();
          for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t j) { ga[i] += g[o] * db[j]; });
        } else {
          for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t) { ga[i] += g[o]; });
        }
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        if (kind == BinOp::mul) {
          const auto da = a.data();
          for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t j) { gb[j] += g[o] * da[i]; });
        } else {
          const double sign = kind == BinOp::sub ? -1.0 : 1.0;
          for_each_broadcast(plan, [&](std::size_t o, std::size_t, std::size_t j) { gb[j] += sign * g[o]; });
        }
      }
    });
  }
  return y;
}

}  // namespace

// ---- shapes & values --------------------------------------------------------

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

NdValue::NdValue(Shape shape, std::vector<double> data, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("zero-sized dimension in " + to_string(shape));
  }
  if (numel(shape) != data.size()) {
    throw ShapeError("shape " + to_string(shape) + " does not hold " + std::to_string(data.size()) +
                     " values");
  }
  check_finite("NdValue", data);
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

NdValue NdValue::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

NdValue NdValue::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = numel(shape);
  return NdValue(std::move(shape), std::vector<double>(n, value), requires_grad);
}

NdValue NdValue::scalar(double value, bool requires_grad) { return NdValue({1}, {value}, requires_grad); }

std::span<const double> NdValue::grad() const {
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  return node_->grad;
}

std::span<double> NdValue::mutable_grad() const {
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  return node_->grad;
}

void NdValue::zero_grad() const { node_->grad.assign(node_->data.size(), 0.0); }

double NdValue::item() const {
  if (size() != 1) throw ShapeError("item() on value of shape " + to_string(shape()));
  return node_->data[0];
}

double NdValue::at(std::initializer_list<std::size_t> index) const {
  if (index.size() != rank()) throw ShapeError("at(): index rank mismatch");
  std::size_t flat = 0, i = 0;
  for (std::size_t v : index) {
    if (v >= node_->shape[i]) throw ShapeError("at(): index out of range");
    flat = flat * node_->shape[i] + v;
    ++i;
  }
  return node_->data[flat];
}

NdValue NdValue::detach(bool requires_grad) const { return NdValue(shape(), node_->data, requires_grad); }

// ---- tape -------------------------------------------------------------------

void Tape::record(const NdValue& output, Rule rule) { records_.push_back({output.node_, std::move(rule)}); }

bool Tape::produced(const NdValue& value) const {
  return std::any_of(records_.begin(), records_.end(),
                     [&](const Record& r) { return r.output == value.node_; });
}

void backward(const NdValue& loss, Tape& tape) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar");
  }
  if (!tape.produced(loss)) throw ContractError("backward: loss was not produced on this tape");
  NdValue seed = loss;
  seed.zero_grad();
  seed.mutable_grad()[0] = 1.0;
  for (auto it = tape.records_.rbegin(); it != tape.records_.rend(); ++it) {
    if (!it->output->grad.empty()) it->rule();
  }
  tape.clear();
}

NdValue make_result(const char* op, Shape shape, std::vector<double> data,
                    std::initializer_list<const NdValue*> inputs) {
  check_finite(op, data);
  bool rg = false;
  for (const NdValue* in : inputs) rg = rg || in->requires_grad();
  return NdValue(std::move(shape), std::move(data), rg);
}

// ---- arithmetic -------------------------------------------------------------

NdValue matmul(Tape& tape, const NdValue& a, const NdValue& b) {
  if (a.rank() == 3 && b.rank() == 3) {
    const std::size_t g = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
    if (b.dim(0) != g || b.dim(1) != k) {
      throw ShapeError("matmul: " + to_string(a.shape()) + " x " + to_string(b.shape()));
    }
    std::vector<double> out(g * m * n);
    for (std::size_t i = 0; i < g; ++i) {
      MutMap(out.data() + i * m * n, m, n).noalias() =
          ConstMap(a.data().data() + i * m * k, m, k) * ConstMap(b.data().data() + i * k * n, k, n);
    }
    NdValue y = make_result("matmul", {g, m, n}, std::move(out), {&a, &b});
    if (y.requires_grad()) {
      tape.record(y, [a, b, y, g, m, k, n]() mutable {
        const double* gy = y.grad().data();
        for (std::size_t i = 0; i < g; ++i) {
          ConstMap dy(gy + i * m * n, m, n);
          if (a.requires_grad()) {
            MutMap(a.mutable_grad().data() + i * m * k, m, k).noalias() +=
                dy * ConstMap(b.data().data() + i * k * n, k, n).transpose();
          }
          if (b.requires_grad()) {
            MutMap(b.mutable_grad().data() + i * k * n, k, n).noalias() +=
                ConstMap(a.data().data() + i * m * k, m, k).transpose() * dy;
          }
        }
      });
    }
    return y;
  }
  if (a.rank() < 2 || b.rank() != 2 || a.shape().back() != b.dim(0)) {
    throw ShapeError("matmul: " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t k = a.shape().back(), n = b.dim(1), m = a.size() / k;
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  NdValue y = make_result("matmul", std::move(out_shape), std::move(out), {&a, &b});
  if (y.requires_grad()) {
    tape.record(y, [a, b, y, m, k, n]() mutable {
      ConstMap dy(y.grad().data(), m, n);
      if (a.requires_grad()) {
        MutMap(a.mutable_grad().data(), m, k).noalias() += dy * ConstMap(b.data().data(), k, n).transpose();
      }
      if (b.requires_grad()) {
        MutMap(b.mutable_grad().data(), k, n).noalias() += ConstMap(a.data().data(), m, k).transpose() * dy;
      }
    });
  }
  return y;
}

NdValue add(Tape& tape, const NdValue& a, const NdValue& b) { return binary(tape, BinOp::add, a, b); }
NdValue sub(Tape& tape, const NdValue& a, const NdValue& b) { return binary(tape, BinOp::sub, a, b); }
NdValue mul(Tape& tape, const NdValue& a, const NdValue& b) { return binary(tape, BinOp::mul, a, b); }

NdValue scale(Tape& tape, const NdValue& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v *= factor;
  NdValue y = make_result("scale", x.shape(), std::move(out), {&x});
  if (y.requires_grad()) {
    tape.record(y, [x, y, factor]() mutable {
      const auto g = y.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
    });
  }
  return y;
}

NdValue expand(Tape& tape, const NdValue& x, const Shape& shape) {
  auto plan = plan_broadcast("expand", x.shape(), shape);
  if (plan.out != shape) {
    throw ShapeError("expand: " + to_string(x.shape()) + " does not broadcast to " + to_string(shape));
  }
  std::vector<double> out(numel(shape));
  const auto dx = x.data();
  for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t) { out[o] = dx[i]; });
  NdValue y = make_result("expand", shape, std::move(out), {&x});
  if (y.requires_grad()) {
    tape.record(y, [x, y, plan]() mutable {
      const auto g = y.grad();
      auto gx = x.mutable_grad();
      for_each_broadcast(plan, [&](std::size_t o, std::size_t i, std::size_t) { gx[i] += g[o]; });
    });
  }
  return y;
}

NdValue activation(Tape& tape, Activation kind, const NdValue& x, double slope) {
  const auto dx = x.data();
  std::vector<double> out(dx.size());
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double v = dx[i];
    switch (kind) {
      case Activation::sigmoid:
        out[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        break;
      case Activation::tanh:
        out[i] = std::tanh(v);
        break;
      case Activation::relu:
        out[i] = v > 0 ? v : 0.0;
        break;
      case Activation::leaky_relu:
        out[i] = v > 0 ? v : slope * v;
        break;
      case Activation::elu:
        out[i] = v > 0 ? v : std::expm1(v);
        break;
    }
  }
  NdValue y = make_result("activation", x.shape(), std::move(out), {&x});
  if (y.requires_grad()) {
    tape.record(y, [kind, x, y, slope]() mutable {
      const auto g = y.grad();
      const auto xv = x.data();
      const auto yv = y.data();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        double d = 0;
        switch (kind) {
          case Activation::sigmoid: d = yv[i] * (1.0 - yv[i]); break;
          case Activation::tanh: d = 1.0 - yv[i] * yv[i]; break;
          case Activation::relu: d = xv[i] > 0 ? 1.0 : 0.0; break;
          case Activation::leaky_relu: d = xv[i] > 0 ? 1.0 : slope; break;
          case Activation::elu: d = xv[i] > 0 ? 1.0 : yv[i] + 1.0; break;
        }
        gx[i] += d * g[i];
      }
    });
  }
  return y;
}

NdValue softmax(Tape& tape, const NdValue& x, std::size_t axis) {
  require_axis("softmax", x, axis);
  const auto s = split_at(x.shape(), axis);
  const auto dx = x.data();
  std::vector<double> out(dx.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      double mx = dx[base];
      for (std::size_t j = 1; j < s.n; ++j) mx = std::max(mx, dx[base + j * s.inner]);
      double total = 0;
      for (std::size_t j = 0; j < s.n; ++j) {
        const double e = std::exp(dx[base + j * s.inner] - mx);
        out[base + j * s.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < s.n; ++j) out[base + j * s.inner] /= total;
    }
  }
  NdValue y = make_result("softmax", x.shape(), std::move(out), {&x});
  if (y.requires_grad()) {
    tape.record(y, [x, y, s]() mutable {
      const auto g = y.grad();
      const auto yv = y.data();
      auto gx = x.mutable_grad();
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t base = o * s.n * s.inner + in;
          double dot = 0;
          for (std::size_t j = 0; j < s.n; ++j) dot += g[base + j * s.inner] * yv[base + j * s.inner];
          for (std::size_t j = 0; j < s.n; ++j) {
            const std::size_t idx = base + j * s.inner;
            gx[idx] += yv[idx] * (g[idx] - dot);
          }
        }
      }
    });
  }
  return y;
}

NdValue reduce(Tape& tape, Reduce kind, const NdValue& x, std::size_t axis) {
  require_axis("reduce", x, axis);
  const auto s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (out_shape.empty()) out_shape = {1};
  const auto dx = x.data();
  std::vector<double> out(s.outer * s.inner);
  std::vector<std::size_t> argmax;
  if (kind == Reduce::max) argmax.resize(out.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.n * s.inner + in;
      const std::size_t r = o * s.inner + in;
      if (kind == Reduce::max) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < s.n; ++j) {
          if (dx[base + j * s.inner] > dx[base + best * s.inner]) best = j;
        }
        argmax[r] = best;
        out[r] = dx[base + best * s.inner];
      } else {
        double total = 0;
        for (std::size_t j = 0; j < s.n; ++j) total += dx[base + j * s.inner];
        out[r] = kind == Reduce::mean ? total / static_cast<double>(s.n) : total;
      }
    }
  }
  NdValue y = make_result("reduce", std::move(out_shape), std::move(out), {&x});
  if (y.requires_grad()) {
    tape.record(y, [kind, x, y, s, argmax = std::move(argmax)]() mutable {
      const auto g = y.grad();
      auto gx = x.mutable_grad();
      const double w = kind == Reduce::mean ? 1.0 / static_cast<double>(s.n) : 1.0;
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
          const std::size_t base = o * s.n * s.inner + in;
          const std::size_t r = o * s.inner + in;
          if (kind == Reduce::max) {
            gx[base + argmax[r] * s.inner] += g[r];
          } else {
            for (std::size_t j = 0; j < s.n; ++j) gx[base + j * s.inner] += w * g[r];
          }
        }
      }
    });
  }
  return y;
}

NdValue sum_all(Tape& tape, const NdValue& x) {
  return reduce(tape, Reduce::sum, reshape(tape, x, {x.size()}), 0);
}

NdValue conv1d(Tape& tape, const NdValue& x, const NdValue& kernels, const NdValue& bias) {
  if (kernels.rank() != 3) throw ShapeError("conv1d: kernels must be [out x in x k]");
  const std::size_t out_ch = kernels.dim(0), in_ch = kernels.dim(1), k = kernels.dim(2);
  if (k % 2 == 0) throw ConfigError("conv1d: kernel size must be odd, got " + std::to_string(k));
  const bool batched = x.rank() == 3;
  if (!(x.rank() == 2 || batched)) throw ShapeError("conv1d: input must be [in x L] or [n x in x L]");
  const std::size_t n = batched ? x.dim(0) : 1;
  const std::size_t xin = x.dim(batched ? 1 : 0), len = x.dim(batched ? 2 : 1);
  if (xin != in_ch) {
    throw ShapeError("conv1d: input channels " + std::to_string(xin) + " vs kernel " + std::to_string(in_ch));
  }
  if (bias.size() != out_ch) throw ShapeError("conv1d: bias must have one entry per output channel");
  if (len < k) throw ContractError("conv1d: input length shorter than kernel");
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t L = static_cast<std::ptrdiff_t>(len);
  const auto dx = x.data();
  const auto dk = kernels.data();
  const auto db = bias.data();
  std::vector<double> out(n * out_ch * len);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < out_ch; ++o) {
      double* row = out.data() + (s * out_ch + o) * len;
      std::fill(row, row + len, db[o]);
      for (std::size_t i = 0; i < in_ch; ++i) {
        const double* xi = dx.data() + (s * in_ch + i) * len;
        const double* kw = dk.data() + (o * in_ch + i) * k;
        for (std::size_t j = 0; j < k; ++j) {
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
          const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(L, L - shift);
          for (std::ptrdiff_t l = lo; l < hi; ++l) row[l] += kw[j] * xi[l + shift];
        }
      }
    }
  }
  Shape out_shape = batched ? Shape{n, out_ch, len} : Shape{out_ch, len};
  NdValue y = make_result("conv1d", std::move(out_shape), std::move(out), {&x, &kernels, &bias});
  if (y.requires_grad()) {
    tape.record(y, [x, kernels, bias, y, n, in_ch, out_ch, k, len, pad, L]() mutable {
      const auto g = y.grad();
      const auto dx = x.data();
      const auto dk = kernels.data();
      std::span<double> gx, gk, gb;
      if (x.requires_grad()) gx = x.mutable_grad();
      if (kernels.requires_grad()) gk = kernels.mutable_grad();
      if (bias.requires_grad()) gb = bias.mutable_grad();
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < out_ch; ++o) {
          const double* grow = g.data() + (s * out_ch + o) * len;
          if (!gb.empty()) {
            for (std::size_t l = 0; l < len; ++l) gb[o] += grow[l];
          }
          for (std::size_t i = 0; i < in_ch; ++i) {
            const std::size_t xoff = (s * in_ch + i) * len;
            const std::size_t koff = (o * in_ch + i) * k;
            for (std::size_t j = 0; j < k; ++j) {
              const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
              const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
              const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(L, L - shift);
              if (!gk.empty()) {
                double acc = 0;
                for (std::ptrdiff_t l = lo; l < hi; ++l) acc += grow[l] * dx[xoff + l + shift];
                gk[koff + j] += acc;
              }
              if (!gx.empty()) {
                const double w = dk[koff + j];
                for (std::ptrdiff_t l = lo; l < hi; ++l) gx[xoff + l + shift] += w * grow[l];
              }
            }
          }
        }
      }
    });
  }
  return y;
}

// ---- layout -----------------------------------------------------------------

NdValue reshape(Tape& tape, const NdValue& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: " + to_string(x.shape()) + " -> " + to_string(shape));
  }
  NdValue y = make_result("reshape", std::move(shape), std::vector<double>(x.data().begin(), x.data().end()), {&x});
  if (y.requires_grad()) {
    tape.record(y, [x, y]() mutable {
      const auto g = y.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return y;
}

NdValue slice(Tape& tape, const NdValue& x, std::size_t axis, std::size_t begin, std::size_t end) {
  require_axis("slice", x, axis);
  if (begin >= end || end > x.dim(axis)) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for axis of size " + std::to_string(x.dim(axis)));
  }
  const auto s = split_at(x.shape(), axis);
  const std::size_t w = end - begin;
  Shape out_shape = x.shape();
  out_shape[axis] = w;
  const auto dx = x.data();
  std::vector<double> out(s.outer * w * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(dx.data() + (o * s.n + begin) * s.inner, w * s.inner, out.data() + o * w * s.inner);
  }
  NdValue y = make_result("slice", std::move(out_shape), std::move(out), {&x});
  if (y.requires_grad()) {
    tape.record(y, [x, y, s, w, begin]() mutable {
      const auto g = y.grad();
      auto gx = x.mutable_grad();
      for (std::size_t o = 0; o < s.outer; ++o) {
        const double* src = g.data() + o * w * s.inner;
        double* dst = gx.data() + (o * s.n + begin) * s.inner;
        for (std::size_t i = 0; i < w * s.inner; ++i) dst[i] += src[i];
      }
    });
  }
  return y;
}

NdValue concat(Tape& tape, const std::vector<NdValue>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  require_axis("concat", parts.front(), axis);
  Shape out_shape = parts.front().shape();
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    Shape probe = p.shape();
    if (probe.size() != out_shape.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < probe.size(); ++d) {
      if (d != axis && probe[d] != parts.front().dim(d)) {
        throw ShapeError("concat: " + to_string(p.shape()) + " vs " + to_string(parts.front().shape()));
      }
    }
    out_shape[axis] += p.dim(axis);
  }
  const auto s = split_at(out_shape, axis);
  std::vector<double> out(numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  bool rg = false;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t w = p.dim(axis);
    const auto dp = p.data();
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(dp.data() + o * w * s.inner, w * s.inner, out.data() + (o * s.n + off) * s.inner);
    }
    off += w;
    rg = rg || p.requires_grad();
  }
  check_finite("concat", out);
  NdValue y(std::move(out_shape), std::move(out), rg);
  if (rg) {
    tape.record(y, [parts, y, s, offsets, axis]() mutable {
      const auto g = y.grad();
      for (std::size_t idx = 0; idx < parts.size(); ++idx) {
        auto& p = parts[idx];
        if (!p.requires_grad()) continue;
        const std::size_t w = p.dim(axis);
        auto gp = p.mutable_grad();
        for (std::size_t o = 0; o < s.outer; ++o) {
          const double* src = g.data() + (o * s.n + offsets[idx]) * s.inner;
          double* dst = gp.data() + o * w * s.inner;
          for (std::size_t i = 0; i < w * s.inner; ++i) dst[i] += src[i];
        }
      }
    });
  }
  return y;
}

// ---- verification -----------------------------------------------------------

double grad_check(const std::function<NdValue(Tape&)>& loss_fn, std::span<NdValue> params,
                  const GradCheckOptions& options) {
  if (!(options.eps > 0)) throw ContractError("grad_check: eps must be positive");
  for (auto& p : params) p.zero_grad();
  {
    Tape tape;
    NdValue loss = loss_fn(tape);
    backward(loss, tape);
  }
  auto evaluate = [&]() {
    Tape tape;
    return loss_fn(tape).item();
  };
  std::mt19937_64 rng(options.seed);
  double worst = 0;
  for (auto& p : params) {
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords > 0 && coords.size() > options.max_coords) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords);
    }
    auto values = p.mutable_data();
    for (std::size_t c : coords) {
      const double saved = values[c];
      values[c] = saved + options.eps;
      const double up = evaluate();
      values[c] = saved - options.eps;
      const double down = evaluate();
      values[c] = saved;
      const double numeric = (up - down) / (2 * options.eps);
      const double err = std::abs(analytic[c] - numeric) /
                         std::max(1.0, std::abs(analytic[c]) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double grad_check(const std::function<NdValue(Tape&, const NdValue&)>& fn, const NdValue& x, double eps) {
  NdValue leaf = x.detach(true);
  std::vector<NdValue> params{leaf};
  return grad_check([&](Tape& tape) { return fn(tape, leaf); }, params, GradCheckOptions{eps, 0, 0});
}

}  // namespace eegatt::nd

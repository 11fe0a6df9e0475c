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

// Dense n-dimensional arrays with tape-based reverse-mode differentiation.
//
// Values are reference-counted handles: copying an NdValue aliases the same
// storage. Every differentiable operation takes the Tape it records onto as
// its first argument; a tape and the values flowing through it belong to one
// thread at a time.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eegatt/errors.hpp"

namespace eegatt::nd {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first written
  bool requires_grad = false;
};
}  // namespace detail

class NdValue {
 public:
  NdValue() = default;
  NdValue(Shape shape, std::vector<double> data, bool requires_grad = false);

  static NdValue zeros(Shape shape, bool requires_grad = false);
  static NdValue filled(Shape shape, double value, bool requires_grad = false);
  static NdValue scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t size() const { return node_->data.size(); }

  std::span<const double> data() const { return node_->data; }
  /// Direct write access, meant for leaves (initialisation, optimiser updates).
  std::span<double> mutable_data() const { return node_->data; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient view; zeros if nothing has been accumulated yet.
  std::span<const double> grad() const;
  /// Gradient buffer, allocated (zero-filled) on first access.
  std::span<double> mutable_grad() const;
  void zero_grad() const;

  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  /// Same underlying storage.
  bool same(const NdValue& other) const noexcept { return node_ == other.node_; }
  /// Deep copy of the data, detached from any gradient history.
  NdValue detach(bool requires_grad = false) const;

 private:
  std::shared_ptr<detail::Node> node_;
  friend class Tape;
};

/// Ordered record of differentiable operations. Rules are replayed in
/// reverse by backward(); each rule reads its output's gradient and
/// accumulates into the gradients of its operands.
class Tape {
 public:
  using Rule = std::function<void()>;

  void record(const NdValue& output, Rule rule);
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  void clear() noexcept { records_.clear(); }
  bool produced(const NdValue& value) const;

 private:
  struct Record {
    std::shared_ptr<detail::Node> output;
    Rule rule;
  };
  std::vector<Record> records_;
  friend void backward(const NdValue& loss, Tape& tape);
};

/// Accumulates d(loss)/d(leaf) into every requires_grad leaf reachable from
/// `loss`, then clears the tape. `loss` must hold exactly one element.
void backward(const NdValue& loss, Tape& tape);

/// Builds an op result whose requires_grad flag is inherited from `inputs`.
/// Throws NumericError if `data` holds NaN or Inf.
NdValue make_result(const char* op, Shape shape, std::vector<double> data,
                    std::initializer_list<const NdValue*> inputs);

// ---- arithmetic -----------------------------------------------------------

/// Matrix product. Supports [m×k]·[k×n], [...×m×k]·[k×n] (leading axes
/// flattened) and batched [g×m×k]·[g×k×n].
NdValue matmul(Tape& tape, const NdValue& a, const NdValue& b);

/// Elementwise ops with numpy-style broadcasting.
NdValue add(Tape& tape, const NdValue& a, const NdValue& b);
NdValue sub(Tape& tape, const NdValue& a, const NdValue& b);
NdValue mul(Tape& tape, const NdValue& a, const NdValue& b);

NdValue scale(Tape& tape, const NdValue& x, double factor);
NdValue expand(Tape& tape, const NdValue& x, const Shape& shape);

enum class Activation { sigmoid, tanh, relu, leaky_relu, elu };

/// `slope` is only read by leaky_relu (negative-side slope); elu uses alpha 1.
NdValue activation(Tape& tape, Activation kind, const NdValue& x, double slope = 0.2);

/// Max-shifted softmax along `axis`.
NdValue softmax(Tape& tape, const NdValue& x, std::size_t axis);

enum class Reduce { sum, mean, max };

/// Removes `axis`. Max routes the gradient to the first maximal element.
NdValue reduce(Tape& tape, Reduce kind, const NdValue& x, std::size_t axis);
NdValue sum_all(Tape& tape, const NdValue& x);

/// "Same"-padded cross-correlation. x is [in×L] or [n×in×L], kernels
/// [out×in×k] with odd k, bias [out].
NdValue conv1d(Tape& tape, const NdValue& x, const NdValue& kernels, const NdValue& bias);

// ---- layout ---------------------------------------------------------------

NdValue reshape(Tape& tape, const NdValue& x, Shape shape);
/// Elements [begin, end) along `axis`.
NdValue slice(Tape& tape, const NdValue& x, std::size_t axis, std::size_t begin, std::size_t end);
NdValue concat(Tape& tape, const std::vector<NdValue>& parts, std::size_t axis);

// ---- verification ---------------------------------------------------------

struct GradCheckOptions {
  double eps = 1e-5;
  /// Upper bound on probed coordinates per parameter; 0 probes all of them.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

/// Compares backward() against central differences over `params`, which are
/// perturbed in place and restored. Returns max |a-n| / max(1, |a|+|n|).
double grad_check(const std::function<NdValue(Tape&)>& loss_fn, std::span<NdValue> params,
                  const GradCheckOptions& options = {});

/// Single-input form: `fn` maps x to a scalar.
double grad_check(const std::function<NdValue(Tape&, const NdValue&)>& fn, const NdValue& x,
                  double eps);

}  // namespace eegatt::nd

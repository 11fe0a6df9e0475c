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

#include "eegatt/layers.hpp"

#include <cmath>

#include "eegatt/errors.hpp"

namespace eegatt::layers {

using nd::Activation;
using nd::Reduce;

// ---- ParamStore ---------------------------------------------------------------

NdValue ParamStore::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw ContractError("parameter registered twice: " + name);
  NdValue p(std::move(shape), std::move(values), true);
  entries_.emplace_back(name, p);
  return p;
}

NdValue ParamStore::glorot(const std::string& name, Shape shape, std::size_t fan_in, std::size_t fan_out,
                           Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(nd::numel(shape));
  for (double& v : values) v = rng.uniform(-limit, limit);
  return add(name, std::move(shape), std::move(values));
}

NdValue ParamStore::constant(const std::string& name, Shape shape, double value) {
  const std::size_t n = nd::numel(shape);
  return add(name, std::move(shape), std::vector<double>(n, value));
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& [n, _] : entries_) {
    if (n == name) return true;
  }
  return false;
}

const NdValue& ParamStore::get(const std::string& name) const {
  for (const auto& [n, v] : entries_) {
    if (n == name) return v;
  }
  throw ContractError("unknown parameter: " + name);
}

std::vector<NdValue> ParamStore::values() const {
  std::vector<NdValue> out;
  for (const auto& [_, v] : entries_) out.push_back(v);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, v] : entries_) n += v.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, v] : entries_) v.zero_grad();
}

// ---- Dense --------------------------------------------------------------------

Dense::Dense(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng)
    : W(store.glorot(prefix + ".W", {in, out}, in, out, rng)), b(store.constant(prefix + ".b", {out}, 0.0)) {}

NdValue Dense::forward(Tape& tape, const NdValue& x) const {
  if (x.rank() == 1) {
    auto y = forward(tape, nd::reshape(tape, x, {1, x.size()}));
    return nd::reshape(tape, y, {y.size()});
  }
  if (x.rank() != 2 || x.dim(1) != W.dim(0)) {
    throw ShapeError("dense: input " + nd::to_string(x.shape()) + " vs weights " + nd::to_string(W.shape()));
  }
  return nd::add(tape, nd::matmul(tape, x, W), b);
}

// ---- LSTM ---------------------------------------------------------------------

Lstm::Lstm(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden_units, Rng& rng)
    : hidden(hidden_units) {
  Wx = store.glorot(prefix + ".Wx", {in, 4 * hidden}, in, 4 * hidden, rng);
  Wh = store.glorot(prefix + ".Wh", {hidden, 4 * hidden}, hidden, 4 * hidden, rng);
  std::vector<double> bias(4 * hidden, 0.0);
  for (std::size_t i = hidden; i < 2 * hidden; ++i) bias[i] = 1.0;
  b = store.add(prefix + ".b", {4 * hidden}, std::move(bias));
}

std::vector<NdValue> Lstm::forward(Tape& tape, const std::vector<NdValue>& steps) const {
  if (steps.empty()) throw ShapeError("lstm: empty sequence");
  const std::size_t batch = steps.front().dim(0);
  for (const auto& s : steps) {
    if (s.rank() != 2 || s.dim(0) != batch || s.dim(1) != Wx.dim(0)) {
      throw ShapeError("lstm: step " + nd::to_string(s.shape()) + " vs input width " + std::to_string(Wx.dim(0)));
    }
  }
  const std::size_t H = hidden;
  // Input projections for every step in one product.
  const NdValue stacked = steps.size() == 1 ? steps.front() : nd::concat(tape, steps, 0);
  const NdValue projected = nd::add(tape, nd::matmul(tape, stacked, Wx), b);
  std::vector<NdValue> out;
  NdValue h, c;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    NdValue z = steps.size() == 1 ? projected : nd::slice(tape, projected, 0, t * batch, (t + 1) * batch);
    if (t > 0) z = nd::add(tape, z, nd::matmul(tape, h, Wh));
    const NdValue i = nd::activation(tape, Activation::sigmoid, nd::slice(tape, z, 1, 0, H));
    const NdValue f = nd::activation(tape, Activation::sigmoid, nd::slice(tape, z, 1, H, 2 * H));
    const NdValue g = nd::activation(tape, Activation::tanh, nd::slice(tape, z, 1, 2 * H, 3 * H));
    const NdValue o = nd::activation(tape, Activation::sigmoid, nd::slice(tape, z, 1, 3 * H, 4 * H));
    c = t == 0 ? nd::mul(tape, i, g) : nd::add(tape, nd::mul(tape, f, c), nd::mul(tape, i, g));
    h = nd::mul(tape, o, nd::activation(tape, Activation::tanh, c));
    out.push_back(h);
  }
  return out;
}

NdValue Lstm::forward(Tape& tape, const NdValue& sequence) const {
  if (sequence.rank() != 2) throw ShapeError("lstm: sequence must be [T x in]");
  std::vector<NdValue> steps;
  for (std::size_t t = 0; t < sequence.dim(0); ++t) steps.push_back(nd::slice(tape, sequence, 0, t, t + 1));
  return nd::concat(tape, forward(tape, steps), 0);
}

// ---- graph layers -------------------------------------------------------------

namespace {

NdValue graph_nodes(const features::GraphSnapshot& g) {
  return NdValue({1, g.nodes, g.width}, g.node_features);
}

void check_nodes(const char* layer, const NdValue& nodes, const NdValue& W) {
  if (nodes.rank() != 3 || nodes.dim(2) != W.dim(0)) {
    throw ShapeError(std::string(layer) + ": node features " + nd::to_string(nodes.shape()) + " vs width " +
                     std::to_string(W.dim(0)));
  }
}

}  // namespace

GatLayer::GatLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out_width, Rng& rng)
    : out(out_width) {
  W = store.glorot(prefix + ".W_G", {in, out}, in, out, rng);
  a = store.glorot(prefix + ".a", {2 * out}, 2 * out, 1, rng);
}

GatLayer::Output GatLayer::forward(Tape& tape, const NdValue& nodes) const {
  check_nodes("gat", nodes, W);
  const std::size_t G = nodes.dim(0), C = nodes.dim(1);
  const NdValue z = nd::matmul(tape, nodes, W);  // [G x C x out]
  const NdValue a_src = nd::reshape(tape, nd::slice(tape, a, 0, 0, out), {out, 1});
  const NdValue a_dst = nd::reshape(tape, nd::slice(tape, a, 0, out, 2 * out), {out, 1});
  const NdValue s_src = nd::matmul(tape, z, a_src);                                   // [G x C x 1]
  const NdValue s_dst = nd::reshape(tape, nd::matmul(tape, z, a_dst), {G, 1, C});     // [G x 1 x C]
  const NdValue scores = nd::activation(tape, Activation::leaky_relu, nd::add(tape, s_src, s_dst), 0.2);
  const NdValue alpha = nd::softmax(tape, scores, 2);
  const NdValue h = nd::activation(tape, Activation::elu, nd::matmul(tape, alpha, z));
  return {h, alpha};
}

GatLayer::Output GatLayer::forward(Tape& tape, const features::GraphSnapshot& graph) const {
  auto o = forward(tape, graph_nodes(graph));
  return {nd::reshape(tape, o.embeddings, {graph.nodes, out}),
          nd::reshape(tape, o.attention, {graph.nodes, graph.nodes})};
}

GcnLayer::GcnLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out_width, Rng& rng)
    : W(store.glorot(prefix + ".W_G", {in, out_width}, in, out_width, rng)), out(out_width) {}

NdValue GcnLayer::forward(Tape& tape, const NdValue& nodes) const {
  check_nodes("gcn", nodes, W);
  const std::size_t G = nodes.dim(0), C = nodes.dim(1);
  const NdValue z = nd::matmul(tape, nodes, W);
  const NdValue pooled = nd::reshape(tape, nd::reduce(tape, Reduce::mean, z, 1), {G, 1, out});
  return nd::activation(tape, Activation::elu, nd::expand(tape, pooled, {G, C, out}));
}

NdValue GcnLayer::forward(Tape& tape, const features::GraphSnapshot& graph) const {
  return nd::reshape(tape, forward(tape, graph_nodes(graph)), {graph.nodes, out});
}

// ---- temporal attention -------------------------------------------------------

TemporalAttention::TemporalAttention(ParamStore& store, const std::string& prefix, std::size_t hidden, Rng& rng) {
  Ws = store.glorot(prefix + ".W_s", {hidden, hidden}, hidden, hidden, rng);
  v = store.glorot(prefix + ".v", {hidden, 1}, hidden, 1, rng);
}

TemporalAttention::Output TemporalAttention::forward(Tape& tape, const std::vector<NdValue>& steps) const {
  if (steps.empty()) throw ShapeError("temporal attention: empty sequence");
  std::vector<NdValue> scores;
  for (const auto& h : steps) {
    if (h.rank() != 2 || h.dim(1) != Ws.dim(0)) throw ShapeError("temporal attention: step width mismatch");
    scores.push_back(nd::matmul(tape, nd::activation(tape, Activation::tanh, nd::matmul(tape, h, Ws)), v));
  }
  const NdValue u = scores.size() == 1 ? scores.front() : nd::concat(tape, scores, 1);  // [B x T]
  const NdValue alpha = nd::softmax(tape, u, 1);
  std::vector<NdValue> weighted;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    weighted.push_back(nd::mul(tape, steps[t], nd::slice(tape, alpha, 1, t, t + 1)));
  }
  const NdValue context = weighted.size() == 1 ? weighted.front() : nd::concat(tape, weighted, 1);
  return {context, alpha};
}

TemporalAttention::Output TemporalAttention::forward(Tape& tape, const NdValue& sequence) const {
  if (sequence.rank() != 2) throw ShapeError("temporal attention: sequence must be [T x H]");
  std::vector<NdValue> steps;
  for (std::size_t t = 0; t < sequence.dim(0); ++t) steps.push_back(nd::slice(tape, sequence, 0, t, t + 1));
  auto o = forward(tape, steps);
  return {nd::reshape(tape, o.context, {o.context.size()}), nd::reshape(tape, o.weights, {o.weights.size()})};
}

// ---- CBAM ---------------------------------------------------------------------

namespace {

struct Batched {
  NdValue value;
  bool single;
};

Batched as_batch(Tape& tape, const NdValue& fmap) {
  if (fmap.rank() == 3) return {fmap, false};
  if (fmap.rank() == 2) return {nd::reshape(tape, fmap, {1, fmap.dim(0), fmap.dim(1)}), true};
  throw ShapeError("cbam: feature map must be [ch x L] or [N x ch x L]");
}

}  // namespace

ChannelAttention::ChannelAttention(ParamStore& store, const std::string& prefix, std::size_t channels,
                                   std::size_t ratio, Rng& rng) {
  if (ratio == 0 || channels % ratio != 0) {
    throw ConfigError("cbam: reduction ratio " + std::to_string(ratio) + " does not divide " +
                      std::to_string(channels) + " channels");
  }
  const std::size_t hidden = channels / ratio;
  W1 = store.glorot(prefix + ".W1", {channels, hidden}, channels, hidden, rng);
  W2 = store.glorot(prefix + ".W2", {hidden, channels}, hidden, channels, rng);
}

NdValue ChannelAttention::weights(Tape& tape, const NdValue& fmap) const {
  const auto [f, single] = as_batch(tape, fmap);
  if (f.dim(1) != W1.dim(0)) throw ShapeError("cbam channel: channel count mismatch");
  auto mlp = [&](const NdValue& d) {
    return nd::matmul(tape, nd::activation(tape, Activation::relu, nd::matmul(tape, d, W1)), W2);
  };
  const NdValue avg = nd::reduce(tape, Reduce::mean, f, 2);
  const NdValue mx = nd::reduce(tape, Reduce::max, f, 2);
  const NdValue a = nd::activation(tape, Activation::sigmoid, nd::add(tape, mlp(avg), mlp(mx)));
  return single ? nd::reshape(tape, a, {a.size()}) : a;
}

NdValue ChannelAttention::apply(Tape& tape, const NdValue& fmap) const {
  const NdValue a = weights(tape, fmap);
  const Shape col = fmap.rank() == 3 ? Shape{fmap.dim(0), fmap.dim(1), 1} : Shape{fmap.dim(0), 1};
  return nd::mul(tape, fmap, nd::reshape(tape, a, col));
}

SpatialAttention::SpatialAttention(ParamStore& store, const std::string& prefix, std::size_t kernel_size, Rng& rng) {
  if (kernel_size % 2 == 0) throw ConfigError("cbam spatial: kernel size must be odd");
  kernel = store.glorot(prefix + ".kernel", {1, 2, kernel_size}, 2 * kernel_size, kernel_size, rng);
}

NdValue SpatialAttention::weights(Tape& tape, const NdValue& fmap) const {
  const auto [f, single] = as_batch(tape, fmap);
  const std::size_t N = f.dim(0), L = f.dim(2);
  const NdValue avg = nd::reshape(tape, nd::reduce(tape, Reduce::mean, f, 1), {N, 1, L});
  const NdValue mx = nd::reshape(tape, nd::reduce(tape, Reduce::max, f, 1), {N, 1, L});
  const NdValue stacked = nd::concat(tape, {avg, mx}, 1);
  const NdValue conv = nd::conv1d(tape, stacked, kernel, NdValue::zeros({1}));
  const NdValue a = nd::activation(tape, Activation::sigmoid, conv);
  return nd::reshape(tape, a, single ? Shape{L} : Shape{N, L});
}

NdValue SpatialAttention::apply(Tape& tape, const NdValue& fmap) const {
  const NdValue a = weights(tape, fmap);
  const Shape row = fmap.rank() == 3 ? Shape{fmap.dim(0), 1, fmap.dim(2)} : Shape{1, fmap.dim(1)};
  return nd::mul(tape, fmap, nd::reshape(tape, a, row));
}

NdValue cbam(Tape& tape, const ChannelAttention& channel, const SpatialAttention& spatial, const NdValue& fmap) {
  return spatial.apply(tape, channel.apply(tape, fmap));
}

// ---- convolution & dropout ----------------------------------------------------

Conv1d::Conv1d(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, std::size_t kernel_size,
               Rng& rng) {
  if (kernel_size % 2 == 0) throw ConfigError("conv1d: kernel size must be odd");
  kernels = store.glorot(prefix + ".kernels", {out, in, kernel_size}, in * kernel_size, out * kernel_size, rng);
  bias = store.constant(prefix + ".bias", {out}, 0.0);
}

NdValue Conv1d::forward(Tape& tape, const NdValue& x) const { return nd::conv1d(tape, x, kernels, bias); }

NdValue dropout(Tape& tape, const NdValue& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0 && p < 1)) throw ConfigError("dropout: rate must be in [0, 1)");
  if (mode == Mode::eval || p == 0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep_scale;
  return nd::mul(tape, x, NdValue(x.shape(), std::move(mask)));
}

}  // namespace eegatt::layers

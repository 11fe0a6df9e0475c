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

// Neural building blocks over ndgrad values. Every layer registers its
// parameters in a ParamStore under "<prefix>.<name>" at construction.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "eegatt/features.hpp"
#include "eegatt/ndgrad.hpp"
#include "eegatt/random.hpp"

namespace eegatt::layers {

using nd::NdValue;
using nd::Shape;
using nd::Tape;

enum class Mode { train, eval };

/// Named parameter registry. Insertion order is stable and each name is
/// registered once.
class ParamStore {
 public:
  NdValue add(const std::string& name, Shape shape, std::vector<double> values);
  /// Glorot-uniform initialisation in +-sqrt(6 / (fan_in + fan_out)).
  NdValue glorot(const std::string& name, Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  NdValue constant(const std::string& name, Shape shape, double value);

  bool contains(const std::string& name) const;
  const NdValue& get(const std::string& name) const;
  const std::vector<std::pair<std::string, NdValue>>& entries() const { return entries_; }
  std::vector<NdValue> values() const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, NdValue>> entries_;
};

/// y = x W + b. Accepts [B x in] or a single vector [in].
struct Dense {
  NdValue W, b;
  Dense() = default;
  Dense(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
  NdValue forward(Tape& tape, const NdValue& x) const;
};

/// Single-layer LSTM, gate order (input, forget, candidate, output), zero
/// initial state. The forget-gate bias starts at 1.
struct Lstm {
  NdValue Wx, Wh, b;
  std::size_t hidden = 0;
  Lstm() = default;
  Lstm(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng);
  /// One [B x in] value per time step; returns the hidden state per step.
  std::vector<NdValue> forward(Tape& tape, const std::vector<NdValue>& steps) const;
  /// Single sequence [T x in] -> [T x hidden].
  NdValue forward(Tape& tape, const NdValue& sequence) const;
};

/// Single-head graph attention over a complete graph with self-loops:
/// e_vu = leaky_relu(a . [W x_v || W x_u], 0.2), alpha_v = softmax_u(e_v),
/// h'_v = elu(sum_u alpha_vu W x_u).
struct GatLayer {
  NdValue W, a;
  std::size_t out = 0;
  struct Output {
    NdValue embeddings;  // [G x C x out]
    NdValue attention;   // [G x C x C], rows sum to 1
  };
  GatLayer() = default;
  GatLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
  /// Batched node features [G x C x in].
  Output forward(Tape& tape, const NdValue& nodes) const;
  /// One graph; embeddings are [C x out], attention [C x C].
  Output forward(Tape& tape, const features::GraphSnapshot& graph) const;
};

/// Attention-free counterpart of GatLayer: h'_v = elu(mean_u W x_u).
struct GcnLayer {
  NdValue W;
  std::size_t out = 0;
  GcnLayer() = default;
  GcnLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
  NdValue forward(Tape& tape, const NdValue& nodes) const;
  NdValue forward(Tape& tape, const features::GraphSnapshot& graph) const;
};

/// Soft attention over time steps: u_i = v . tanh(W_s h_i), alpha =
/// softmax(u), context = [alpha_1 h_1 || ... || alpha_T h_T].
struct TemporalAttention {
  NdValue Ws, v;
  struct Output {
    NdValue context;  // [B x T*H]
    NdValue weights;  // [B x T]
  };
  TemporalAttention() = default;
  TemporalAttention(ParamStore& store, const std::string& prefix, std::size_t hidden, Rng& rng);
  Output forward(Tape& tape, const std::vector<NdValue>& steps) const;
  /// Single sequence [T x H]; context is [T*H], weights [T].
  Output forward(Tape& tape, const NdValue& sequence) const;
};

/// CBAM channel attention: A_c = sigmoid(MLP(avg_L F) + MLP(max_L F)) with a
/// shared bias-free MLP of hidden width channels/ratio.
struct ChannelAttention {
  NdValue W1, W2;
  ChannelAttention() = default;
  ChannelAttention(ParamStore& store, const std::string& prefix, std::size_t channels, std::size_t ratio, Rng& rng);
  /// F is [N x ch x L] (-> [N x ch]) or [ch x L] (-> [ch]).
  NdValue weights(Tape& tape, const NdValue& fmap) const;
  NdValue apply(Tape& tape, const NdValue& fmap) const;
};

/// CBAM spatial attention: A_s = sigmoid(conv([mean_ch F; max_ch F])), a
/// bias-free "same" convolution with an odd kernel.
struct SpatialAttention {
  NdValue kernel;
  SpatialAttention() = default;
  SpatialAttention(ParamStore& store, const std::string& prefix, std::size_t kernel_size, Rng& rng);
  /// F is [N x ch x L] (-> [N x L]) or [ch x L] (-> [L]).
  NdValue weights(Tape& tape, const NdValue& fmap) const;
  NdValue apply(Tape& tape, const NdValue& fmap) const;
};

/// Channel refinement followed by spatial refinement.
NdValue cbam(Tape& tape, const ChannelAttention& channel, const SpatialAttention& spatial, const NdValue& fmap);

struct Conv1d {
  NdValue kernels, bias;
  Conv1d() = default;
  Conv1d(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, std::size_t kernel_size,
         Rng& rng);
  NdValue forward(Tape& tape, const NdValue& x) const;
};

/// Inverted dropout. Identity (the same value) in eval mode or when p == 0.
NdValue dropout(Tape& tape, const NdValue& x, double p, Mode mode, Rng& rng);

}  // namespace eegatt::layers

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

#include "eegatt/models.hpp"

#include <algorithm>

#include "eegatt/errors.hpp"

namespace eegatt::models {

using features::SequenceSample;
using nd::Activation;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::instagats: return "instagats";
    case ModelKind::gnn: return "gnn";
    case ModelKind::lstm_att: return "lstm_att";
    case ModelKind::lstm: return "lstm";
    case ModelKind::cnn_att: return "cnn_att";
    case ModelKind::cnn: return "cnn";
  }
  return "?";
}

ModelKind parse_kind(std::string_view name) {
  for (ModelKind k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown model kind: " + std::string(name));
}

bool is_graph_kind(ModelKind k) { return k == ModelKind::instagats || k == ModelKind::gnn; }
bool is_lstm_kind(ModelKind k) { return k == ModelKind::lstm_att || k == ModelKind::lstm; }
bool is_cnn_kind(ModelKind k) { return k == ModelKind::cnn_att || k == ModelKind::cnn; }
bool has_attention(ModelKind k) {
  return k == ModelKind::instagats || k == ModelKind::lstm_att || k == ModelKind::cnn_att;
}

ModelSpec ModelSpec::defaults(ModelKind kind, std::size_t channels, std::size_t T) {
  ModelSpec s;
  s.kind = kind;
  s.channels = channels;
  s.T = T;
  switch (kind) {
    case ModelKind::instagats:
      s.gat_out_channels = 64;
      s.lstm_hidden = 64;
      s.dense_dropout = 0.2;
      s.learning_rate = 0.0005;
      break;
    case ModelKind::gnn:
      s.gat_out_channels = 32;
      s.lstm_hidden = 64;
      s.dense_dropout = 0.15;
      s.learning_rate = 0.0001;
      break;
    case ModelKind::lstm_att:
    case ModelKind::lstm:
      s.lstm_hidden = 128;
      s.l2_reg = 0.001;
      s.input_dropout = 0.1;
      s.layer1_dropout = 0.2;
      s.layer2_dropout = 0.2;
      s.learning_rate = 0.0001;
      break;
    case ModelKind::cnn_att:
      s.conv_kernel = 3;
      s.conv_filters = 32;
      s.lstm_hidden = 256;
      s.dense_dropout = 0.15;
      s.learning_rate = 0.001;
      s.cbam_ratio = 16;
      s.cbam_spatial_kernel = 7;
      break;
    case ModelKind::cnn:
      s.conv_kernel = 3;
      s.conv_filters = 8;
      s.lstm_hidden = 8;
      s.dense_dropout = 0.15;
      s.learning_rate = 0.001;
      break;
  }
  if (is_graph_kind(kind)) {
    s.node_correlations = true;
    s.mean_pool_nodes = false;
  }
  return s;
}

std::size_t ModelSpec::node_width() const {
  return node_correlations.value_or(true) ? channels + features : features;
}

void ModelSpec::validate() const {
  auto fail = [&](const std::string& what) {
    throw ConfigError(std::string(to_string(kind)) + " spec: " + what);
  };
  auto only_for = [&](bool present, bool allowed, const char* field) {
    if (present && !allowed) fail(std::string(field) + " does not apply");
    if (!present && allowed) fail(std::string(field) + " is required");
  };
  const bool graph = is_graph_kind(kind), rnn = is_lstm_kind(kind), conv = is_cnn_kind(kind);
  only_for(gat_out_channels.has_value(), graph, "gat_out_channels");
  only_for(lstm_hidden.has_value(), true, "lstm_hidden");
  only_for(dense_dropout.has_value(), graph || conv, "dense_dropout");
  only_for(input_dropout.has_value(), rnn, "input_dropout");
  only_for(layer1_dropout.has_value(), rnn, "layer1_dropout");
  only_for(layer2_dropout.has_value(), rnn, "layer2_dropout");
  only_for(l2_reg.has_value(), rnn, "l2_reg");
  only_for(conv_kernel.has_value(), conv, "conv_kernel");
  only_for(conv_filters.has_value(), conv, "conv_filters");
  only_for(cbam_ratio.has_value(), kind == ModelKind::cnn_att, "cbam_ratio");
  only_for(cbam_spatial_kernel.has_value(), kind == ModelKind::cnn_att, "cbam_spatial_kernel");
  only_for(node_correlations.has_value(), graph, "node_correlations");
  only_for(mean_pool_nodes.has_value(), graph, "mean_pool_nodes");

  if (channels == 0 || features == 0 || T == 0) fail("channels, features and T must be positive");
  if (!(learning_rate >= 0)) fail("learning rate must be non-negative");
  if (*lstm_hidden == 0) fail("lstm_hidden must be positive");
  if (gat_out_channels && *gat_out_channels == 0) fail("gat_out_channels must be positive");
  for (const auto& p : {dense_dropout, input_dropout, layer1_dropout, layer2_dropout}) {
    if (p && !(*p >= 0 && *p < 1)) fail("dropout rates must be in [0, 1)");
  }
  if (l2_reg && *l2_reg < 0) fail("l2_reg must be non-negative");
  if (conv) {
    if (*conv_filters == 0) fail("conv_filters must be positive");
    if (*conv_kernel % 2 == 0) fail("conv_kernel must be odd");
    if (flat_width() < *conv_kernel) fail("frame vector shorter than conv kernel");
  }
  if (kind == ModelKind::cnn_att) {
    if (*cbam_ratio == 0 || *conv_filters % *cbam_ratio != 0) fail("cbam_ratio must divide conv_filters");
    if (*cbam_spatial_kernel % 2 == 0) fail("cbam_spatial_kernel must be odd");
    if (flat_width() < *cbam_spatial_kernel) fail("frame vector shorter than spatial kernel");
  }
}

ModelSpec ModelSpec::capped(std::size_t max_width) const {
  ModelSpec s = *this;
  auto cap = [&](std::optional<std::size_t>& v) {
    if (v) *v = std::min(*v, max_width);
  };
  cap(s.gat_out_channels);
  cap(s.lstm_hidden);
  cap(s.conv_filters);
  if (s.cbam_ratio && s.conv_filters) {
    while (*s.conv_filters % *s.cbam_ratio != 0) --*s.cbam_ratio;
  }
  return s;
}

Model::Model(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(seed);
  const ModelKind k = spec_.kind;
  const std::size_t H = *spec_.lstm_hidden;
  const std::size_t C = spec_.channels;
  std::size_t dense_in = H;
  if (is_graph_kind(k)) {
    const std::size_t D = *spec_.gat_out_channels;
    if (k == ModelKind::instagats) {
      gat_ = layers::GatLayer(params_, "graph", spec_.node_width(), D, rng);
    } else {
      gcn_ = layers::GcnLayer(params_, "graph", spec_.node_width(), D, rng);
    }
    const std::size_t frame_width = *spec_.mean_pool_nodes ? D : C * D;
    lstm1_ = layers::Lstm(params_, "lstm", frame_width, H, rng);
  } else if (is_lstm_kind(k)) {
    lstm1_ = layers::Lstm(params_, "lstm1", spec_.flat_width(), H, rng);
    lstm2_ = layers::Lstm(params_, "lstm2", H, H, rng);
    if (k == ModelKind::lstm_att) {
      temporal_ = layers::TemporalAttention(params_, "attention", H, rng);
      dense_in = spec_.T * H;
    }
  } else {
    const std::size_t filters = *spec_.conv_filters;
    conv_ = layers::Conv1d(params_, "conv", 1, filters, *spec_.conv_kernel, rng);
    if (k == ModelKind::cnn_att) {
      channel_att_ = layers::ChannelAttention(params_, "cbam.channel", filters, *spec_.cbam_ratio, rng);
      spatial_att_ = layers::SpatialAttention(params_, "cbam.spatial", *spec_.cbam_spatial_kernel, rng);
    }
    lstm1_ = layers::Lstm(params_, "lstm", filters * spec_.flat_width(), H, rng);
  }
  dense_ = layers::Dense(params_, "dense", dense_in, 2, rng);
}

NdValue Model::graph_input(std::span<const SequenceSample> batch) const {
  const std::size_t B = batch.size(), T = spec_.T, C = spec_.channels, W = spec_.node_width();
  const auto layout = *spec_.node_correlations ? features::NodeLayout::correlation_and_features
                                               : features::NodeLayout::features_only;
  std::vector<double> data;
  data.reserve(T * B * C * W);
  for (std::size_t t = 0; t < T; ++t) {
    for (const auto& s : batch) {
      const auto g = features::assemble_graph(s.frames[t], layout);
      data.insert(data.end(), g.node_features.begin(), g.node_features.end());
    }
  }
  return NdValue({T * B, C, W}, std::move(data));
}

std::vector<NdValue> Model::flat_steps(std::span<const SequenceSample> batch) const {
  const std::size_t B = batch.size(), L = spec_.flat_width();
  std::vector<NdValue> steps;
  for (std::size_t t = 0; t < spec_.T; ++t) {
    std::vector<double> data;
    data.reserve(B * L);
    for (const auto& s : batch) {
      const auto flat = features::assemble_flat(s.frames[t]);
      data.insert(data.end(), flat.begin(), flat.end());
    }
    steps.emplace_back(nd::Shape{B, L}, std::move(data));
  }
  return steps;
}

ForwardResult Model::run(Tape& tape, std::span<const SequenceSample> batch, Mode mode, Rng& rng) const {
  if (batch.empty()) throw ContractError("forward: empty batch");
  for (const auto& s : batch) {
    if (s.frames.size() != spec_.T) throw ShapeError("forward: sample has wrong number of frames");
    for (const auto& f : s.frames) {
      if (f.channels != spec_.channels || f.X.size() != spec_.channels * spec_.features) {
        throw ShapeError("forward: frame does not match model channel/feature count");
      }
    }
  }
  const std::size_t B = batch.size(), T = spec_.T;
  const ModelKind k = spec_.kind;
  ForwardResult result;
  NdValue representation;

  auto split_steps = [&](const NdValue& per_frame) {
    std::vector<NdValue> steps;
    for (std::size_t t = 0; t < T; ++t) steps.push_back(nd::slice(tape, per_frame, 0, t * B, (t + 1) * B));
    return steps;
  };

  if (is_graph_kind(k)) {
    const NdValue nodes = graph_input(batch);
    NdValue emb;
    if (k == ModelKind::instagats) {
      auto out = gat_.forward(tape, nodes);
      emb = out.embeddings;
      result.attention["graph"] = out.attention;
    } else {
      emb = gcn_.forward(tape, nodes);
    }
    const std::size_t D = *spec_.gat_out_channels;
    const NdValue frames = *spec_.mean_pool_nodes ? nd::reduce(tape, nd::Reduce::mean, emb, 1)
                                                  : nd::reshape(tape, emb, {T * B, spec_.channels * D});
    representation = lstm1_.forward(tape, split_steps(frames)).back();
    representation = layers::dropout(tape, representation, *spec_.dense_dropout, mode, rng);
  } else if (is_lstm_kind(k)) {
    auto steps = flat_steps(batch);
    for (auto& s : steps) s = layers::dropout(tape, s, *spec_.input_dropout, mode, rng);
    auto h1 = lstm1_.forward(tape, steps);
    for (auto& h : h1) h = layers::dropout(tape, h, *spec_.layer1_dropout, mode, rng);
    auto h2 = lstm2_.forward(tape, h1);
    for (auto& h : h2) h = layers::dropout(tape, h, *spec_.layer2_dropout, mode, rng);
    if (k == ModelKind::lstm_att) {
      auto att = temporal_.forward(tape, h2);
      result.attention["temporal"] = att.weights;
      representation = att.context;
    } else {
      representation = h2.back();
    }
  } else {
    const std::size_t L = spec_.flat_width(), filters = *spec_.conv_filters;
    std::vector<double> data;
    data.reserve(T * B * L);
    for (std::size_t t = 0; t < T; ++t) {
      for (const auto& s : batch) {
        const auto flat = features::assemble_flat(s.frames[t]);
        data.insert(data.end(), flat.begin(), flat.end());
      }
    }
    const NdValue x({T * B, 1, L}, std::move(data));
    NdValue fmap = nd::activation(tape, Activation::relu, conv_.forward(tape, x));
    if (k == ModelKind::cnn_att) {
      const NdValue a_c = channel_att_.weights(tape, fmap);
      fmap = nd::mul(tape, fmap, nd::reshape(tape, a_c, {T * B, filters, 1}));
      const NdValue a_s = spatial_att_.weights(tape, fmap);
      fmap = nd::mul(tape, fmap, nd::reshape(tape, a_s, {T * B, 1, L}));
      result.attention["cbam.channel"] = a_c;
      result.attention["cbam.spatial"] = a_s;
    }
    const NdValue frames = nd::reshape(tape, fmap, {T * B, filters * L});
    representation = lstm1_.forward(tape, split_steps(frames)).back();
    representation = layers::dropout(tape, representation, *spec_.dense_dropout, mode, rng);
  }
  result.logits = dense_.forward(tape, representation);
  result.probabilities = nd::softmax(tape, result.logits, 1);
  return result;
}

NdValue Model::forward(Tape& tape, std::span<const SequenceSample> batch, Mode mode, Rng& rng) const {
  return run(tape, batch, mode, rng).probabilities;
}

NdValue Model::regularization(Tape& tape) const {
  if (!spec_.l2_reg || *spec_.l2_reg == 0) return {};
  std::vector<NdValue> terms;
  for (const auto* l : {&lstm1_, &lstm2_}) {
    for (const auto* w : {&l->Wx, &l->Wh}) terms.push_back(nd::sum_all(tape, nd::mul(tape, *w, *w)));
  }
  NdValue total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = nd::add(tape, total, terms[i]);
  return nd::scale(tape, total, *spec_.l2_reg);
}

}  // namespace eegatt::models

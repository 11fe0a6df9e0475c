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

// The six classifier architectures and their default hyper-parameters.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "eegatt/features.hpp"
#include "eegatt/layers.hpp"

namespace eegatt::models {

using layers::Mode;
using nd::NdValue;
using nd::Tape;

enum class ModelKind { instagats, gnn, lstm_att, lstm, cnn_att, cnn };

inline constexpr ModelKind kAllKinds[] = {ModelKind::instagats, ModelKind::gnn, ModelKind::lstm_att,
                                          ModelKind::lstm,      ModelKind::cnn_att, ModelKind::cnn};

std::string_view to_string(ModelKind kind);
/// Throws ConfigError for unknown names.
ModelKind parse_kind(std::string_view name);
bool is_graph_kind(ModelKind kind);
bool is_lstm_kind(ModelKind kind);
bool is_cnn_kind(ModelKind kind);
bool has_attention(ModelKind kind);

/// Architecture choice plus hyper-parameters. Fields that do not apply to
/// `kind` stay empty; validate() rejects a spec where they are set.
struct ModelSpec {
  ModelKind kind = ModelKind::instagats;
  std::size_t channels = 0;  // C
  std::size_t features = features::kFeatureCount;
  std::size_t T = 8;
  double learning_rate = 0;

  std::optional<std::size_t> gat_out_channels;  // instagats, gnn
  std::optional<std::size_t> lstm_hidden;       // every kind
  std::optional<double> dense_dropout;          // instagats, gnn, cnn_att, cnn
  std::optional<double> input_dropout;          // lstm_att, lstm
  std::optional<double> layer1_dropout;         // lstm_att, lstm
  std::optional<double> layer2_dropout;         // lstm_att, lstm
  std::optional<double> l2_reg;                 // lstm_att, lstm
  std::optional<std::size_t> conv_kernel;       // cnn_att, cnn
  std::optional<std::size_t> conv_filters;      // cnn_att, cnn
  std::optional<std::size_t> cbam_ratio;        // cnn_att
  std::optional<std::size_t> cbam_spatial_kernel;  // cnn_att
  std::optional<bool> node_correlations;        // instagats, gnn: R rows in node features
  std::optional<bool> mean_pool_nodes;          // instagats, gnn: pool instead of concat

  /// Tuned default hyper-parameters for `kind`.
  static ModelSpec defaults(ModelKind kind, std::size_t channels, std::size_t T = 8);

  void validate() const;
  /// Copy with every width (GAT outputs, LSTM units, conv filters) capped.
  ModelSpec capped(std::size_t max_width) const;
  /// Width of one flat frame vector, C*(C+F).
  std::size_t flat_width() const { return channels * (channels + features); }
  std::size_t node_width() const;

  bool operator==(const ModelSpec&) const = default;
};

struct ForwardResult {
  NdValue logits;         // [B x 2]
  NdValue probabilities;  // [B x 2], rows sum to 1
  /// Attention maps by name: "graph" [T*B x C x C], "temporal" [B x T],
  /// "cbam.channel" [T*B x filters], "cbam.spatial" [T*B x L].
  std::map<std::string, NdValue> attention;
};

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  layers::ParamStore& params() { return params_; }
  const layers::ParamStore& params() const { return params_; }

  ForwardResult run(Tape& tape, std::span<const features::SequenceSample> batch, Mode mode, Rng& rng) const;
  NdValue forward(Tape& tape, std::span<const features::SequenceSample> batch, Mode mode, Rng& rng) const;
  /// l2 * sum of squared LSTM kernel weights; undefined when no l2 applies.
  NdValue regularization(Tape& tape) const;

 private:
  NdValue graph_input(std::span<const features::SequenceSample> batch) const;
  std::vector<NdValue> flat_steps(std::span<const features::SequenceSample> batch) const;

  ModelSpec spec_;
  layers::ParamStore params_;
  layers::GatLayer gat_;
  layers::GcnLayer gcn_;
  layers::Conv1d conv_;
  layers::ChannelAttention channel_att_;
  layers::SpatialAttention spatial_att_;
  layers::Lstm lstm1_, lstm2_;
  layers::TemporalAttention temporal_;
  layers::Dense dense_;
};

}  // namespace eegatt::models

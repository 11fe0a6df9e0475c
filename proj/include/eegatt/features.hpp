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

// Per-frame feature extraction and model-input assembly.
//
// Each channel of a frame yields an 11-entry feature vector (seven time
// domain statistics followed by four band powers); each frame also yields
// the channel-by-channel Spearman correlation matrix.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eegatt/signal.hpp"

namespace eegatt::features {

inline constexpr std::size_t kTimeFeatureCount = 7;
inline constexpr std::size_t kBandCount = 4;
inline constexpr std::size_t kFeatureCount = kTimeFeatureCount + kBandCount;

/// Frozen serialisation order of the feature vector.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "mean",     "variance",     "zero_crossings", "auc",         "skewness",   "kurtosis",
    "peak_to_peak", "power_delta", "power_theta", "power_alpha", "power_beta"};

struct Band {
  double lo_hz;
  double hi_hz;
};
/// delta, theta, alpha, beta. A shared edge belongs to the higher band;
/// 0.5 Hz and 30 Hz are excluded.
inline constexpr std::array<Band, kBandCount> kBands = {{{0.5, 4}, {4, 8}, {8, 12}, {12, 30}}};

using FeatureVector = std::array<double, kFeatureCount>;

/// mean, population variance, zero crossings, area under |x|, skewness g1,
/// non-excess kurtosis g2, peak-to-peak. Skewness and kurtosis are 0 for a
/// constant signal.
std::array<double, kTimeFeatureCount> time_features(std::span<const double> x, double fs);

/// Band powers from the one-sided periodogram of the mean-removed,
/// Hann-windowed frame, in squared input units. Needs at least one second.
std::array<double, kBandCount> band_powers(std::span<const double> x, double fs);

/// Average ranks (1-based); ties share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation of average ranks; 0 when either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct FrameFeatures {
  std::string recording_id;
  std::size_t frame_index = 0;
  int label = 0;
  double fs = 0;
  std::size_t channels = 0;
  std::vector<double> X;  // channels x kFeatureCount, row-major
  std::vector<double> R;  // channels x channels, row-major

  double x(std::size_t c, std::size_t f) const { return X[c * kFeatureCount + f]; }
  double r(std::size_t i, std::size_t j) const { return R[i * channels + j]; }
};

FrameFeatures frame_features(const signal::Frame& frame, double fs);

enum class NodeLayout {
  correlation_and_features,  // row i = [R row i || X row i]
  features_only,             // row i = X row i
};

struct GraphSnapshot {
  std::size_t nodes = 0;
  std::size_t width = 0;
  std::vector<double> node_features;  // nodes x width
  std::vector<double> adjacency;      // nodes x nodes, complete with self-loops
  std::vector<double> edge_weights;   // correlation values, nodes x nodes

  std::size_t edge_count() const;
};

GraphSnapshot assemble_graph(const FrameFeatures& ff,
                             NodeLayout layout = NodeLayout::correlation_and_features);

/// Concatenation of every node row of assemble_graph, length C*(C+F).
std::vector<double> assemble_flat(const FrameFeatures& ff);

struct SequenceSample {
  std::string recording_id;
  std::vector<FrameFeatures> frames;
  std::array<double, 2> one_hot{1.0, 0.0};

  int label() const { return one_hot[1] > 0.5 ? 1 : 0; }
};

/// Greedy non-overlapping groups of T consecutive same-label frames of one
/// recording; short runs are discarded. Recording order follows first
/// appearance in `frames`.
std::vector<SequenceSample> build_sequences(const std::vector<FrameFeatures>& frames, std::size_t T);

/// Per-(channel, feature) z-scoring of X, fitted on training samples only.
/// Correlations are left untouched.
class FeatureScaler {
 public:
  FeatureScaler() = default;
  FeatureScaler(std::vector<double> mean, std::vector<double> scale);

  static FeatureScaler fit(std::span<const SequenceSample> samples);

  FrameFeatures apply(const FrameFeatures& ff) const;
  SequenceSample apply(const SequenceSample& s) const;
  std::vector<SequenceSample> apply(std::span<const SequenceSample> samples) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scale() const { return scale_; }
  bool empty() const { return mean_.empty(); }

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

}  // namespace eegatt::features

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

#include "eegatt/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "eegatt/errors.hpp"

namespace eegatt::features {

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = a[i] - ma, v = b[i] - mb;
    num += u * v;
    da += u * u;
    db += v * v;
  }
  if (da == 0 || db == 0) return 0.0;
  return std::clamp(num / std::sqrt(da * db), -1.0, 1.0);
}

}  // namespace

std::array<double, kTimeFeatureCount> time_features(std::span<const double> x, double fs) {
  if (x.size() < 2) throw ContractError("time_features: need at least 2 samples");
  if (!(fs > 0)) throw ContractError("time_features: fs must be positive");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0, auc = 0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
    auc += std::abs(v);
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  auc /= fs;

  double crossings = 0;
  int last_sign = 0;
  for (double v : x) {
    const int sign = (v > 0) - (v < 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) crossings += 1;
    last_sign = sign;
  }

  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const bool constant = *lo == *hi;
  const double skew = constant || m2 == 0 ? 0.0 : m3 / std::pow(m2, 1.5);
  const double kurt = constant || m2 == 0 ? 0.0 : m4 / (m2 * m2);
  return {mean, constant ? 0.0 : m2, crossings, auc, skew, kurt, *hi - *lo};
}

std::array<double, kBandCount> band_powers(std::span<const double> x, double fs) {
  const std::size_t n = x.size();
  if (!(fs > 0) || static_cast<double>(n) < fs) {
    throw ContractError("band_powers: need at least one second of samples");
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> windowed(n);
  std::vector<double> cos_table(n), sin_table(n);
  double wsq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    const double w = 0.5 * (1.0 - std::cos(phase));
    windowed[i] = w * (x[i] - mean);
    wsq += w * w;
    cos_table[i] = std::cos(phase);
    sin_table[i] = std::sin(phase);
  }
  std::array<double, kBandCount> power{};
  const double df = fs / static_cast<double>(n);
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double f = static_cast<double>(k) * df;
    if (f >= kBands.back().hi_hz) break;
    std::size_t band = kBandCount;
    for (std::size_t b = 0; b < kBandCount; ++b) {
      const bool above = b == 0 ? f > kBands[b].lo_hz : f >= kBands[b].lo_hz;
      if (above && f < kBands[b].hi_hz) band = b;
    }
    if (band == kBandCount) continue;
    double re = 0, im = 0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += windowed[i] * cos_table[idx];
      im -= windowed[i] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    power[band] += 2.0 * (re * re + im * im) / (static_cast<double>(n) * wsq);
  }
  return power;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  if (x.size() < 3) throw ContractError("spearman: need at least 3 samples");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

FrameFeatures frame_features(const signal::Frame& frame, double fs) {
  FrameFeatures ff;
  ff.recording_id = frame.recording_id;
  ff.frame_index = frame.index;
  ff.label = frame.label;
  ff.fs = fs;
  ff.channels = frame.data.size();
  if (ff.channels == 0) throw ContractError("frame_features: frame has no channels");
  const std::size_t C = ff.channels;
  ff.X.reserve(C * kFeatureCount);
  std::vector<std::vector<double>> ranks;
  for (const auto& ch : frame.data) {
    if (ch.size() < 3) throw ContractError("frame_features: frame too short");
    const auto t = time_features(ch, fs);
    const auto b = band_powers(ch, fs);
    ff.X.insert(ff.X.end(), t.begin(), t.end());
    ff.X.insert(ff.X.end(), b.begin(), b.end());
    ranks.push_back(average_ranks(ch));
  }
  ff.R.assign(C * C, 0.0);
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t j = i; j < C; ++j) {
      const double r = pearson(ranks[i], ranks[j]);
      ff.R[i * C + j] = r;
      ff.R[j * C + i] = r;
    }
  }
  return ff;
}

std::size_t GraphSnapshot::edge_count() const {
  return static_cast<std::size_t>(std::count_if(adjacency.begin(), adjacency.end(), [](double a) { return a != 0; }));
}

GraphSnapshot assemble_graph(const FrameFeatures& ff, NodeLayout layout) {
  const std::size_t C = ff.channels;
  GraphSnapshot g;
  g.nodes = C;
  g.width = layout == NodeLayout::correlation_and_features ? C + kFeatureCount : kFeatureCount;
  g.node_features.reserve(C * g.width);
  for (std::size_t i = 0; i < C; ++i) {
    if (layout == NodeLayout::correlation_and_features) {
      g.node_features.insert(g.node_features.end(), ff.R.begin() + static_cast<std::ptrdiff_t>(i * C),
                             ff.R.begin() + static_cast<std::ptrdiff_t>((i + 1) * C));
    }
    g.node_features.insert(g.node_features.end(), ff.X.begin() + static_cast<std::ptrdiff_t>(i * kFeatureCount),
                           ff.X.begin() + static_cast<std::ptrdiff_t>((i + 1) * kFeatureCount));
  }
  g.adjacency.assign(C * C, 1.0);
  g.edge_weights = ff.R;
  return g;
}

std::vector<double> assemble_flat(const FrameFeatures& ff) {
  return assemble_graph(ff, NodeLayout::correlation_and_features).node_features;
}

std::vector<SequenceSample> build_sequences(const std::vector<FrameFeatures>& frames, std::size_t T) {
  if (T < 1) throw ContractError("build_sequences: T must be at least 1");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const FrameFeatures*>> by_recording;
  for (const auto& f : frames) {
    auto [it, inserted] = by_recording.try_emplace(f.recording_id);
    if (inserted) order.push_back(f.recording_id);
    it->second.push_back(&f);
  }
  std::vector<SequenceSample> out;
  for (const auto& id : order) {
    auto& list = by_recording[id];
    std::stable_sort(list.begin(), list.end(),
                     [](const FrameFeatures* a, const FrameFeatures* b) { return a->frame_index < b->frame_index; });
    std::vector<const FrameFeatures*> run;
    for (const FrameFeatures* f : list) {
      const bool continues = !run.empty() && f->label == run.back()->label &&
                             f->frame_index == run.back()->frame_index + 1;
      if (!continues) run.clear();
      run.push_back(f);
      if (run.size() == T) {
        SequenceSample s;
        s.recording_id = id;
        for (const FrameFeatures* r : run) s.frames.push_back(*r);
        s.one_hot = f->label == 1 ? std::array<double, 2>{0.0, 1.0} : std::array<double, 2>{1.0, 0.0};
        out.push_back(std::move(s));
        run.clear();
      }
    }
  }
  return out;
}

FeatureScaler::FeatureScaler(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != scale_.size()) throw ShapeError("FeatureScaler: mean/scale size mismatch");
}

FeatureScaler FeatureScaler::fit(std::span<const SequenceSample> samples) {
  if (samples.empty() || samples.front().frames.empty()) throw ContractError("FeatureScaler: no samples");
  const std::size_t width = samples.front().frames.front().X.size();
  std::vector<double> sum(width, 0.0), sq(width, 0.0);
  double count = 0;
  for (const auto& s : samples) {
    for (const auto& f : s.frames) {
      if (f.X.size() != width) throw ShapeError("FeatureScaler: inconsistent channel count");
      for (std::size_t i = 0; i < width; ++i) sum[i] += f.X[i];
      count += 1;
    }
  }
  for (std::size_t i = 0; i < width; ++i) sum[i] /= count;
  for (const auto& s : samples) {
    for (const auto& f : s.frames) {
      for (std::size_t i = 0; i < width; ++i) sq[i] += (f.X[i] - sum[i]) * (f.X[i] - sum[i]);
    }
  }
  std::vector<double> scale(width);
  for (std::size_t i = 0; i < width; ++i) {
    const double sd = std::sqrt(sq[i] / count);
    scale[i] = sd > 1e-12 ? sd : 1.0;
  }
  return FeatureScaler(std::move(sum), std::move(scale));
}

FrameFeatures FeatureScaler::apply(const FrameFeatures& ff) const {
  if (empty()) return ff;
  if (ff.X.size() != mean_.size()) throw ShapeError("FeatureScaler: width mismatch");
  FrameFeatures out = ff;
  for (std::size_t i = 0; i < out.X.size(); ++i) out.X[i] = (out.X[i] - mean_[i]) / scale_[i];
  return out;
}

SequenceSample FeatureScaler::apply(const SequenceSample& s) const {
  SequenceSample out = s;
  for (auto& f : out.frames) f = apply(f);
  return out;
}

std::vector<SequenceSample> FeatureScaler::apply(std::span<const SequenceSample> samples) const {
  std::vector<SequenceSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(apply(s));
  return out;
}

}  // namespace eegatt::features

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

#include "eegatt/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "eegatt/errors.hpp"
#include "eegatt/random.hpp"

namespace eegatt::io {

namespace {

constexpr std::size_t kOctaves = 8;
constexpr double kAlphaHz = 10.0;
constexpr double kBurstHz = 3.0;
constexpr double kBurstSecs = 1.0;
constexpr double kBurstPeriodSecs = 4.0;

// Voss-McCartney: octave k holds a normal draw refreshed every 2^k samples.
std::vector<double> pink_noise(std::size_t n, double rms, Rng& rng) {
  std::array<double, kOctaves> rows{};
  for (auto& r : rows) r = rng.normal();
  std::vector<double> out(n);
  const double norm = rms / std::sqrt(static_cast<double>(kOctaves + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kOctaves; ++k) {
      if (i % (std::size_t{1} << k) == 0) rows[k] = rng.normal();
    }
    double sum = rng.normal();
    for (double r : rows) sum += r;
    out[i] = sum * norm;
  }
  return out;
}

void plant(signal::Recording& rec, const SynthOptions& o, const std::vector<std::size_t>& alpha_channels, Rng& rng) {
  const std::size_t n = rec.sample_count();
  const double amplitude = o.snr * o.noise_uv;
  const double two_pi = 2 * std::numbers::pi;
  switch (o.effect) {
    case ClassEffect::spatial_alpha: {
      const double phase = two_pi * rng.uniform();
      for (std::size_t c : alpha_channels) {
        for (std::size_t i = 0; i < n; ++i) {
          rec.samples[c][i] += amplitude * std::numbers::sqrt2 *
                               std::sin(two_pi * kAlphaHz * static_cast<double>(i) / o.fs + phase);
        }
      }
      break;
    }
    case ClassEffect::temporal_burst: {
      const auto period = static_cast<std::size_t>(std::lround(kBurstPeriodSecs * o.fs));
      const auto width = static_cast<std::size_t>(std::lround(kBurstSecs * o.fs));
      // Hann-tapered burst; the gain restores the requested RMS within the burst.
      const double gain = amplitude * std::numbers::sqrt2 / std::sqrt(0.375);
      for (std::size_t start = 0; start < n; start += period) {
        const std::size_t onset = start + static_cast<std::size_t>(rng.below(period - width + 1));
        const double phase = two_pi * rng.uniform();
        for (std::size_t j = 0; j < width && onset + j < n; ++j) {
          const double taper = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(j) / static_cast<double>(width));
          const double v = gain * taper * std::sin(two_pi * kBurstHz * static_cast<double>(j) / o.fs + phase);
          for (auto& row : rec.samples) row[onset + j] += v;
        }
      }
      break;
    }
    case ClassEffect::broadband_noise:
      for (auto& row : rec.samples) {
        for (double& v : row) v += amplitude * rng.normal();
      }
      break;
  }
}

}  // namespace

std::string_view to_string(ClassEffect effect) {
  switch (effect) {
    case ClassEffect::spatial_alpha: return "spatial_alpha";
    case ClassEffect::temporal_burst: return "temporal_burst";
    case ClassEffect::broadband_noise: return "broadband_noise";
  }
  return "?";
}

ClassEffect parse_effect(std::string_view name) {
  for (auto e : {ClassEffect::spatial_alpha, ClassEffect::temporal_burst, ClassEffect::broadband_noise}) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("unknown effect '" + std::string(name) +
                    "' (expected spatial_alpha, temporal_burst or broadband_noise)");
}

std::vector<std::size_t> affected_channels(std::size_t channels, std::uint64_t seed) {
  std::vector<std::size_t> idx(channels);
  for (std::size_t i = 0; i < channels; ++i) idx[i] = i;
  Rng rng(seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  rng.shuffle(idx);
  idx.resize(channels / 2);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<signal::Recording> synth_dataset(const SynthOptions& o) {
  if (o.channels < 2) throw ConfigError("synthetic data needs at least 2 channels");
  if (!(o.fs > 0) || !(o.seconds_per_class > 0) || !(o.recording_secs > 0)) {
    throw ConfigError("synthetic data needs positive fs, seconds and recording length");
  }
  if (!(o.snr >= 0)) throw ConfigError("snr must be non-negative");
  const auto alpha = affected_channels(o.channels, o.seed);
  const auto total = static_cast<std::size_t>(std::llround(o.seconds_per_class * o.fs));
  const auto per_rec = static_cast<std::size_t>(std::llround(o.recording_secs * o.fs));
  Rng rng(o.seed);
  std::vector<signal::Recording> out;
  for (int label = 0; label < 2; ++label) {
    std::size_t index = 0;
    for (std::size_t done = 0; done < total; done += per_rec, ++index) {
      const std::size_t n = std::min(per_rec, total - done);
      signal::Recording rec;
      char id[64];
      std::snprintf(id, sizeof id, "synth-c%d-%03zu", label, index);
      rec.id = id;
      rec.fs = o.fs;
      rec.label = label;
      for (std::size_t c = 0; c < o.channels; ++c) {
        rec.channels.push_back("CH" + std::to_string(c + 1));
        rec.samples.push_back(pink_noise(n, o.noise_uv, rng));
      }
      if (label == 1) plant(rec, o, alpha, rng);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace eegatt::io

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

// Seeded synthetic EEG-like recordings with a planted class-1 effect.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "eegatt/signal.hpp"

namespace eegatt::io {

enum class ClassEffect { spatial_alpha, temporal_burst, broadband_noise };

std::string_view to_string(ClassEffect effect);
/// Throws ConfigError for unknown names.
ClassEffect parse_effect(std::string_view name);

struct SynthOptions {
  std::size_t channels = 6;
  double fs = 250;
  double seconds_per_class = 400;
  ClassEffect effect = ClassEffect::spatial_alpha;
  double snr = 4;
  std::uint64_t seed = 0;
  double recording_secs = 16;
  double noise_uv = 10;  // background RMS per channel
};

/// Class 0: independent pink-like noise per channel. Class 1 adds the
/// effect, scaled so its RMS is snr times the background RMS:
///   spatial_alpha   10 Hz sinusoid on a fixed half of the channels
///   temporal_burst  1 s bursts of 3 Hz activity on every channel, one per 4 s
///   broadband_noise extra white noise on every channel
/// Recordings are synth-c<label>-<index>, class 0 first.
std::vector<signal::Recording> synth_dataset(const SynthOptions& options);

/// Channels carrying the spatial_alpha effect for a seed and channel count.
std::vector<std::size_t> affected_channels(std::size_t channels, std::uint64_t seed);

}  // namespace eegatt::io

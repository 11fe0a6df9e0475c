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

// Recording-level preprocessing: resampling, band-pass filtering,
// min-max centring and fixed-length segmentation.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace eegatt::signal {

/// Channel-major sample matrix: rows are channels.
using ChannelMatrix = std::vector<std::vector<double>>;

struct LabeledInterval {
  double start_s = 0;
  double end_s = 0;
  int label = 0;
};

struct Recording {
  std::string id;
  double fs = 0;
  std::vector<std::string> channels;
  ChannelMatrix samples;  // microvolts, channels x N
  int label = 0;          // used where no interval covers a frame
  std::vector<LabeledInterval> intervals;
  /// Optional per-channel physical (min, max) carried through EDF round trips.
  std::vector<std::pair<double, double>> physical_range;

  std::size_t channel_count() const { return samples.size(); }
  std::size_t sample_count() const { return samples.empty() ? 0 : samples.front().size(); }
  /// Class label at time `t_s`: the covering interval's label, else `label`.
  int label_at(double t_s) const;
  /// Throws DataError on inconsistent dimensions or a non-positive rate.
  void validate() const;
};

struct Frame {
  std::string recording_id;
  std::size_t index = 0;
  ChannelMatrix data;  // channels x S
  int label = 0;
};

struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 == 1
};
using Sos = std::vector<Biquad>;

/// Digital Butterworth low-pass (bilinear transform), as second-order sections.
/// `order` must be even.
Sos butter_lowpass(int order, double cutoff_hz, double fs);
/// Digital Butterworth band-pass built from an order-`order` prototype
/// (2*order poles). `order` must be even.
Sos butter_bandpass(int order, double lo_hz, double hi_hz, double fs);

/// Single forward pass through the cascade, starting from rest.
std::vector<double> sosfilt(const Sos& sos, const std::vector<double>& x);
/// Zero-phase forward-backward filtering with odd-extension padding and
/// steady-state initial conditions.
std::vector<double> sosfiltfilt(const Sos& sos, const std::vector<double>& x);

/// Anti-alias low-pass at 0.4*target_fs, then keeps every (fs/target_fs)-th
/// sample. The ratio must be an integer.
Recording decimate_to(const Recording& rec, double target_fs);

/// Zero-phase 4th-order Butterworth band-pass, per channel.
Recording bandpass(const Recording& rec, double lo_hz, double hi_hz);

/// Per-channel map onto [-1, 1]; constant channels become all zeros.
ChannelMatrix minmax_center(const ChannelMatrix& data);

/// Windows of frame_secs*fs samples with hop S*(1-overlap_frac). The
/// incomplete tail is dropped; each frame's label is taken at its midpoint.
std::vector<Frame> segment(const Recording& rec, double frame_secs, double overlap_frac);

}  // namespace eegatt::signal

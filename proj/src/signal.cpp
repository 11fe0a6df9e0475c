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

#include "eegatt/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "eegatt/errors.hpp"

namespace eegatt::signal {

namespace {

using cplx = std::complex<double>;

constexpr int kFilterOrder = 4;

// Analog Butterworth prototype poles on the unit circle, left half-plane.
std::vector<cplx> prototype_poles(int order) {
  std::vector<cplx> poles;
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

cplx response(const Sos& sos, double omega) {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  cplx h = 1.0;
  for (const auto& s : sos) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

// Pairs each upper-half-plane digital pole with its conjugate; numerator is
// shared by every section. The cascade is scaled to unit gain at `omega_ref`.
Sos sections_from_poles(const std::vector<cplx>& analog_poles, double fs2, const Biquad& numerator,
                        double omega_ref) {
  Sos sos;
  for (const cplx& s : analog_poles) {
    const cplx z = (fs2 + s) / (fs2 - s);
    if (z.imag() <= 0) continue;
    sos.push_back({numerator.b0, numerator.b1, numerator.b2, -2.0 * z.real(), std::norm(z)});
  }
  const double gain = std::abs(response(sos, omega_ref));
  sos.front().b0 /= gain;
  sos.front().b1 /= gain;
  sos.front().b2 /= gain;
  return sos;
}

void require_even_order(int order) {
  if (order <= 0 || order % 2 != 0) throw ConfigError("Butterworth order must be positive and even");
}

// Transposed direct-form II state for a constant unit input in steady state.
std::vector<std::pair<double, double>> steady_state(const Sos& sos) {
  std::vector<std::pair<double, double>> zi;
  double level = 1.0;
  for (const auto& s : sos) {
    const double g = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double z2 = (s.b2 - s.a2 * g) * level;
    const double z1 = (s.b1 - s.a1 * g) * level + z2;
    zi.emplace_back(z1, z2);
    level *= g;
  }
  return zi;
}

std::vector<double> run_cascade(const Sos& sos, std::vector<double> x,
                                std::vector<std::pair<double, double>> state) {
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const auto& s = sos[k];
    double z1 = state[k].first, z2 = state[k].second;
    for (double& v : x) {
      const double in = v;
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      v = y;
    }
  }
  return x;
}

Recording map_channels(const Recording& rec, const auto& fn) {
  Recording out = rec;
  for (auto& ch : out.samples) ch = fn(ch);
  return out;
}

}  // namespace

int Recording::label_at(double t_s) const {
  for (const auto& iv : intervals) {
    if (t_s >= iv.start_s && t_s < iv.end_s) return iv.label;
  }
  return label;
}

void Recording::validate() const {
  if (!(fs > 0)) throw DataError("recording " + id + ": sampling rate must be positive");
  if (samples.empty()) throw DataError("recording " + id + ": no channels");
  if (!channels.empty() && channels.size() != samples.size()) {
    throw DataError("recording " + id + ": channel names do not match sample rows");
  }
  for (const auto& row : samples) {
    if (row.size() != samples.front().size()) throw DataError("recording " + id + ": ragged channel rows");
  }
}

Sos butter_lowpass(int order, double cutoff_hz, double fs) {
  require_even_order(order);
  if (!(cutoff_hz > 0 && cutoff_hz < fs / 2)) throw ConfigError("low-pass cutoff outside (0, fs/2)");
  const double fs2 = 2.0 * fs;
  const double wc = fs2 * std::tan(std::numbers::pi * cutoff_hz / fs);
  std::vector<cplx> poles;
  for (const cplx& p : prototype_poles(order)) poles.push_back(p * wc);
  return sections_from_poles(poles, fs2, {1.0, 2.0, 1.0, 0, 0}, 0.0);
}

Sos butter_bandpass(int order, double lo_hz, double hi_hz, double fs) {
  require_even_order(order);
  if (!(lo_hz > 0 && lo_hz < hi_hz && hi_hz < fs / 2)) {
    throw ConfigError("band-pass edges must satisfy 0 < lo < hi < fs/2");
  }
  const double fs2 = 2.0 * fs;
  const double wl = fs2 * std::tan(std::numbers::pi * lo_hz / fs);
  const double wh = fs2 * std::tan(std::numbers::pi * hi_hz / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;
  std::vector<cplx> poles;
  for (const cplx& p : prototype_poles(order)) {
    const cplx half = p * bw / 2.0;
    const cplx d = std::sqrt(half * half - w0 * w0);
    poles.push_back(half + d);
    poles.push_back(half - d);
  }
  const double omega_center = 2.0 * std::atan(w0 / fs2);
  return sections_from_poles(poles, fs2, {1.0, 0.0, -1.0, 0, 0}, omega_center);
}

std::vector<double> sosfilt(const Sos& sos, const std::vector<double>& x) {
  return run_cascade(sos, x, std::vector<std::pair<double, double>>(sos.size(), {0.0, 0.0}));
}

std::vector<double> sosfiltfilt(const Sos& sos, const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) return x;
  const std::size_t padlen = std::min<std::size_t>(3 * (2 * sos.size() + 1), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * padlen);
  for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  const auto unit = steady_state(sos);
  auto scaled = [&](double level) {
    auto zi = unit;
    for (auto& [a, b] : zi) {
      a *= level;
      b *= level;
    }
    return zi;
  };
  auto fwd = run_cascade(sos, ext, scaled(ext.front()));
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = run_cascade(sos, fwd, scaled(fwd.front()));
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(padlen), bwd.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

Recording decimate_to(const Recording& rec, double target_fs) {
  rec.validate();
  if (!(target_fs > 0) || target_fs > rec.fs) throw ConfigError("decimation target must be in (0, fs]");
  const double ratio = rec.fs / target_fs;
  const long factor = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio) {
    throw ConfigError("sampling rate " + std::to_string(rec.fs) + " is not an integer multiple of " +
                      std::to_string(target_fs));
  }
  if (factor == 1) return rec;
  const Sos aa = butter_lowpass(kFilterOrder, 0.4 * target_fs, rec.fs);
  Recording out = map_channels(rec, [&](const std::vector<double>& ch) {
    const auto smooth = sosfiltfilt(aa, ch);
    std::vector<double> kept;
    for (std::size_t i = 0; i < smooth.size(); i += static_cast<std::size_t>(factor)) kept.push_back(smooth[i]);
    return kept;
  });
  out.fs = target_fs;
  return out;
}

Recording bandpass(const Recording& rec, double lo_hz, double hi_hz) {
  rec.validate();
  const Sos sos = butter_bandpass(kFilterOrder, lo_hz, hi_hz, rec.fs);
  return map_channels(rec, [&](const std::vector<double>& ch) { return sosfiltfilt(sos, ch); });
}

ChannelMatrix minmax_center(const ChannelMatrix& data) {
  ChannelMatrix out = data;
  for (auto& ch : out) {
    if (ch.empty()) continue;
    const auto [lo_it, hi_it] = std::minmax_element(ch.begin(), ch.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
      std::fill(ch.begin(), ch.end(), 0.0);
      continue;
    }
    for (double& v : ch) v = 2.0 * (v - lo) / (hi - lo) - 1.0;
  }
  return out;
}

std::vector<Frame> segment(const Recording& rec, double frame_secs, double overlap_frac) {
  rec.validate();
  if (!(overlap_frac >= 0 && overlap_frac < 1)) throw ConfigError("overlap fraction must be in [0, 1)");
  const double exact = frame_secs * rec.fs;
  const long frame_len = std::lround(exact);
  if (frame_len <= 0 || std::abs(exact - static_cast<double>(frame_len)) > 1e-9 * exact) {
    throw ConfigError("frame length frame_secs*fs must be a positive integer");
  }
  const auto len = static_cast<std::size_t>(frame_len);
  const auto hop = static_cast<std::size_t>(std::max(1L, std::lround(exact * (1.0 - overlap_frac))));
  std::vector<Frame> frames;
  const std::size_t n = rec.sample_count();
  for (std::size_t start = 0, t = 0; start + len <= n; start += hop, ++t) {
    Frame f;
    f.recording_id = rec.id;
    f.index = t;
    for (const auto& ch : rec.samples) {
      f.data.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(start),
                          ch.begin() + static_cast<std::ptrdiff_t>(start + len));
    }
    f.label = rec.label_at((static_cast<double>(start) + static_cast<double>(len) / 2.0) / rec.fs);
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace eegatt::signal

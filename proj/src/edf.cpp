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

#include "eegatt/edf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>

#include "eegatt/errors.hpp"

namespace eegatt::io {

namespace {

constexpr std::size_t kFixedHeader = 256;
constexpr std::size_t kPerSignalHeader = 256;
constexpr int kDigitalMin = -32768;
constexpr int kDigitalMax = 32767;

// Per-signal field widths, in on-disk order.
constexpr std::size_t kLabelW = 16, kTransducerW = 80, kDimW = 8, kNumW = 8, kPrefilterW = 80, kSprW = 8,
                      kReservedW = 32;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(' ');
  return std::string(s.substr(b, e - b + 1));
}

class FieldReader {
 public:
  explicit FieldReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string text(std::size_t offset, std::size_t width) const {
    if (offset + width > bytes_.size()) throw ParseError(bytes_.size(), "file ends inside header field");
    std::string out;
    for (std::size_t i = 0; i < width; ++i) {
      const std::uint8_t c = bytes_[offset + i];
      if (c < 32 || c > 126) throw ParseError(offset + i, "non-ASCII byte in header");
      out.push_back(static_cast<char>(c));
    }
    return trim(out);
  }

  double number(std::size_t offset, std::size_t width, const char* what) const {
    const std::string s = text(offset, width);
    double v = 0;
    const char* begin = s.data();
    if (!s.empty() && s.front() == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ParseError(offset, std::string("non-numeric ") + what + " field '" + s + "'");
    }
    return v;
  }

  long integer(std::size_t offset, std::size_t width, const char* what) const {
    const double v = number(offset, width, what);
    if (v != std::floor(v)) throw ParseError(offset, std::string(what) + " must be an integer");
    return static_cast<long>(v);
  }

 private:
  std::span<const std::uint8_t> bytes_;
};

// Shortest fixed-point text (at most 8 chars) that parses back to exactly v.
bool fixed_text(double v, std::string& out) {
  char buf[64];
  for (int p = 0; p <= 7; ++p) {
    std::snprintf(buf, sizeof buf, "%.*f", p, v);
    std::string s(buf);
    if (s == "-0") s = "0";
    if (s.size() > 8) continue;
    if (std::strtod(s.c_str(), nullptr) == v) {
      out = s;
      return true;
    }
  }
  return false;
}

// Representable bound at or beyond v (downward for a minimum).
double outward(double v, bool down) {
  char buf[64];
  for (int p = 7; p >= 0; --p) {
    std::snprintf(buf, sizeof buf, "%.*f", p, v);
    if (std::string_view(buf).size() > 8) continue;
    const double scale = std::pow(10.0, p);
    double units = std::nearbyint(v * scale);
    for (int guard = 0; guard < 4; ++guard) {
      std::snprintf(buf, sizeof buf, "%.*f", p, units / scale);
      const double parsed = std::strtod(buf, nullptr);
      if (down ? parsed <= v : parsed >= v) return parsed;
      units += down ? -1 : 1;
    }
  }
  throw ContractError("EDF: value " + std::to_string(v) + " does not fit an 8-character field");
}

void put(std::vector<std::uint8_t>& out, const std::string& s, std::size_t width) {
  if (s.size() > width) throw ContractError("EDF: field '" + s + "' wider than " + std::to_string(width));
  for (char c : s) {
    if (c < 32 || c > 126) throw ContractError("EDF: non-ASCII character in header text");
    out.push_back(static_cast<std::uint8_t>(c));
  }
  out.insert(out.end(), width - s.size(), static_cast<std::uint8_t>(' '));
}

std::string number_text(double v) {
  std::string s;
  if (!fixed_text(v, s)) throw ContractError("EDF: value " + std::to_string(v) + " is not representable");
  return s;
}

bool is_annotation(const EdfSignalHeader& s) { return s.label == "EDF Annotations"; }

}  // namespace

EdfHeader parse_edf_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixedHeader) throw ParseError(bytes.size(), "file shorter than the 256-byte fixed header");
  FieldReader r(bytes);
  EdfHeader h;
  h.version = r.text(0, 8);
  if (h.version != "0") throw ParseError(0, "unsupported version '" + h.version + "'");
  h.patient = r.text(8, 80);
  h.recording = r.text(88, 80);
  h.start_date = r.text(168, 8);
  h.start_time = r.text(176, 8);
  const long header_bytes = r.integer(184, 8, "header size");
  h.reserved = r.text(192, 44);
  h.record_count = r.integer(236, 8, "record count");
  h.record_duration = r.number(244, 8, "record duration");
  const long ns = r.integer(252, 4, "signal count");
  if (ns < 1) throw ParseError(252, "signal count must be positive");
  const std::size_t n = static_cast<std::size_t>(ns);
  if (header_bytes < 0 || static_cast<std::size_t>(header_bytes) != kFixedHeader + kPerSignalHeader * n) {
    throw ParseError(184, "header size does not equal 256 + 256 * signal count");
  }
  h.header_bytes = static_cast<std::size_t>(header_bytes);
  if (bytes.size() < h.header_bytes) throw ParseError(bytes.size(), "file shorter than declared header");
  if (h.record_count < -1) throw ParseError(236, "record count must be non-negative");
  if (!(h.record_duration > 0) && h.record_count != 0) throw ParseError(244, "record duration must be positive");

  h.signals.resize(n);
  std::size_t off = kFixedHeader;
  for (std::size_t i = 0; i < n; ++i) h.signals[i].label = r.text(off + i * kLabelW, kLabelW);
  off += n * kLabelW;
  for (std::size_t i = 0; i < n; ++i) h.signals[i].transducer = r.text(off + i * kTransducerW, kTransducerW);
  off += n * kTransducerW;
  for (std::size_t i = 0; i < n; ++i) h.signals[i].physical_dimension = r.text(off + i * kDimW, kDimW);
  off += n * kDimW;
  for (std::size_t i = 0; i < n; ++i) h.signals[i].physical_min = r.number(off + i * kNumW, kNumW, "physical minimum");
  off += n * kNumW;
  for (std::size_t i = 0; i < n; ++i) h.signals[i].physical_max = r.number(off + i * kNumW, kNumW, "physical maximum");
  off += n * kNumW;
  const std::size_t dmin_off = off;
  for (std::size_t i = 0; i < n; ++i) {
    h.signals[i].digital_min = static_cast<int>(r.integer(off + i * kNumW, kNumW, "digital minimum"));
  }
  off += n * kNumW;
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = h.signals[i];
    s.digital_max = static_cast<int>(r.integer(off + i * kNumW, kNumW, "digital maximum"));
    if (s.digital_max <= s.digital_min) throw ParseError(off + i * kNumW, "zero or negative digital range");
    if (s.digital_min < kDigitalMin || s.digital_max > kDigitalMax) {
      throw ParseError(dmin_off + i * kNumW, "digital range exceeds 16 bits");
    }
  }
  off += n * kNumW;
  for (std::size_t i = 0; i < n; ++i) h.signals[i].prefilter = r.text(off + i * kPrefilterW, kPrefilterW);
  off += n * kPrefilterW;
  for (std::size_t i = 0; i < n; ++i) {
    const long spr = r.integer(off + i * kSprW, kSprW, "samples per record");
    if (spr < 1) throw ParseError(off + i * kSprW, "samples per record must be positive");
    h.signals[i].samples_per_record = static_cast<std::size_t>(spr);
  }
  off += n * kSprW;
  for (std::size_t i = 0; i < n; ++i) r.text(off + i * kReservedW, kReservedW);
  return h;
}

signal::Recording parse_edf(std::span<const std::uint8_t> bytes) {
  EdfHeader h = parse_edf_header(bytes);
  std::size_t record_samples = 0;
  for (const auto& s : h.signals) record_samples += s.samples_per_record;
  const std::size_t record_bytes = 2 * record_samples;
  const std::size_t payload = bytes.size() - h.header_bytes;
  std::size_t records = 0;
  if (h.record_count == -1) {
    records = payload / record_bytes;
  } else {
    records = static_cast<std::size_t>(h.record_count);
    if (payload < records * record_bytes) {
      throw ParseError(bytes.size(), "data truncated: record " + std::to_string(payload / record_bytes) +
                                         " of " + std::to_string(records) + " is incomplete");
    }
  }

  signal::Recording rec;
  rec.id = h.recording;
  std::vector<std::size_t> data_signals;
  for (std::size_t i = 0; i < h.signals.size(); ++i) {
    if (!is_annotation(h.signals[i])) data_signals.push_back(i);
  }
  if (data_signals.empty()) throw ParseError(kFixedHeader, "no data signals");
  const std::size_t spr = h.signals[data_signals.front()].samples_per_record;
  for (std::size_t i : data_signals) {
    if (h.signals[i].samples_per_record != spr) {
      throw ParseError(kFixedHeader + h.signals.size() * (kLabelW + kTransducerW + kDimW + 4 * kNumW + kPrefilterW) +
                           i * kSprW,
                       "signal '" + h.signals[i].label + "' has a different sampling rate");
    }
  }
  double fs = h.record_duration > 0 ? static_cast<double>(spr) / h.record_duration : static_cast<double>(spr);
  if (std::abs(fs - std::round(fs)) < 1e-6 * fs) fs = std::round(fs);
  rec.fs = fs;
  for (std::size_t i : data_signals) {
    rec.channels.push_back(h.signals[i].label);
    rec.samples.emplace_back();
    rec.samples.back().reserve(records * spr);
    rec.physical_range.emplace_back(h.signals[i].physical_min, h.signals[i].physical_max);
  }

  std::size_t pos = h.header_bytes;
  for (std::size_t r = 0; r < records; ++r) {
    std::size_t out_idx = 0;
    for (std::size_t i = 0; i < h.signals.size(); ++i) {
      const auto& s = h.signals[i];
      if (is_annotation(s)) {
        pos += 2 * s.samples_per_record;
        continue;
      }
      const double gain = (s.physical_max - s.physical_min) / static_cast<double>(s.digital_max - s.digital_min);
      auto& row = rec.samples[out_idx++];
      for (std::size_t k = 0; k < s.samples_per_record; ++k, pos += 2) {
        const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(bytes[pos]) |
                                                   static_cast<std::uint16_t>(bytes[pos + 1]) << 8);
        row.push_back((static_cast<double>(raw) - s.digital_min) * gain + s.physical_min);
      }
    }
  }
  return rec;
}

std::vector<std::uint8_t> write_edf(const signal::Recording& rec) {
  if (rec.samples.empty()) throw ContractError("EDF: recording has no channels");
  for (const auto& row : rec.samples) {
    if (row.size() != rec.samples.front().size()) throw ContractError("EDF: ragged channel rows");
  }
  const long fs = std::lround(rec.fs);
  if (fs < 1 || std::abs(rec.fs - static_cast<double>(fs)) > 1e-9) {
    throw ContractError("EDF: writer needs a positive integer sampling rate");
  }
  const std::size_t ns = rec.samples.size();
  const std::size_t n = rec.samples.front().size();

  // Record length: whole seconds when possible, else the largest divisor of
  // n whose duration prints exactly.
  std::size_t spr = static_cast<std::size_t>(fs);
  std::string duration = "1";
  if (n > 0 && n % spr != 0) {
    spr = 0;
    for (std::size_t d = n; d >= 1; --d) {
      if (n % d == 0 && fixed_text(static_cast<double>(d) / static_cast<double>(fs), duration) &&
          std::abs(static_cast<double>(d) / std::strtod(duration.c_str(), nullptr) - static_cast<double>(fs)) <
              1e-6 * static_cast<double>(fs)) {
        spr = d;
        break;
      }
    }
    if (spr == 0) throw ContractError("EDF: no record length divides the sample count exactly");
  }
  const std::size_t records = n / spr;

  std::vector<std::pair<double, double>> ranges;
  for (std::size_t c = 0; c < ns; ++c) {
    const auto& row = rec.samples[c];
    double lo = row.empty() ? -1.0 : *std::min_element(row.begin(), row.end());
    double hi = row.empty() ? 1.0 : *std::max_element(row.begin(), row.end());
    if (c < rec.physical_range.size()) {
      const auto [pmin, pmax] = rec.physical_range[c];
      const double slack = 0.5 * (pmax - pmin) / static_cast<double>(kDigitalMax - kDigitalMin);
      if (lo < pmin - slack || hi > pmax + slack) {
        throw ContractError("EDF: channel " + std::to_string(c) + " has samples outside its physical range");
      }
      ranges.emplace_back(pmin, pmax);
      continue;
    }
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    ranges.emplace_back(outward(lo, true), outward(hi, false));
  }

  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader * (ns + 1) + 2 * ns * n);
  put(out, "0", 8);
  put(out, "X X X X", 80);
  put(out, rec.id.substr(0, 80), 80);
  put(out, "01.01.00", 8);
  put(out, "00.00.00", 8);
  put(out, std::to_string(kFixedHeader * (ns + 1)), 8);
  put(out, "", 44);
  put(out, std::to_string(records), 8);
  put(out, duration, 8);
  put(out, std::to_string(ns), 4);
  for (std::size_t c = 0; c < ns; ++c) {
    put(out, c < rec.channels.size() ? rec.channels[c].substr(0, kLabelW) : "ch" + std::to_string(c), kLabelW);
  }
  for (std::size_t c = 0; c < ns; ++c) put(out, "", kTransducerW);
  for (std::size_t c = 0; c < ns; ++c) put(out, "uV", kDimW);
  for (std::size_t c = 0; c < ns; ++c) put(out, number_text(ranges[c].first), kNumW);
  for (std::size_t c = 0; c < ns; ++c) put(out, number_text(ranges[c].second), kNumW);
  for (std::size_t c = 0; c < ns; ++c) put(out, std::to_string(kDigitalMin), kNumW);
  for (std::size_t c = 0; c < ns; ++c) put(out, std::to_string(kDigitalMax), kNumW);
  for (std::size_t c = 0; c < ns; ++c) put(out, "", kPrefilterW);
  for (std::size_t c = 0; c < ns; ++c) put(out, std::to_string(spr), kSprW);
  for (std::size_t c = 0; c < ns; ++c) put(out, "", kReservedW);

  for (std::size_t r = 0; r < records; ++r) {
    for (std::size_t c = 0; c < ns; ++c) {
      const auto [pmin, pmax] = ranges[c];
      const double steps = static_cast<double>(kDigitalMax - kDigitalMin) / (pmax - pmin);
      for (std::size_t k = r * spr; k < (r + 1) * spr; ++k) {
        const double d = std::nearbyint((rec.samples[c][k] - pmin) * steps + kDigitalMin);
        const auto v = static_cast<std::int16_t>(std::clamp(d, double{kDigitalMin}, double{kDigitalMax}));
        const auto u = static_cast<std::uint16_t>(v);
        out.push_back(static_cast<std::uint8_t>(u & 0xff));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
      }
    }
  }
  return out;
}

signal::Recording read_edf_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_edf(bytes);
  } catch (const ParseError& e) {
    throw ParseError(e.offset(), path.string() + ": " + e.what());
  }
}

void write_edf_file(const std::filesystem::path& path, const signal::Recording& rec) {
  const auto bytes = write_edf(rec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace eegatt::io

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

// European Data Format (EDF) reader and writer. Samples are 16-bit
// little-endian integers scaled affinely into physical units. EDF+
// annotation signals are skipped on read.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eegatt/signal.hpp"

namespace eegatt::io {

struct EdfSignalHeader {
  std::string label;
  std::string transducer;
  std::string physical_dimension;
  double physical_min = 0, physical_max = 0;
  int digital_min = 0, digital_max = 0;
  std::string prefilter;
  std::size_t samples_per_record = 0;
};

struct EdfHeader {
  std::string version;
  std::string patient;
  std::string recording;
  std::string start_date;
  std::string start_time;
  std::size_t header_bytes = 0;
  std::string reserved;
  long record_count = 0;
  double record_duration = 0;
  std::vector<EdfSignalHeader> signals;
};

/// Decodes the fixed-width ASCII header. Throws ParseError with the byte
/// offset of the offending field.
EdfHeader parse_edf_header(std::span<const std::uint8_t> bytes);

/// Full decode into a Recording (id from the recording field, label 0).
/// Data signals must share one sampling rate.
signal::Recording parse_edf(std::span<const std::uint8_t> bytes);

/// Encodes a Recording. The physical range per channel is taken from
/// rec.physical_range when present, otherwise from the data (rounded
/// outward to the 8-character field). The sampling rate must be integral.
std::vector<std::uint8_t> write_edf(const signal::Recording& rec);

signal::Recording read_edf_file(const std::filesystem::path& path);
void write_edf_file(const std::filesystem::path& path, const signal::Recording& rec);

}  // namespace eegatt::io

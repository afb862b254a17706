// Copyright 2026 The unloadsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "unloadsim/core_model.hpp"

namespace unloadsim {

// SplitMix64. The whole generator is the 64-bit state below, so traces are
// reproducible on any platform. Distinct stream ids give independent
// sequences for the same seed.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed, uint64_t stream = 0);

  uint64_t next();
  // Uniform on [0, 1) with 53 bits of resolution.
  double next_double();
  // Uniform on [0, bound), bound >= 1.
  uint64_t next_below(uint64_t bound);

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

// Discrete Zipf over 1..n with p(i) proportional to i^-s.
class ZipfDist {
 public:
  // Throws SimError(kInvalidSupport) when n == 0 or s is negative / NaN.
  ZipfDist(uint64_t n, double s);

  uint64_t n() const { return pmf_.size(); }
  double skew() const { return skew_; }
  std::span<const double> pmf() const { return pmf_; }
  std::span<const double> cdf() const { return cdf_; }

  // 1-based index, by binary search of the cumulative table.
  uint64_t sample(SplitMix64& rng) const;

 private:
  double skew_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

enum class OffsetMode : uint8_t { kRegionStart };

struct WorkloadConfig {
  uint64_t num_regions = 1;
  uint64_t write_size = 16;
  uint64_t num_writes = 5'000'000;
  double skew = 0.5;
  uint64_t seed = 1;
  OffsetMode offset_mode = OffsetMode::kRegionStart;
};

// Payload of request `seq`: its big-endian encoding repeated up to `size`.
std::vector<uint8_t> payload_for(uint64_t seq, uint64_t size);

// Sequential writes, one per sampled region, aimed at the region start.
// Throws SimError(kConfigMismatch) when the layout disagrees with the
// config or the write does not fit a region, and kInvalidSupport for a bad
// skew.
std::vector<RdmaWriteRequest> gen_trace(const WorkloadConfig& cfg,
                                        const RegionLayout& layout);

// Trace dump: per record seq (8 B), dest (8 B), stag (4 B), payload length
// (4 B), all big-endian, then the payload. Hints are not stored.
void write_trace_dump(std::ostream& out,
                      std::span<const RdmaWriteRequest> trace);
// Throws SimError(kTraceFormat) on a truncated stream.
std::vector<RdmaWriteRequest> read_trace_dump(std::istream& in);

}  // namespace unloadsim

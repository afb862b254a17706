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

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "unloadsim/decision_policy.hpp"
#include "unloadsim/sim_engine.hpp"
#include "unloadsim/workload_gen.hpp"

namespace unloadsim {

inline constexpr uint64_t kDefaultSweepWrites = 500'000;

// 1, 4, 16, ..., 2^20.
std::vector<uint64_t> default_region_counts();

struct SweepSpec {
  std::vector<uint64_t> region_counts = default_region_counts();
  std::vector<Policy> policies = {AlwaysOffload{}, AlwaysUnload{},
                                  HintBased{4096}};
  // num_regions is overwritten per sweep point.
  WorkloadConfig workload{.num_writes = kDefaultSweepWrites};
  SimConfig sim;
  LatencyParams latency;
};

struct SweepRow {
  std::string policy;
  uint64_t regions = 0;
  double skew = 0;
  uint64_t write_size = 0;
  uint64_t writes = 0;
  uint64_t mean_rtt_ns = 0;
  uint64_t p50_rtt_ns = 0;
  uint64_t p99_rtt_ns = 0;
  double mtt_hit_rate = 0;
  double unload_fraction = 0;
  uint64_t fallback_count = 0;
  uint64_t security_rejects = 0;
  uint64_t seed = 0;
  uint64_t memory_digest = 0;  // not part of the CSV
};

SweepRow make_row(const WorkloadConfig& cfg, const Policy& policy,
                  const RunResult& result);

// One row per (policy, region count), ordered by policy then region count
// as given. Points run on up to `jobs` threads; the result does not depend
// on `jobs`. Throws SimError(kConfigMismatch) on an empty or zero region
// list.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t jobs = 1);

extern const char* const kCsvHeader;

std::string format_csv_row(const SweepRow& row);
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace unloadsim

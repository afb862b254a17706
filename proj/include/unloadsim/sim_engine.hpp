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
#include <optional>
#include <span>
#include <vector>

#include "unloadsim/core_model.hpp"
#include "unloadsim/decision_policy.hpp"
#include "unloadsim/mtt_cache.hpp"
#include "unloadsim/unload_protocol.hpp"
#include "unloadsim/workload_gen.hpp"

namespace unloadsim {

// Additive latency model, calibrated so that an MTT hit costs 2.6 us, a
// miss 5.1 us and an unloaded 16-byte write about 3.4 us round trip.
struct LatencyParams {
  uint64_t base_rtt_ns = 2600;
  uint64_t mtt_miss_penalty_ns = 2500;
  uint64_t unload_overhead_ns = 800;
  // Target-CPU copy cost in picoseconds per byte (100 ps = 0.1 ns).
  uint64_t copy_cost_ps_per_byte = 100;
  uint64_t cpu_tlb_penalty_ns = 0;

  static LatencyParams zero() { return {0, 0, 0, 0, 0}; }
};

uint64_t offload_rtt(bool miss, const LatencyParams& params);
// base + overhead + ceil(length * copy cost) + TLB penalty.
uint64_t unload_rtt(uint64_t payload_length, const LatencyParams& params);

struct SimConfig {
  std::size_t mtt_capacity = kDefaultMttCapacity;
  std::size_t num_slots = kDefaultSlotCount;
  uint64_t slot_size = kDefaultSlotSize;
  // Leading writes left out of latency and hit-rate aggregates.
  double warmup_fraction = 0.01;
  uint64_t warmup_min = 1000;
};

// Number of leading writes to exclude: max(ceil(fraction * n), minimum),
// capped at n / 2 so that short runs still report something. A fraction
// of zero disables warmup.
uint64_t warmup_writes(uint64_t num_writes, double fraction, uint64_t minimum);

struct RunStats {
  // Over every executed write.
  uint64_t writes = 0;
  uint64_t offload_count = 0;
  uint64_t unload_count = 0;
  uint64_t fallback_count = 0;
  uint64_t security_rejects = 0;
  uint64_t clock_ns = 0;

  // Over the measured writes only (after warmup).
  uint64_t warmup_excluded = 0;
  std::vector<uint64_t> rtt_ns;
  uint64_t rtt_sum_ns = 0;
  uint64_t mtt_hits = 0;
  uint64_t mtt_misses = 0;

  uint64_t measured() const { return rtt_ns.size(); }
  // Integer mean, rounded half up; 0 with nothing measured.
  uint64_t mean_rtt_ns() const;
  double exact_mean_rtt_ns() const;
  // Nearest-rank percentile, q in (0, 1].
  uint64_t percentile_rtt_ns(double q) const;
  double mtt_hit_rate() const;
  double unload_fraction() const;
};

struct WriteResult {
  uint64_t rtt_ns = 0;
  Decision decision;
  Route path = Route::kOffload;  // the path actually taken
  bool fell_back = false;
  uint32_t page_hits = 0;
  uint32_t page_misses = 0;
  CompletionEvent completion;
};

// One closed-loop simulation: MTT cache, uMTT, temporary buffer, target
// memory, monitor and clock. All regions of the layout are registered on
// construction. Not thread-safe; run one instance per thread.
class Simulator {
 public:
  Simulator(const RegionLayout& layout, Policy policy, SimConfig config = {},
            LatencyParams params = {}, uint64_t warmup = 0);

  // Runs one write through decide -> route -> apply and advances the clock
  // by its round trip. A FallbackOffload from the temporary buffer sends
  // the write down the offload path. MalformedRecord and PageOutOfWindow
  // propagate as SimError.
  WriteResult simulate_write(const RdmaWriteRequest& req);

  void run_trace(std::span<const RdmaWriteRequest> trace);

  const RegionLayout& layout() const { return layout_; }
  const Policy& policy() const { return policy_; }
  const MttCache& mtt() const { return mtt_; }
  const UmttMap& umtt() const { return umtt_; }
  UmttMap& umtt() { return umtt_; }
  const TempBuffer& temp_buffer() const { return temp_; }
  TempBuffer& temp_buffer() { return temp_; }
  const TargetMemory& memory() const { return mem_; }
  const FreqMonitor* monitor() const { return monitor_ ? &*monitor_ : nullptr; }
  uint64_t clock_ns() const { return clock_ns_; }
  const RunStats& stats() const { return stats_; }

 private:
  RegionLayout layout_;
  Policy policy_;
  SimConfig config_;
  LatencyParams params_;
  uint64_t warmup_;

  MttCache mtt_;
  UmttMap umtt_;
  TempBuffer temp_;
  TargetMemory mem_;
  std::optional<FreqMonitor> monitor_;
  uint64_t clock_ns_ = 0;
  RunStats stats_;
};

struct RunResult {
  RunStats stats;
  uint64_t memory_digest = 0;
};

// Builds the default layout for cfg.num_regions, generates the trace,
// applies the top-K hints when the policy asks for them and executes every
// write in seq order. Throws SimError(kConfigMismatch) on an unusable
// configuration.
RunResult run(const WorkloadConfig& cfg, const Policy& policy,
              const SimConfig& sim = {}, const LatencyParams& params = {});

}  // namespace unloadsim

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

#include "unloadsim/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace unloadsim {

uint64_t offload_rtt(bool miss, const LatencyParams& params) {
  return params.base_rtt_ns + (miss ? params.mtt_miss_penalty_ns : 0);
}

uint64_t unload_rtt(uint64_t payload_length, const LatencyParams& params) {
  const uint64_t copy_ps = payload_length * params.copy_cost_ps_per_byte;
  const uint64_t copy_ns = (copy_ps + 999) / 1000;
  return params.base_rtt_ns + params.unload_overhead_ns + copy_ns +
         params.cpu_tlb_penalty_ns;
}

uint64_t warmup_writes(uint64_t num_writes, double fraction,
                       uint64_t minimum) {
  if (fraction <= 0.0 || num_writes == 0) return 0;
  const auto scaled = static_cast<uint64_t>(
      std::ceil(fraction * static_cast<double>(num_writes)));
  return std::min(std::max(scaled, minimum), num_writes / 2);
}

uint64_t RunStats::mean_rtt_ns() const {
  const uint64_t n = measured();
  if (n == 0) return 0;
  return (2 * rtt_sum_ns + n) / (2 * n);
}

double RunStats::exact_mean_rtt_ns() const {
  const uint64_t n = measured();
  return n == 0 ? 0.0
                : static_cast<double>(rtt_sum_ns) / static_cast<double>(n);
}

uint64_t RunStats::percentile_rtt_ns(double q) const {
  const uint64_t n = measured();
  if (n == 0) return 0;
  auto rank = static_cast<uint64_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<uint64_t>(rank, 1, n);
  std::vector<uint64_t> sorted(rtt_ns);
  auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(sorted.begin(), nth, sorted.end());
  return *nth;
}

double RunStats::mtt_hit_rate() const {
  const uint64_t accesses = mtt_hits + mtt_misses;
  return accesses == 0 ? 0.0
                       : static_cast<double>(mtt_hits) /
                             static_cast<double>(accesses);
}

double RunStats::unload_fraction() const {
  return writes == 0 ? 0.0
                     : static_cast<double>(unload_count) /
                           static_cast<double>(writes);
}

Simulator::Simulator(const RegionLayout& layout, Policy policy,
                     SimConfig config, LatencyParams params, uint64_t warmup)
    : layout_(layout),
      policy_(std::move(policy)),
      config_(config),
      params_(params),
      warmup_(warmup),
      mtt_(config.mtt_capacity),
      temp_(config.num_slots, config.slot_size) {
  for (uint64_t i = 1; i <= layout_.num_regions(); ++i) {
    umtt_.register_region(layout_.region(i));
  }
  if (uses_monitor(policy_)) monitor_.emplace(layout_.page_window());
}

WriteResult Simulator::simulate_write(const RdmaWriteRequest& req) {
  const uint64_t page_size = layout_.page_size();
  WriteResult out;
  if (monitor_) monitor_->record(req, page_size);
  out.decision = decide(req, policy_, monitor(), page_size);
  out.path = out.decision.route;

  out.completion.seq = req.seq;
  out.completion.byte_length = req.length();

  if (out.path == Route::kUnload) {
    PostOutcome posted = initiator_post_unloaded(req, temp_);
    if (const auto* rec = std::get_if<WriteImmRecord>(&posted)) {
      const ApplyOutcome applied =
          target_apply_unloaded(*rec, umtt_, mem_, temp_);
      out.rtt_ns = unload_rtt(req.length(), params_);
      out.completion.immediate = rec->immediate;
      if (applied.applied()) {
        out.completion.kind = CompletionKind::kUnloadCopyDone;
      } else {
        out.completion.kind = CompletionKind::kSecurityReject;
        out.completion.byte_length = 0;
        ++stats_.security_rejects;
      }
      ++stats_.unload_count;
    } else {
      out.fell_back = true;
      out.path = Route::kOffload;
    }
  }

  if (out.path == Route::kOffload) {
    const PageRange pages = page_span(req.dest, req.length(), page_size);
    for (uint64_t i = 0; i < pages.count; ++i) {
      if (mtt_.access(PageId{pages.first.value + i}) == CacheOutcome::kHit) {
        ++out.page_hits;
      } else {
        ++out.page_misses;
      }
    }
    target_apply_offloaded(req, mem_);
    out.rtt_ns = offload_rtt(out.page_misses > 0, params_);
    out.completion.kind = CompletionKind::kOffloadDone;
    if (out.fell_back) {
      ++stats_.fallback_count;
    } else {
      ++stats_.offload_count;
    }
  }

  clock_ns_ += out.rtt_ns;
  out.completion.timestamp_ns = clock_ns_;
  stats_.clock_ns = clock_ns_;
  ++stats_.writes;
  if (stats_.writes <= warmup_) {
    ++stats_.warmup_excluded;
  } else {
    stats_.rtt_ns.push_back(out.rtt_ns);
    stats_.rtt_sum_ns += out.rtt_ns;
    stats_.mtt_hits += out.page_hits;
    stats_.mtt_misses += out.page_misses;
  }
  return out;
}

void Simulator::run_trace(std::span<const RdmaWriteRequest> trace) {
  stats_.rtt_ns.reserve(stats_.rtt_ns.size() + trace.size());
  for (const RdmaWriteRequest& req : trace) simulate_write(req);
}

RunResult run(const WorkloadConfig& cfg, const Policy& policy,
              const SimConfig& sim, const LatencyParams& params) {
  if (cfg.num_regions == 0) {
    throw SimError(ErrorCode::kConfigMismatch, "regions must be >= 1");
  }
  if (cfg.write_size + kSlotHeaderSize > sim.slot_size) {
    throw SimError(ErrorCode::kConfigMismatch,
                   "write size " + std::to_string(cfg.write_size) +
                       " does not fit a temporary-buffer slot");
  }
  const RegionLayout layout = build_region_layout(cfg.num_regions);
  std::vector<RdmaWriteRequest> trace = gen_trace(cfg, layout);
  if (const auto* hint = std::get_if<HintBased>(&policy); hint && hint->top_k) {
    const ZipfDist dist(cfg.num_regions, cfg.skew);
    hint_annotate_topk(trace, *hint->top_k, dist.pmf());
  }

  Simulator simulator(
      layout, policy, sim, params,
      warmup_writes(cfg.num_writes, sim.warmup_fraction, sim.warmup_min));
  simulator.run_trace(trace);

  RunResult result;
  result.stats = simulator.stats();
  result.memory_digest = simulator.memory().digest();
  return result;
}

}  // namespace unloadsim

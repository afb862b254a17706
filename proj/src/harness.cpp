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

#include "unloadsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace unloadsim {

const char* const kCsvHeader =
    "policy,regions,skew,write_size,writes,mean_rtt_ns,p50_rtt_ns,p99_rtt_ns,"
    "mtt_hit_rate,unload_fraction,fallback_count,security_rejects,seed";

std::vector<uint64_t> default_region_counts() {
  std::vector<uint64_t> counts;
  for (uint64_t n = 1; n <= (uint64_t{1} << 20); n *= 4) counts.push_back(n);
  return counts;
}

SweepRow make_row(const WorkloadConfig& cfg, const Policy& policy,
                  const RunResult& result) {
  const RunStats& s = result.stats;
  SweepRow row;
  row.policy = to_string(policy);
  row.regions = cfg.num_regions;
  row.skew = cfg.skew;
  row.write_size = cfg.write_size;
  row.writes = cfg.num_writes;
  row.mean_rtt_ns = s.mean_rtt_ns();
  row.p50_rtt_ns = s.percentile_rtt_ns(0.50);
  row.p99_rtt_ns = s.percentile_rtt_ns(0.99);
  row.mtt_hit_rate = s.mtt_hit_rate();
  row.unload_fraction = s.unload_fraction();
  row.fallback_count = s.fallback_count;
  row.security_rejects = s.security_rejects;
  row.seed = cfg.seed;
  row.memory_digest = result.memory_digest;
  return row;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::size_t jobs) {
  if (spec.region_counts.empty()) {
    throw SimError(ErrorCode::kConfigMismatch, "region sweep is empty");
  }
  for (uint64_t n : spec.region_counts) {
    if (n == 0) throw SimError(ErrorCode::kConfigMismatch, "regions must be >= 1");
  }

  struct Point {
    std::size_t policy;
    uint64_t regions;
  };
  std::vector<Point> points;
  for (std::size_t p = 0; p < spec.policies.size(); ++p) {
    for (uint64_t n : spec.region_counts) points.push_back({p, n});
  }

  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        WorkloadConfig cfg = spec.workload;
        cfg.num_regions = points[i].regions;
        const Policy& policy = spec.policies[points[i].policy];
        rows[i] = make_row(cfg, policy, run(cfg, policy, spec.sim, spec.latency));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(points.size());
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, points.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::string format_csv_row(const SweepRow& row) {
  char skew[32];
  const char* end = std::to_chars(skew, skew + sizeof(skew), row.skew).ptr;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s,%llu,%.*s,%llu,%llu,%llu,%llu,%llu,%.6f,%.6f,%llu,%llu,%llu",
                row.policy.c_str(), static_cast<unsigned long long>(row.regions),
                static_cast<int>(end - skew), skew,
                static_cast<unsigned long long>(row.write_size),
                static_cast<unsigned long long>(row.writes),
                static_cast<unsigned long long>(row.mean_rtt_ns),
                static_cast<unsigned long long>(row.p50_rtt_ns),
                static_cast<unsigned long long>(row.p99_rtt_ns),
                row.mtt_hit_rate, row.unload_fraction,
                static_cast<unsigned long long>(row.fallback_count),
                static_cast<unsigned long long>(row.security_rejects),
                static_cast<unsigned long long>(row.seed));
  return buf;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvHeader << '\n';
  for (const SweepRow& row : rows) out << format_csv_row(row) << '\n';
}

}  // namespace unloadsim

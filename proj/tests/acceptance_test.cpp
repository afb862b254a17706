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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "unloadsim/cli.hpp"
#include "unloadsim/harness.hpp"
#include "unloadsim/sim_engine.hpp"

namespace unloadsim {
namespace {

// Pinned thresholds.
constexpr uint64_t kSeed = 42;
constexpr uint64_t kHitEndpointNs = 2600;
constexpr uint64_t kMissEndpointLoNs = 4850;
constexpr uint64_t kMissEndpointHiNs = 5150;
constexpr double kMinMissRate = 0.90;
constexpr uint64_t kUnloadFlatNs = 3402;
constexpr double kMaxUnloadToOffload = 0.72;
constexpr double kImprovementTarget = 0.31;
constexpr double kImprovementTolerance = 0.04;
constexpr double kAdaptiveSlack = 1.03;
constexpr double kNormalizationTolerance = 1e-12;
constexpr double kChiSquare999 = 1168.0;  // 0.999 quantile, 1023 dof

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Suite {
 public:
  void check(const char* id, const char* title, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("[%s] %s %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id,
                title, out.detail.c_str(), secs);
    std::fflush(stdout);
    failures_ += out.pass ? 0 : 1;
  }

  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

struct Sweep {
  std::vector<uint64_t> regions;
  std::map<std::string, std::vector<SweepRow>> by_policy;
};

Sweep paper_sweep() {
  SweepSpec spec;
  spec.workload.seed = kSeed;
  const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  Sweep sweep;
  sweep.regions = spec.region_counts;
  for (SweepRow& row : run_sweep(spec, jobs)) {
    sweep.by_policy[row.policy].push_back(std::move(row));
  }
  return sweep;
}

// Random trace over a small layout with multi-page writes and random hints.
std::vector<RdmaWriteRequest> random_trace(std::mt19937_64& rng,
                                           const RegionLayout& layout,
                                           uint64_t writes) {
  std::vector<RdmaWriteRequest> trace;
  trace.reserve(writes);
  for (uint64_t seq = 0; seq < writes; ++seq) {
    const uint64_t region = 1 + rng() % layout.num_regions();
    const uint64_t length = rng() % 10 == 0 ? 1 + rng() % layout.region_size()
                                            : 1 + rng() % 32;
    const uint64_t offset = rng() % (layout.region_size() - length + 1);
    RdmaWriteRequest req;
    req.seq = seq;
    req.dest = VirtualAddress{layout.base(region).value + offset};
    req.stag = layout.stag(region);
    req.payload.resize(length);
    for (auto& b : req.payload) b = static_cast<uint8_t>(rng());
    if (rng() % 3 != 0) req.hint = rng() % 2 ? Route::kOffload : Route::kUnload;
    trace.push_back(std::move(req));
  }
  return trace;
}

Policy random_policy(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return AlwaysOffload{};
    case 1: return AlwaysUnload{};
    case 2: return HintBased{};
    default: {
      std::uniform_real_distribution<double> theta(0.0, 1.0);
      return make_frequency_policy(theta(rng), 1 + rng() % 8192);
    }
  }
}

int run_all() {
  Suite suite;
  std::printf("running the default sweep (11 region counts x 3 policies, "
              "500000 writes per point)...\n");
  std::fflush(stdout);
  const Sweep sweep = paper_sweep();
  const auto& off = sweep.by_policy.at("offload");
  const auto& unl = sweep.by_policy.at("unload");
  const auto& hint = sweep.by_policy.at("hint:4096");
  const std::size_t last = sweep.regions.size() - 1;

  suite.check("AC01", "offload endpoint, 1 region", [&] {
    const uint64_t mean = off.front().mean_rtt_ns;
    return Outcome{off.front().regions == 1 && mean == kHitEndpointNs,
                   fmt("mean=%llu ns, expected exactly %llu",
                       (unsigned long long)mean,
                       (unsigned long long)kHitEndpointNs)};
  });

  suite.check("AC02", "offload endpoint, 2^20 regions", [&] {
    const SweepRow& row = off[last];
    const double miss = 1.0 - row.mtt_hit_rate;
    const bool ok = row.regions == (uint64_t{1} << 20) &&
                    row.mean_rtt_ns >= kMissEndpointLoNs &&
                    row.mean_rtt_ns <= kMissEndpointHiNs && miss >= kMinMissRate;
    return Outcome{ok, fmt("mean=%llu ns in [%llu, %llu], miss rate=%.4f >= %.2f",
                           (unsigned long long)row.mean_rtt_ns,
                           (unsigned long long)kMissEndpointLoNs,
                           (unsigned long long)kMissEndpointHiNs, miss,
                           kMinMissRate)};
  });

  suite.check("AC03", "unload flatness", [&] {
    uint64_t lo = UINT64_MAX;
    uint64_t hi = 0;
    for (const auto& row : unl) {
      lo = std::min(lo, row.mean_rtt_ns);
      hi = std::max(hi, row.mean_rtt_ns);
    }
    return Outcome{lo == kUnloadFlatNs && hi == kUnloadFlatNs,
                   fmt("min=%llu max=%llu spread=%llu ns over %zu points",
                       (unsigned long long)lo, (unsigned long long)hi,
                       (unsigned long long)(hi - lo), unl.size())};
  });

  suite.check("AC04", "unload/offload crossover", [&] {
    const double small_off = off.front().mean_rtt_ns;
    const double small_unl = unl.front().mean_rtt_ns;
    const double big_off = off[last].mean_rtt_ns;
    const double big_unl = unl[last].mean_rtt_ns;
    const double ratio = big_unl / big_off;
    const double improvement = 1.0 - ratio;
    const bool ok = small_off < small_unl && ratio <= kMaxUnloadToOffload &&
                    std::fabs(improvement - kImprovementTarget) <=
                        kImprovementTolerance;
    return Outcome{ok, fmt("1 region: %.0f < %.0f; 2^20: unload/offload=%.4f "
                           "<= %.2f, improvement=%.1f%% (31%% +/- 4)",
                           small_off, small_unl, ratio, kMaxUnloadToOffload,
                           100 * improvement)};
  });

  suite.check("AC05", "adaptive dominance (hint:4096)", [&] {
    bool ok = true;
    double worst = 0;
    for (std::size_t i = 0; i < hint.size(); ++i) {
      const double best = std::min(off[i].mean_rtt_ns, unl[i].mean_rtt_ns);
      const double rel = hint[i].mean_rtt_ns / best;
      worst = std::max(worst, rel);
      ok = ok && hint[i].mean_rtt_ns <= best * kAdaptiveSlack;
    }
    return Outcome{ok, fmt("worst adaptive/best = %.4f <= %.2f", worst,
                           kAdaptiveSlack)};
  });

  suite.check("AC06", "offload monotonicity", [&] {
    bool ok = true;
    std::string series;
    for (std::size_t i = 0; i < off.size(); ++i) {
      if (i > 0) ok = ok && off[i].mean_rtt_ns >= off[i - 1].mean_rtt_ns;
      series += (i ? "," : "") + std::to_string(off[i].mean_rtt_ns);
    }
    return Outcome{ok, "means " + series};
  });

  suite.check("AC07", "path-mix memory integrity", [] {
    std::mt19937_64 rng(7001);
    uint64_t writes_total = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const RegionLayout layout =
          build_region_layout(1 + rng() % 32, 8192, 4096, 16384);
      const auto trace = random_trace(rng, layout, 1 + rng() % 10000);
      writes_total += trace.size();
      SimConfig sc;
      sc.mtt_capacity = 1 + rng() % 64;
      sc.slot_size = layout.region_size() + kSlotHeaderSize;
      const Policy policy = random_policy(rng);
      Simulator sim(layout, policy, sc);
      sim.run_trace(trace);
      const uint64_t oracle = testing::replay_digest_dense(
          trace, layout.origin().value,
          layout.end().value - layout.origin().value);
      if (sim.memory().digest() != oracle) {
        return Outcome{false, fmt("trial %d (%s) digest mismatch", trial,
                                  to_string(policy).c_str())};
      }
    }
    return Outcome{true, fmt("1000 traces, %llu writes, all digests match the "
                             "replay oracle",
                             (unsigned long long)writes_total)};
  });

  suite.check("AC08", "LRU oracle equivalence", [] {
    std::mt19937_64 rng(7002);
    for (std::size_t capacity : {1u, 2u, 7u, 1024u}) {
      MttCache cache(capacity);
      testing::ReferenceLru reference(capacity);
      const uint64_t universe = 2 * capacity + 3;
      for (int i = 0; i < 100000; ++i) {
        const uint64_t page = rng() % universe;
        const bool hit = cache.access(PageId{page}) == CacheOutcome::kHit;
        if (hit != reference.access(page) || cache.size() > capacity) {
          return Outcome{false, fmt("capacity %zu diverges at access %d",
                                    capacity, i)};
        }
      }
    }
    return Outcome{true, "capacities 1,2,7,1024 x 100000 accesses identical"};
  });

  suite.check("AC09", "security parity", [] {
    UmttMap umtt;
    struct Reg { uint32_t stag; uint64_t base; uint64_t len; Access access; };
    const std::vector<Reg> regs = {{1, 0x1000, 64, Access::kRemoteWrite},
                                   {2, 0x3000, 40, Access::kRemoteWrite},
                                   {3, 0x5000, 64, Access::kNone},
                                   {4, 0x7000, 64, Access::kRemoteWrite}};
    for (const Reg& r : regs) {
      umtt.register_region({r.stag, VirtualAddress{r.base}, r.len, r.access});
    }
    umtt.deregister(4);  // stale stag
    auto expected_ok = [&](uint32_t stag, uint64_t dest, uint64_t len) {
      for (const Reg& r : regs) {
        if (r.stag == stag && stag != 4) {
          return r.access == Access::kRemoteWrite &&
                 testing::in_bounds(r.base, r.len, dest, len);
        }
      }
      return false;
    };
    TempBuffer buf(8, 256);
    TargetMemory mem;
    uint64_t cases = 0;
    uint64_t applied = 0;
    auto probe = [&](uint32_t stag, uint64_t dest, uint64_t len) -> bool {
      RdmaWriteRequest req;
      req.seq = cases;
      req.dest = VirtualAddress{dest};
      req.stag = stag;
      req.payload.assign(len, static_cast<uint8_t>(1 + cases % 255));
      const uint64_t before = mem.digest();
      const auto posted = initiator_post_unloaded(req, buf);
      const ApplyOutcome out = target_apply_unloaded(
          std::get<WriteImmRecord>(posted), umtt, mem, buf);
      ++cases;
      if (out.applied() != expected_ok(stag, dest, len)) return false;
      if (out.applied()) {
        ++applied;
        return mem.read(req.dest, len) == req.payload;
      }
      return mem.digest() == before;
    };
    // Exhaustive over the grid around every region.
    for (const Reg& r : regs) {
      for (uint32_t stag : {r.stag, 99u}) {
        for (uint64_t dest = r.base - 16; dest <= r.base + r.len + 16; ++dest) {
          for (uint64_t len = 1; len <= r.len + 8; ++len) {
            if (!probe(stag, dest, len)) {
              return Outcome{false, fmt("stag %u dest 0x%llx len %llu", stag,
                                        (unsigned long long)dest,
                                        (unsigned long long)len)};
            }
          }
        }
      }
    }
    std::mt19937_64 rng(7003);
    for (int i = 0; i < 10000; ++i) {
      const uint32_t stag = static_cast<uint32_t>(1 + rng() % 5);
      uint64_t dest;
      switch (rng() % 3) {
        case 0: dest = regs[rng() % regs.size()].base + rng() % 80 - 8; break;
        case 1: dest = UINT64_MAX - rng() % 256; break;
        default: dest = rng(); break;
      }
      const uint64_t len = 1 + rng() % 200;
      if (!probe(stag, dest, len)) {
        return Outcome{false, fmt("random case %d failed", i)};
      }
    }
    return Outcome{applied > 0 && buf.free_credits() == buf.num_slots(),
                   fmt("%llu cases, %llu applied, every rejection left memory "
                       "untouched",
                       (unsigned long long)cases, (unsigned long long)applied)};
  });

  suite.check("AC10", "encode roundtrip and credit conservation", [] {
    std::mt19937_64 rng(7004);
    uint64_t fallbacks = 0;
    uint64_t wraps = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t slots = 1 + rng() % 16;
      const uint64_t slot_size = 9 + rng() % 300;
      TempBuffer buf(slots, slot_size);
      UmttMap umtt;
      umtt.register_region({1, VirtualAddress{0x10000}, 1 << 20,
                            Access::kRemoteWrite});
      TargetMemory mem;
      std::vector<std::pair<WriteImmRecord, RdmaWriteRequest>> in_flight;
      for (int step = 0; step < 400; ++step) {
        if (rng() % 5 < 3) {
          RdmaWriteRequest req;
          req.seq = step;
          req.stag = 1;
          const uint64_t len = 1 + rng() % (slot_size - 8);
          req.dest = VirtualAddress{0x10000 + rng() % ((1 << 20) - len)};
          req.payload.resize(len);
          for (auto& b : req.payload) b = static_cast<uint8_t>(rng());
          const std::size_t cursor = buf.next_slot();
          const auto out = initiator_post_unloaded(req, buf);
          if (const auto* rec = std::get_if<WriteImmRecord>(&out)) {
            const auto header = std::span<const uint8_t, 8>(rec->bytes.data(), 8);
            if (rec->slot_index != cursor || load_be64(header) != req.dest.value ||
                rec->total_length != len + 8 || rec->immediate != req.stag) {
              return Outcome{false, "record does not decode to its request"};
            }
            if (buf.next_slot() < cursor) ++wraps;
            in_flight.emplace_back(*rec, req);
          } else {
            ++fallbacks;
            if (in_flight.size() != slots || buf.next_slot() != cursor) {
              return Outcome{false, "fallback with credits left or cursor moved"};
            }
          }
        } else if (!in_flight.empty()) {
          const auto [rec, req] = in_flight.front();
          in_flight.erase(in_flight.begin());
          const ApplyOutcome out = target_apply_unloaded(rec, umtt, mem, buf);
          if (!out.applied() || out.dest != req.dest ||
              mem.read(req.dest, req.length()) != req.payload) {
            return Outcome{false, "target did not apply the posted write"};
          }
        }
        if (buf.free_credits() + buf.occupied_slots() != slots) {
          return Outcome{false, "credits + occupied != slots"};
        }
      }
    }
    return Outcome{fallbacks > 0 && wraps > 0,
                   fmt("500 configs, %llu exhaustion fallbacks, %llu cursor wraps",
                       (unsigned long long)fallbacks, (unsigned long long)wraps)};
  });

  suite.check("AC11", "monitor exactness and threshold semantics", [] {
    std::mt19937_64 rng(7005);
    for (int trial = 0; trial < 50; ++trial) {
      const RegionLayout layout =
          build_region_layout(1 + rng() % 64, 8192, 4096, 16384);
      const auto trace = random_trace(rng, layout, 1 + rng() % 3000);
      FreqMonitor mon(layout.page_window());
      for (const auto& req : trace) mon.record(req, layout.page_size());
      const auto hist = testing::page_histogram(trace, layout.page_size());
      uint64_t total = 0;
      const PageRange w = mon.window();
      for (uint64_t i = 0; i < w.count; ++i) {
        const auto it = hist.find(w.first.value + i);
        const uint64_t expected = it == hist.end() ? 0 : it->second;
        if (mon.counts()[i] != expected) {
          return Outcome{false, fmt("trial %d page %llu count mismatch", trial,
                                    (unsigned long long)(w.first.value + i))};
        }
        total += expected;
      }
      if (mon.total() != total) return Outcome{false, "total mismatch"};
      const std::vector<uint64_t> counts(mon.counts().begin(), mon.counts().end());
      for (std::size_t k = 1; k <= hist.size() + 1; ++k) {
        if (compute_threshold(mon, k) != testing::sorted_threshold(counts, k)) {
          return Outcome{false, fmt("threshold mismatch at k=%zu", k)};
        }
      }
      if (!(compute_threshold(mon, 0) > 1.0)) {
        return Outcome{false, "capacity 0 is not the unload-all sentinel"};
      }
    }
    return Outcome{true, "50 traces: counters equal brute-force histograms, "
                         "thresholds equal sorted order statistics"};
  });

  suite.check("AC12", "zipf statistics", [] {
    std::mt19937_64 rng(7006);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const uint64_t n = trial == 0 ? (uint64_t{1} << 20) : 1 + rng() % (1 << 20);
      const double s = trial == 0 ? 0.5 : std::ldexp(double(rng() % 2049), -10);
      const ZipfDist z(n, s);
      long double sum = 0;
      for (double p : z.pmf()) sum += p;
      worst = std::max(worst, static_cast<double>(std::fabs(sum - 1.0L)));
    }
    const ZipfDist z(1024, 0.5);
    SplitMix64 sampler(kSeed);
    std::vector<uint64_t> observed(1024, 0);
    for (int i = 0; i < 1'000'000; ++i) ++observed[z.sample(sampler) - 1];
    const double chi2 = testing::chi_square(observed, z.pmf(), 1'000'000);
    return Outcome{worst <= kNormalizationTolerance && chi2 < kChiSquare999,
                   fmt("max |sum pmf - 1| = %.2e <= 1e-12, chi2 = %.1f < %.0f",
                       worst, chi2, kChiSquare999)};
  });

  suite.check("AC13", "determinism across runs and --jobs", [] {
    auto cli = [](const std::vector<std::string>& args) {
      std::vector<const char*> argv = {"unloadsim"};
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out;
      std::ostringstream err;
      const int code =
          run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
      return std::make_pair(code, out.str());
    };
    std::vector<std::string> args = {
        "sweep", "--writes", "50000", "--seed", "5", "--policy",
        "offload,unload,hint:4096,freq:0.0001", "--jobs"};
    auto jobs = [&](const char* n) {
      auto a = args;
      a.push_back(n);
      return cli(a);
    };
    const auto one = jobs("1");
    const auto four = jobs("4");
    const auto again = jobs("1");

    WorkloadConfig cfg;
    cfg.num_regions = 65536;
    cfg.num_writes = 100000;
    cfg.seed = 5;
    const RunResult a = run(cfg, make_frequency_policy(0.0001));
    const RunResult b = run(cfg, make_frequency_policy(0.0001));
    const bool ok = one.first == 0 && one.second == four.second &&
                    one.second == again.second &&
                    a.memory_digest == b.memory_digest &&
                    a.stats.rtt_ns == b.stats.rtt_ns;
    return Outcome{ok, fmt("%zu CSV bytes identical for jobs=1,4 and a rerun; "
                           "digest %016llx reproduced",
                           one.second.size(),
                           (unsigned long long)a.memory_digest)};
  });

  std::printf("%s: %d criteria failed\n",
              suite.failures() == 0 ? "ACCEPTED" : "REJECTED", suite.failures());
  return suite.failures() == 0 ? 0 : 1;
}

}  // namespace
}  // namespace unloadsim

int main() { return unloadsim::run_all(); }

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

#include "unloadsim/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "unloadsim/harness.hpp"

namespace unloadsim {

namespace {

struct CliOptions {
  uint64_t regions = 1;
  std::vector<uint64_t> region_sweep;
  uint64_t writes = kDefaultSweepWrites;
  uint64_t write_size = 16;
  double skew = 0.5;
  std::vector<std::string> policies;
  uint64_t mtt_capacity = kDefaultMttCapacity;
  uint64_t slots = kDefaultSlotCount;
  uint64_t seed = 1;
  std::string out_path;
  std::size_t jobs = 1;
  std::string dump_trace;

  uint64_t base_rtt_ns = LatencyParams{}.base_rtt_ns;
  uint64_t miss_penalty_ns = LatencyParams{}.mtt_miss_penalty_ns;
  uint64_t unload_overhead_ns = LatencyParams{}.unload_overhead_ns;
  double copy_ns_per_byte = 0.1;
  uint64_t tlb_penalty_ns = LatencyParams{}.cpu_tlb_penalty_ns;
  double warmup_fraction = SimConfig{}.warmup_fraction;
};

struct ConfigError {
  std::string message;
};

void add_options(CLI::App& app, CliOptions& o) {
  app.set_config("--config", "", "Flat key = value file; flags override it");
  app.add_option("--regions", o.regions, "Number of 4 KB memory regions");
  app.add_option("--region-sweep", o.region_sweep,
                 "Comma-separated region counts for sweep")
      ->delimiter(',');
  app.add_option("--writes", o.writes, "Writes per run");
  app.add_option("--write-size", o.write_size, "Payload bytes per write");
  app.add_option("--skew", o.skew, "Zipf skew");
  app.add_option("--policy", o.policies,
                 "offload | unload | hint:K | freq:THETA[:MAXSZ]")
      ->delimiter(',');
  app.add_option("--mtt-capacity", o.mtt_capacity, "MTT cache entries");
  app.add_option("--slots", o.slots, "Temporary-buffer slots per queue pair");
  app.add_option("--seed", o.seed, "Workload seed");
  app.add_option("--out", o.out_path, "Write CSV here instead of stdout");
  app.add_option("--jobs", o.jobs, "Concurrent sweep points");
  app.add_option("--dump-trace", o.dump_trace, "Write the trace (run only)");
  app.add_option("--warmup-fraction", o.warmup_fraction,
                 "Leading fraction of writes excluded from aggregates");
  app.add_option("--base-rtt-ns", o.base_rtt_ns);
  app.add_option("--miss-penalty-ns", o.miss_penalty_ns);
  app.add_option("--unload-overhead-ns", o.unload_overhead_ns);
  app.add_option("--copy-ns-per-byte", o.copy_ns_per_byte);
  app.add_option("--tlb-penalty-ns", o.tlb_penalty_ns);
}

SweepSpec build_spec(const CliOptions& o, bool sweep) {
  SweepSpec spec;
  if (sweep) {
    if (!o.region_sweep.empty()) {
      spec.region_counts = o.region_sweep;
    } else if (o.regions != 1) {
      spec.region_counts = {o.regions};
    }
  } else {
    spec.region_counts = {o.regions};
  }
  for (uint64_t n : spec.region_counts) {
    if (n == 0) throw ConfigError{"regions must be ≥ 1"};
  }
  if (o.writes == 0) throw ConfigError{"writes must be ≥ 1"};
  if (o.write_size == 0) throw ConfigError{"write-size must be ≥ 1"};
  if (o.write_size > kDefaultRegionSize) {
    throw ConfigError{"write-size must not exceed the 4096-byte region"};
  }
  if (!(o.skew >= 0.0) || !std::isfinite(o.skew)) {
    throw ConfigError{"skew must be ≥ 0"};
  }
  if (o.mtt_capacity == 0) throw ConfigError{"mtt-capacity must be ≥ 1"};
  if (o.slots == 0) throw ConfigError{"slots must be ≥ 1"};
  if (o.jobs == 0) throw ConfigError{"jobs must be ≥ 1"};
  if (!(o.copy_ns_per_byte >= 0.0) || !std::isfinite(o.copy_ns_per_byte)) {
    throw ConfigError{"copy-ns-per-byte must be ≥ 0"};
  }
  if (!(o.warmup_fraction >= 0.0 && o.warmup_fraction < 1.0)) {
    throw ConfigError{"warmup-fraction must lie in [0, 1)"};
  }

  spec.policies.clear();
  if (o.policies.empty()) {
    if (sweep) {
      spec.policies = SweepSpec{}.policies;
    } else {
      spec.policies = {AlwaysOffload{}};
    }
  }
  for (const std::string& text : o.policies) {
    spec.policies.push_back(parse_policy(text));
  }
  if (!sweep && spec.policies.size() != 1) {
    throw ConfigError{"run takes exactly one policy"};
  }

  spec.workload.write_size = o.write_size;
  spec.workload.num_writes = o.writes;
  spec.workload.skew = o.skew;
  spec.workload.seed = o.seed;
  spec.sim.mtt_capacity = o.mtt_capacity;
  spec.sim.num_slots = o.slots;
  spec.sim.warmup_fraction = o.warmup_fraction;
  spec.latency.base_rtt_ns = o.base_rtt_ns;
  spec.latency.mtt_miss_penalty_ns = o.miss_penalty_ns;
  spec.latency.unload_overhead_ns = o.unload_overhead_ns;
  spec.latency.copy_cost_ps_per_byte =
      static_cast<uint64_t>(std::llround(o.copy_ns_per_byte * 1000.0));
  spec.latency.cpu_tlb_penalty_ns = o.tlb_penalty_ns;
  return spec;
}

void dump_trace(const SweepSpec& spec, const std::string& path) {
  WorkloadConfig cfg = spec.workload;
  cfg.num_regions = spec.region_counts.front();
  const RegionLayout layout = build_region_layout(cfg.num_regions);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError{"cannot open " + path};
  write_trace_dump(file, gen_trace(cfg, layout));
  if (!file) throw ConfigError{"failed writing " + path};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Offload/unload RDMA write simulator", "unloadsim"};
  CliOptions opts;
  add_options(app, opts);
  // Options live on the top-level app so the config file stays flat.
  app.add_subcommand("run", "Execute one configuration")->fallthrough();
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Sweep policies over region counts");
  sweep_cmd->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const bool sweep = sweep_cmd->parsed();
  try {
    const SweepSpec spec = build_spec(opts, sweep);
    if (!opts.dump_trace.empty()) {
      if (sweep) throw ConfigError{"--dump-trace applies to run only"};
      dump_trace(spec, opts.dump_trace);
    }
    const std::vector<SweepRow> rows = run_sweep(spec, opts.jobs);
    if (opts.out_path.empty()) {
      write_csv(out, rows);
    } else {
      std::ofstream file(opts.out_path);
      if (!file) throw ConfigError{"cannot open " + opts.out_path};
      write_csv(file, rows);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.message << '\n';
    return kExitConfigError;
  } catch (const SimError& e) {
    err << "error: " << e.what() << '\n';
    return e.is_config_error() ? kExitConfigError : kExitSimFault;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSimFault;
  }
  return kExitOk;
}

}  // namespace unloadsim

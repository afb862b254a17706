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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unloadsim/core_model.hpp"

namespace unloadsim {

struct AlwaysOffload {
  friend bool operator==(const AlwaysOffload&, const AlwaysOffload&) = default;
};

struct AlwaysUnload {
  friend bool operator==(const AlwaysUnload&, const AlwaysUnload&) = default;
};

// Follows the per-request hint. When top_k is set, the runner first
// hints the k most probable regions as Offload and every other region as
// Unload.
struct HintBased {
  std::optional<uint64_t> top_k;

  friend bool operator==(const HintBased&, const HintBased&) = default;
};

inline constexpr uint64_t kDefaultMaxUnloadSize = 4096;

// Unloads small writes whose pages are relatively rare in the history
// seen so far.
struct FrequencyBased {
  double threshold = 0.0;  // relative frequency, [0, 1]
  uint64_t max_unload_size = kDefaultMaxUnloadSize;

  friend bool operator==(const FrequencyBased&, const FrequencyBased&) = default;
};

using Policy = std::variant<AlwaysOffload, AlwaysUnload, HintBased,
                            FrequencyBased>;

// Throws SimError(kInvalidPolicy) on a threshold outside [0, 1] or a zero
// max_unload_size.
FrequencyBased make_frequency_policy(double threshold,
                                     uint64_t max_unload_size =
                                         kDefaultMaxUnloadSize);

// Accepts `offload`, `unload`, `hint`, `hint:K`, `freq:THETA` and
// `freq:THETA:MAXSZ`. Throws SimError(kInvalidPolicy).
Policy parse_policy(std::string_view text);
// Inverse of parse_policy; round-trips exactly.
std::string to_string(const Policy& policy);

bool uses_monitor(const Policy& policy);

enum class Reason : uint8_t {
  kHint,
  kBelowThreshold,
  kAtOrAboveThreshold,
  kTooLarge,
  kPolicyConstant,
};

const char* to_string(Reason reason);

struct Decision {
  Route route = Route::kOffload;
  Reason reason = Reason::kPolicyConstant;

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Exact per-page write counters over a fixed window of pages. One counter
// per page, no decay.
class FreqMonitor {
 public:
  explicit FreqMonitor(PageRange window);
  // Rebuilds a monitor from a counter snapshot; total is the counter sum.
  static FreqMonitor from_counts(PageId first, std::vector<uint64_t> counts);

  // Increments the counter of every page the write touches. Throws
  // SimError(kPageOutOfWindow) without modifying anything if a page falls
  // outside the window.
  void record(VirtualAddress dest, uint64_t length, uint64_t page_size);
  void record(const RdmaWriteRequest& req, uint64_t page_size) {
    record(req.dest, req.length(), page_size);
  }

  uint64_t count(PageId page) const;
  uint64_t total() const { return total_; }
  PageRange window() const { return window_; }
  std::span<const uint64_t> counts() const { return counts_; }

  // Largest counter / total over the given pages; 0 on an empty monitor.
  double max_relative_frequency(PageRange pages) const;

 private:
  PageRange window_;
  std::vector<uint64_t> counts_;
  uint64_t total_ = 0;
};

// Routes one request. For FrequencyBased the monitor must already include
// this request. Cost is O(pages touched) and nothing is allocated.
Decision decide(const RdmaWriteRequest& req, const Policy& policy,
                const FreqMonitor* monitor, uint64_t page_size);

// Relative frequency of the `capacity`-th most written page, so that at
// most `capacity` pages (up to ties) sit at or above it and stay offloaded.
// Returns 0 when every written page fits and kUnloadEverything when
// capacity is 0. Throws SimError(kEmptyHistogram) on an empty monitor.
double compute_threshold(const FreqMonitor& monitor, std::size_t capacity);

// A threshold no relative frequency can reach.
inline constexpr double kUnloadEverything = 1.0 + 1e-9;

// Hints requests aimed at the k most probable regions Offload and all
// others Unload; ties go to the lower region index. Regions are identified
// by stag (region i has stag i, 1-based) and pmf[i - 1] is the probability
// of region i. Throws SimError(kConfigMismatch) for a stag outside the pmf.
void hint_annotate_topk(std::span<RdmaWriteRequest> trace, uint64_t k,
                        std::span<const double> pmf);

}  // namespace unloadsim

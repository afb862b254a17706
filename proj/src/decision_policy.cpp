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

#include "unloadsim/decision_policy.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <numeric>
#include <system_error>

namespace unloadsim {

namespace {

[[noreturn]] void bad_policy(std::string_view text, const std::string& why) {
  throw SimError(ErrorCode::kInvalidPolicy,
                 "invalid policy '" + std::string(text) + "': " + why);
}

template <typename T>
T parse_number(std::string_view field, std::string_view whole) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    bad_policy(whole, "cannot parse '" + std::string(field) + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

FrequencyBased make_frequency_policy(double threshold,
                                     uint64_t max_unload_size) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw SimError(ErrorCode::kInvalidPolicy,
                   "frequency threshold must lie in [0, 1]");
  }
  if (max_unload_size == 0) {
    throw SimError(ErrorCode::kInvalidPolicy, "max_unload_size must be >= 1");
  }
  return FrequencyBased{threshold, max_unload_size};
}

Policy parse_policy(std::string_view text) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    fields.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  const std::string_view kind = fields[0];
  if (kind == "offload" && fields.size() == 1) return AlwaysOffload{};
  if (kind == "unload" && fields.size() == 1) return AlwaysUnload{};
  if (kind == "hint") {
    if (fields.size() == 1) return HintBased{};
    if (fields.size() == 2) {
      return HintBased{parse_number<uint64_t>(fields[1], text)};
    }
  }
  if (kind == "freq" && (fields.size() == 2 || fields.size() == 3)) {
    const double theta = parse_number<double>(fields[1], text);
    const uint64_t max_size = fields.size() == 3
                                  ? parse_number<uint64_t>(fields[2], text)
                                  : kDefaultMaxUnloadSize;
    try {
      return make_frequency_policy(theta, max_size);
    } catch (const SimError& e) {
      bad_policy(text, e.what());
    }
  }
  bad_policy(text, "expected offload, unload, hint:K or freq:THETA[:MAXSZ]");
}

std::string to_string(const Policy& policy) {
  struct Visitor {
    std::string operator()(const AlwaysOffload&) const { return "offload"; }
    std::string operator()(const AlwaysUnload&) const { return "unload"; }
    std::string operator()(const HintBased& p) const {
      return p.top_k ? "hint:" + std::to_string(*p.top_k) : "hint";
    }
    std::string operator()(const FrequencyBased& p) const {
      std::string out = "freq:" + format_double(p.threshold);
      if (p.max_unload_size != kDefaultMaxUnloadSize) {
        out += ":" + std::to_string(p.max_unload_size);
      }
      return out;
    }
  };
  return std::visit(Visitor{}, policy);
}

bool uses_monitor(const Policy& policy) {
  return std::holds_alternative<FrequencyBased>(policy);
}

const char* to_string(Reason reason) {
  switch (reason) {
    case Reason::kHint: return "Hint";
    case Reason::kBelowThreshold: return "BelowThreshold";
    case Reason::kAtOrAboveThreshold: return "AtOrAboveThreshold";
    case Reason::kTooLarge: return "TooLarge";
    case Reason::kPolicyConstant: return "PolicyConstant";
  }
  return "Unknown";
}

FreqMonitor::FreqMonitor(PageRange window)
    : window_(window), counts_(window.count, 0) {}

FreqMonitor FreqMonitor::from_counts(PageId first,
                                     std::vector<uint64_t> counts) {
  FreqMonitor mon(PageRange{first, counts.size()});
  mon.total_ = std::accumulate(counts.begin(), counts.end(), uint64_t{0});
  mon.counts_ = std::move(counts);
  return mon;
}

void FreqMonitor::record(VirtualAddress dest, uint64_t length,
                         uint64_t page_size) {
  const PageRange pages = page_span(dest, length, page_size);
  if (pages.first < window_.first ||
      pages.last().value - window_.first.value >= window_.count) {
    throw SimError(ErrorCode::kPageOutOfWindow,
                   "write touches pages outside the monitored window");
  }
  const uint64_t offset = pages.first.value - window_.first.value;
  for (uint64_t i = 0; i < pages.count; ++i) ++counts_[offset + i];
  total_ += pages.count;
}

uint64_t FreqMonitor::count(PageId page) const {
  if (page < window_.first || page.value - window_.first.value >= window_.count)
    return 0;
  return counts_[page.value - window_.first.value];
}

double FreqMonitor::max_relative_frequency(PageRange pages) const {
  if (total_ == 0) return 0.0;
  uint64_t best = 0;
  for (uint64_t i = 0; i < pages.count; ++i) {
    best = std::max(best, count(PageId{pages.first.value + i}));
  }
  return static_cast<double>(best) / static_cast<double>(total_);
}

Decision decide(const RdmaWriteRequest& req, const Policy& policy,
                const FreqMonitor* monitor, uint64_t page_size) {
  struct Visitor {
    const RdmaWriteRequest& req;
    const FreqMonitor* monitor;
    uint64_t page_size;

    Decision operator()(const AlwaysOffload&) const {
      return {Route::kOffload, Reason::kPolicyConstant};
    }
    Decision operator()(const AlwaysUnload&) const {
      return {Route::kUnload, Reason::kPolicyConstant};
    }
    Decision operator()(const HintBased&) const {
      return {req.hint.value_or(Route::kOffload), Reason::kHint};
    }
    Decision operator()(const FrequencyBased& p) const {
      if (req.length() > p.max_unload_size) {
        return {Route::kOffload, Reason::kTooLarge};
      }
      if (monitor == nullptr) {
        throw SimError(ErrorCode::kInvalidPolicy,
                       "frequency policy needs a monitor");
      }
      const double r = monitor->max_relative_frequency(
          page_span(req.dest, req.length(), page_size));
      if (r < p.threshold) return {Route::kUnload, Reason::kBelowThreshold};
      return {Route::kOffload, Reason::kAtOrAboveThreshold};
    }
  };
  return std::visit(Visitor{req, monitor, page_size}, policy);
}

double compute_threshold(const FreqMonitor& monitor, std::size_t capacity) {
  if (monitor.total() == 0) {
    throw SimError(ErrorCode::kEmptyHistogram, "no page has been recorded");
  }
  if (capacity == 0) return kUnloadEverything;
  std::vector<uint64_t> nonzero;
  for (uint64_t c : monitor.counts()) {
    if (c != 0) nonzero.push_back(c);
  }
  if (capacity >= nonzero.size()) return 0.0;
  auto kth = nonzero.begin() + static_cast<std::ptrdiff_t>(capacity - 1);
  std::nth_element(nonzero.begin(), kth, nonzero.end(), std::greater<>());
  return static_cast<double>(*kth) / static_cast<double>(monitor.total());
}

void hint_annotate_topk(std::span<RdmaWriteRequest> trace, uint64_t k,
                        std::span<const double> pmf) {
  std::vector<uint32_t> order(pmf.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return pmf[a] > pmf[b];
  });
  std::vector<bool> offload(pmf.size(), false);
  const uint64_t keep = std::min<uint64_t>(k, pmf.size());
  for (uint64_t i = 0; i < keep; ++i) offload[order[i]] = true;

  for (RdmaWriteRequest& req : trace) {
    if (req.stag == 0 || req.stag > pmf.size()) {
      throw SimError(ErrorCode::kConfigMismatch,
                     "stag " + std::to_string(req.stag) +
                         " has no entry in the region pmf");
    }
    req.hint = offload[req.stag - 1] ? Route::kOffload : Route::kUnload;
  }
}

}  // namespace unloadsim

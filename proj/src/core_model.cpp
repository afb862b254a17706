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

#include "unloadsim/core_model.hpp"

#include <bit>
#include <limits>

namespace unloadsim {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidLayout: return "InvalidLayout";
    case ErrorCode::kAddressOverflow: return "AddressOverflow";
    case ErrorCode::kDuplicateStag: return "DuplicateStag";
    case ErrorCode::kUnknownStag: return "UnknownStag";
    case ErrorCode::kPayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kPageOutOfWindow: return "PageOutOfWindow";
    case ErrorCode::kInvalidPolicy: return "InvalidPolicy";
    case ErrorCode::kEmptyHistogram: return "EmptyHistogram";
    case ErrorCode::kInvalidSupport: return "InvalidSupport";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kTraceFormat: return "TraceFormat";
  }
  return "Unknown";
}

bool SimError::is_config_error() const noexcept {
  switch (code_) {
    case ErrorCode::kInvalidLayout:
    case ErrorCode::kInvalidPolicy:
    case ErrorCode::kInvalidSupport:
    case ErrorCode::kConfigMismatch:
    case ErrorCode::kPayloadTooLarge:
      return true;
    default:
      return false;
  }
}

const char* to_string(Route route) {
  return route == Route::kOffload ? "offload" : "unload";
}

VirtualAddress RegionLayout::base(uint64_t index) const {
  return VirtualAddress{origin_ + (index - 1) * stride_};
}

MemoryRegionDesc RegionLayout::region(uint64_t index) const {
  return MemoryRegionDesc{stag(index), base(index), region_size_,
                          Access::kRemoteWrite};
}

VirtualAddress RegionLayout::end() const {
  return VirtualAddress{base(num_regions_).value + region_size_};
}

PageRange RegionLayout::page_window() const {
  return page_span(origin(), end().value - origin_, page_size_);
}

RegionLayout build_region_layout(uint64_t num_regions, uint64_t region_size,
                                 uint64_t page_size, uint64_t stride,
                                 uint64_t origin) {
  auto fail = [](const std::string& why) {
    throw SimError(ErrorCode::kInvalidLayout, "invalid layout: " + why);
  };
  if (num_regions == 0) fail("num_regions must be >= 1");
  if (num_regions > std::numeric_limits<uint32_t>::max())
    fail("num_regions exceeds the 32-bit stag space");
  if (region_size == 0 || region_size % 8 != 0)
    fail("region_size must be a positive multiple of 8");
  if (!std::has_single_bit(page_size)) fail("page_size must be a power of two");
  if (stride < region_size) fail("stride must be >= region_size");

  constexpr uint64_t kMax = std::numeric_limits<uint64_t>::max();
  const uint64_t span_regions = num_regions - 1;
  if (span_regions != 0 && stride > (kMax - origin) / span_regions)
    fail("layout exceeds the address space");
  const uint64_t last_base = origin + span_regions * stride;
  if (region_size > kMax - last_base) fail("layout exceeds the address space");

  RegionLayout layout;
  layout.num_regions_ = num_regions;
  layout.region_size_ = region_size;
  layout.page_size_ = page_size;
  layout.stride_ = stride;
  layout.origin_ = origin;
  return layout;
}

PageRange page_span(VirtualAddress dest, uint64_t length, uint64_t page_size) {
  if (length == 0) {
    throw SimError(ErrorCode::kAddressOverflow, "empty address range");
  }
  if (length > std::numeric_limits<uint64_t>::max() - dest.value) {
    throw SimError(ErrorCode::kAddressOverflow,
                   "address range wraps the 64-bit space");
  }
  const uint64_t first = dest.value / page_size;
  const uint64_t last = (dest.value + (length - 1)) / page_size;
  return PageRange{PageId{first}, last - first + 1};
}

std::vector<PageId> addr_to_pages(VirtualAddress dest, uint64_t length,
                                  uint64_t page_size) {
  const PageRange range = page_span(dest, length, page_size);
  std::vector<PageId> pages;
  pages.reserve(range.count);
  for (uint64_t i = 0; i < range.count; ++i) {
    pages.push_back(PageId{range.first.value + i});
  }
  return pages;
}

}  // namespace unloadsim

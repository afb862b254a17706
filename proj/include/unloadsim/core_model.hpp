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

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace unloadsim {

enum class ErrorCode {
  kInvalidLayout,
  kAddressOverflow,
  kDuplicateStag,
  kUnknownStag,
  kPayloadTooLarge,
  kMalformedRecord,
  kPageOutOfWindow,
  kInvalidPolicy,
  kEmptyHistogram,
  kInvalidSupport,
  kConfigMismatch,
  kTraceFormat,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Errors that stem from user-supplied configuration rather than from
  // a fault during execution.
  bool is_config_error() const noexcept;

 private:
  ErrorCode code_;
};

struct VirtualAddress {
  uint64_t value = 0;

  friend constexpr auto operator<=>(VirtualAddress, VirtualAddress) = default;
};

struct PageId {
  uint64_t value = 0;

  friend constexpr auto operator<=>(PageId, PageId) = default;
};

// Half-open run of consecutive pages [first, first + count).
struct PageRange {
  PageId first;
  uint64_t count = 0;

  PageId last() const { return PageId{first.value + count - 1}; }
};

enum class Access : uint8_t { kNone = 0, kRemoteWrite = 1 };

struct MemoryRegionDesc {
  uint32_t stag = 0;
  VirtualAddress base;
  uint64_t length = 0;
  Access access = Access::kRemoteWrite;

  bool remote_write() const { return access == Access::kRemoteWrite; }
};

inline constexpr uint64_t kDefaultRegionSize = 4096;
inline constexpr uint64_t kDefaultPageSize = 4096;
// Address 0 is never part of a region.
inline constexpr uint64_t kDefaultOrigin = 4096;

// N equally sized regions, placed `stride` bytes apart starting at
// `origin`. Region indices are 1-based and region i is registered
// under stag i.
class RegionLayout {
 public:
  uint64_t num_regions() const { return num_regions_; }
  uint64_t region_size() const { return region_size_; }
  uint64_t page_size() const { return page_size_; }
  uint64_t stride() const { return stride_; }
  VirtualAddress origin() const { return VirtualAddress{origin_}; }

  VirtualAddress base(uint64_t index) const;
  uint32_t stag(uint64_t index) const { return static_cast<uint32_t>(index); }
  MemoryRegionDesc region(uint64_t index) const;

  // One past the last byte of the last region.
  VirtualAddress end() const;

  // Pages from the first region's first page to the last region's last
  // page, inclusive of the gaps between regions.
  PageRange page_window() const;

 private:
  friend RegionLayout build_region_layout(uint64_t, uint64_t, uint64_t,
                                          uint64_t, uint64_t);

  uint64_t num_regions_ = 0;
  uint64_t region_size_ = 0;
  uint64_t page_size_ = 0;
  uint64_t stride_ = 0;
  uint64_t origin_ = 0;
};

// Throws SimError(kInvalidLayout) for an empty layout, overlapping
// regions, a region size that is not a multiple of 8, a page size that is
// not a power of two, more regions than 32-bit stags can name, or a layout
// that does not fit in the 64-bit address space.
RegionLayout build_region_layout(uint64_t num_regions,
                                 uint64_t region_size = kDefaultRegionSize,
                                 uint64_t page_size = kDefaultPageSize,
                                 uint64_t stride = 2 * kDefaultRegionSize,
                                 uint64_t origin = kDefaultOrigin);

inline PageId page_of(VirtualAddress addr, uint64_t page_size) {
  return PageId{addr.value / page_size};
}

// Pages overlapped by [dest, dest + length). Throws kAddressOverflow if
// the range wraps the address space.
PageRange page_span(VirtualAddress dest, uint64_t length, uint64_t page_size);
std::vector<PageId> addr_to_pages(VirtualAddress dest, uint64_t length,
                                  uint64_t page_size);

enum class Route : uint8_t { kOffload, kUnload };

const char* to_string(Route route);

struct RdmaWriteRequest {
  uint64_t seq = 0;
  VirtualAddress dest;
  uint32_t stag = 0;
  std::vector<uint8_t> payload;
  std::optional<Route> hint;

  uint64_t length() const { return payload.size(); }
};

enum class CompletionKind : uint8_t {
  kOffloadDone,
  kUnloadImmReceived,
  kUnloadCopyDone,
  kSecurityReject,
};

struct CompletionEvent {
  CompletionKind kind = CompletionKind::kOffloadDone;
  uint64_t seq = 0;
  uint64_t byte_length = 0;
  std::optional<uint32_t> immediate;
  uint64_t timestamp_ns = 0;
};

}  // namespace unloadsim

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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "unloadsim/core_model.hpp"

namespace unloadsim {

// ---------------------------------------------------------------------------
// uMTT: software copy of the region registrations, consulted by the target
// CPU before it copies an unloaded write to its destination.
// ---------------------------------------------------------------------------

class UmttMap {
 public:
  // Throws SimError(kDuplicateStag).
  void register_region(const MemoryRegionDesc& region);
  // Throws SimError(kUnknownStag).
  void deregister(uint32_t stag);

  const MemoryRegionDesc* find(uint32_t stag) const;
  std::size_t size() const { return regions_.size(); }

 private:
  std::unordered_map<uint32_t, MemoryRegionDesc> regions_;
};

enum class Verdict : uint8_t {
  kOk,
  kUnknownStag,
  kPermissionDenied,
  kOutOfBounds,
};

const char* to_string(Verdict verdict);

// Checks, in order: stag registered, remote-write permission, and
// [dest, dest + length) inside the region. A range that wraps the address
// space is out of bounds.
Verdict validate(VirtualAddress dest, uint64_t length, uint32_t stag,
                 const UmttMap& umtt);

// ---------------------------------------------------------------------------
// Emulated target memory.
// ---------------------------------------------------------------------------

// Sparse byte store over the 64-bit address space. Storage is allocated in
// 64-byte chunks on first write; unwritten bytes read as zero.
class TargetMemory {
 public:
  static constexpr uint64_t kChunkSize = 64;

  void write(VirtualAddress dest, std::span<const uint8_t> bytes);
  std::vector<uint8_t> read(VirtualAddress src, uint64_t length) const;
  uint8_t byte_at(VirtualAddress addr) const;

  // Order-independent 64-bit checksum over every (address, byte) pair with
  // a nonzero byte. Two memories with equal contents have equal digests
  // regardless of write history.
  uint64_t digest() const;

  std::size_t allocated_chunks() const { return chunks_.size(); }

 private:
  using Chunk = std::array<uint8_t, kChunkSize>;
  std::unordered_map<uint64_t, Chunk> chunks_;
};

// Digest contribution of a single nonzero byte. Exposed so replay oracles
// can build the same checksum from an independent byte map.
uint64_t digest_term(uint64_t address, uint8_t byte);

// ---------------------------------------------------------------------------
// Temporary buffer and the writeImm slot format.
// ---------------------------------------------------------------------------

// Slot header: the destination address, big-endian.
inline constexpr uint64_t kSlotHeaderSize = 8;
inline constexpr std::size_t kDefaultSlotCount = 128;
inline constexpr uint64_t kDefaultSlotSize = 4096 + kSlotHeaderSize;

// What arrives at the target for one unloaded write: the slot contents
// (header + payload), the stag carried as the immediate, and the length
// reported by the receive completion.
struct WriteImmRecord {
  std::size_t slot_index = 0;
  std::vector<uint8_t> bytes;
  uint32_t immediate = 0;
  uint64_t total_length = 0;
  uint64_t seq = 0;
};

void store_be64(uint64_t value, std::span<uint8_t, 8> out);
uint64_t load_be64(std::span<const uint8_t, 8> in);

// Throws SimError(kPayloadTooLarge) if header + payload exceeds slot_size.
WriteImmRecord encode_unloaded(const RdmaWriteRequest& req,
                               std::size_t slot_index,
                               uint64_t slot_size = kDefaultSlotSize);

// Per-queue-pair ring of slots in target memory. The initiator side owns
// the cursor and credit count; the target side owns slot contents and
// occupancy. Both live here because the simulation runs them on one
// timeline.
class TempBuffer {
 public:
  // num_slots >= 1, slot_size > kSlotHeaderSize.
  explicit TempBuffer(std::size_t num_slots = kDefaultSlotCount,
                      uint64_t slot_size = kDefaultSlotSize);

  std::size_t num_slots() const { return occupied_.size(); }
  uint64_t slot_size() const { return slot_size_; }
  std::size_t next_slot() const { return next_slot_; }
  std::size_t free_credits() const { return free_credits_; }
  std::size_t occupied_slots() const;
  bool occupied(std::size_t slot) const { return occupied_.at(slot); }
  std::span<const uint8_t> slot_bytes(std::size_t slot) const;

  // Initiator side: take one credit and return the slot to write into,
  // advancing the cursor. Empty when no credit is left.
  std::optional<std::size_t> claim_slot();
  // Target side: the writeImm lands in `rec.slot_index`.
  void deposit(const WriteImmRecord& rec);
  // Target side: the copy finished, the slot and its credit come back.
  void release(std::size_t slot);

 private:
  uint64_t slot_size_;
  std::vector<uint8_t> storage_;
  std::vector<bool> occupied_;
  std::size_t next_slot_ = 0;
  std::size_t free_credits_;
};

struct FallbackOffload {};

using PostOutcome = std::variant<WriteImmRecord, FallbackOffload>;

// Initiator side: rewrite `req` as a writeImm into the next slot and
// deliver it. With no credits left the buffer is untouched and the caller
// must take the offload path. Throws SimError(kPayloadTooLarge) if the
// payload can never fit a slot.
PostOutcome initiator_post_unloaded(const RdmaWriteRequest& req,
                                    TempBuffer& buf);

struct ApplyOutcome {
  Verdict verdict = Verdict::kOk;
  VirtualAddress dest;
  uint64_t length = 0;

  bool applied() const { return verdict == Verdict::kOk; }
};

// Target side: decode the slot named by `rec`, validate against the uMTT,
// copy on success, and release the slot either way. Throws
// SimError(kMalformedRecord) if the record cannot hold a header plus one
// payload byte or exceeds the slot.
ApplyOutcome target_apply_unloaded(const WriteImmRecord& rec,
                                   const UmttMap& umtt, TargetMemory& mem,
                                   TempBuffer& buf);

// Offload path: the RNIC writes the payload directly.
void target_apply_offloaded(const RdmaWriteRequest& req, TargetMemory& mem);

}  // namespace unloadsim

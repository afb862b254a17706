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

#include "unloadsim/unload_protocol.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace unloadsim {

void UmttMap::register_region(const MemoryRegionDesc& region) {
  if (region.length == 0) {
    throw std::invalid_argument("memory region length must be > 0");
  }
  if (!regions_.emplace(region.stag, region).second) {
    throw SimError(ErrorCode::kDuplicateStag,
                   "stag " + std::to_string(region.stag) + " already registered");
  }
}

void UmttMap::deregister(uint32_t stag) {
  if (regions_.erase(stag) == 0) {
    throw SimError(ErrorCode::kUnknownStag,
                   "stag " + std::to_string(stag) + " is not registered");
  }
}

const MemoryRegionDesc* UmttMap::find(uint32_t stag) const {
  auto it = regions_.find(stag);
  return it == regions_.end() ? nullptr : &it->second;
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kOk: return "Ok";
    case Verdict::kUnknownStag: return "UnknownStag";
    case Verdict::kPermissionDenied: return "PermissionDenied";
    case Verdict::kOutOfBounds: return "OutOfBounds";
  }
  return "Unknown";
}

Verdict validate(VirtualAddress dest, uint64_t length, uint32_t stag,
                 const UmttMap& umtt) {
  const MemoryRegionDesc* region = umtt.find(stag);
  if (region == nullptr) return Verdict::kUnknownStag;
  if (!region->remote_write()) return Verdict::kPermissionDenied;
  // Written without dest + length so that nothing can wrap.
  if (dest.value < region->base.value) return Verdict::kOutOfBounds;
  const uint64_t offset = dest.value - region->base.value;
  if (offset > region->length || length > region->length - offset) {
    return Verdict::kOutOfBounds;
  }
  return Verdict::kOk;
}

namespace {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t digest_term(uint64_t address, uint8_t byte) {
  return mix64(mix64(address) ^ byte);
}

void TargetMemory::write(VirtualAddress dest, std::span<const uint8_t> bytes) {
  if (bytes.empty()) return;
  if (bytes.size() - 1 > std::numeric_limits<uint64_t>::max() - dest.value) {
    throw SimError(ErrorCode::kAddressOverflow, "write wraps the address space");
  }
  uint64_t addr = dest.value;
  std::size_t done = 0;
  while (done < bytes.size()) {
    const uint64_t offset = addr % kChunkSize;
    const std::size_t n = std::min<std::size_t>(kChunkSize - offset,
                                                bytes.size() - done);
    auto [it, inserted] = chunks_.try_emplace(addr / kChunkSize);
    if (inserted) it->second.fill(0);
    std::copy_n(bytes.begin() + done, n, it->second.begin() + offset);
    done += n;
    addr += n;
  }
}

uint8_t TargetMemory::byte_at(VirtualAddress addr) const {
  auto it = chunks_.find(addr.value / kChunkSize);
  return it == chunks_.end() ? 0 : it->second[addr.value % kChunkSize];
}

std::vector<uint8_t> TargetMemory::read(VirtualAddress src,
                                        uint64_t length) const {
  std::vector<uint8_t> out(length);
  for (uint64_t i = 0; i < length; ++i) {
    out[i] = byte_at(VirtualAddress{src.value + i});
  }
  return out;
}

uint64_t TargetMemory::digest() const {
  uint64_t sum = 0;
  for (const auto& [chunk, bytes] : chunks_) {
    for (uint64_t i = 0; i < kChunkSize; ++i) {
      if (bytes[i] != 0) sum += digest_term(chunk * kChunkSize + i, bytes[i]);
    }
  }
  return sum;
}

void store_be64(uint64_t value, std::span<uint8_t, 8> out) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<uint8_t>(value & 0xff);
    value >>= 8;
  }
}

uint64_t load_be64(std::span<const uint8_t, 8> in) {
  uint64_t value = 0;
  for (uint8_t b : in) value = (value << 8) | b;
  return value;
}

WriteImmRecord encode_unloaded(const RdmaWriteRequest& req,
                               std::size_t slot_index, uint64_t slot_size) {
  if (slot_size < kSlotHeaderSize ||
      req.payload.size() > slot_size - kSlotHeaderSize) {
    throw SimError(ErrorCode::kPayloadTooLarge,
                   "payload of " + std::to_string(req.payload.size()) +
                       " bytes does not fit a " + std::to_string(slot_size) +
                       "-byte slot");
  }
  WriteImmRecord rec;
  rec.slot_index = slot_index;
  rec.bytes.resize(kSlotHeaderSize + req.payload.size());
  store_be64(req.dest.value, std::span<uint8_t, 8>(rec.bytes.data(), 8));
  std::copy(req.payload.begin(), req.payload.end(),
            rec.bytes.begin() + kSlotHeaderSize);
  rec.immediate = req.stag;
  rec.total_length = rec.bytes.size();
  rec.seq = req.seq;
  return rec;
}

TempBuffer::TempBuffer(std::size_t num_slots, uint64_t slot_size)
    : slot_size_(slot_size), free_credits_(num_slots) {
  if (num_slots == 0) throw std::invalid_argument("need at least one slot");
  if (slot_size <= kSlotHeaderSize) {
    throw std::invalid_argument("slot must hold a header and payload");
  }
  storage_.assign(num_slots * slot_size, 0);
  occupied_.assign(num_slots, false);
}

std::size_t TempBuffer::occupied_slots() const {
  return static_cast<std::size_t>(
      std::count(occupied_.begin(), occupied_.end(), true));
}

std::span<const uint8_t> TempBuffer::slot_bytes(std::size_t slot) const {
  return std::span<const uint8_t>(storage_).subspan(slot * slot_size_,
                                                    slot_size_);
}

std::optional<std::size_t> TempBuffer::claim_slot() {
  if (free_credits_ == 0) return std::nullopt;
  const std::size_t slot = next_slot_;
  --free_credits_;
  next_slot_ = (next_slot_ + 1) % occupied_.size();
  return slot;
}

void TempBuffer::deposit(const WriteImmRecord& rec) {
  if (rec.slot_index >= occupied_.size() || occupied_[rec.slot_index]) {
    throw std::logic_error("writeImm targets an occupied or missing slot");
  }
  if (rec.bytes.size() > slot_size_) {
    throw SimError(ErrorCode::kPayloadTooLarge, "record exceeds slot size");
  }
  std::copy(rec.bytes.begin(), rec.bytes.end(),
            storage_.begin() + rec.slot_index * slot_size_);
  occupied_[rec.slot_index] = true;
}

void TempBuffer::release(std::size_t slot) {
  if (!occupied_.at(slot)) throw std::logic_error("releasing a free slot");
  occupied_[slot] = false;
  ++free_credits_;
}

PostOutcome initiator_post_unloaded(const RdmaWriteRequest& req,
                                    TempBuffer& buf) {
  if (req.payload.size() > buf.slot_size() - kSlotHeaderSize) {
    throw SimError(ErrorCode::kPayloadTooLarge,
                   "payload does not fit a temporary-buffer slot");
  }
  const std::optional<std::size_t> slot = buf.claim_slot();
  if (!slot) return FallbackOffload{};
  WriteImmRecord rec = encode_unloaded(req, *slot, buf.slot_size());
  buf.deposit(rec);
  return rec;
}

ApplyOutcome target_apply_unloaded(const WriteImmRecord& rec,
                                   const UmttMap& umtt, TargetMemory& mem,
                                   TempBuffer& buf) {
  if (rec.total_length < kSlotHeaderSize + 1) {
    throw SimError(ErrorCode::kMalformedRecord,
                   "writeImm of " + std::to_string(rec.total_length) +
                       " bytes carries no payload");
  }
  if (rec.slot_index >= buf.num_slots() || rec.total_length > buf.slot_size()) {
    throw SimError(ErrorCode::kMalformedRecord,
                   "writeImm does not describe a valid slot");
  }
  const std::span<const uint8_t> slot = buf.slot_bytes(rec.slot_index);
  ApplyOutcome out;
  out.dest = VirtualAddress{load_be64(slot.first<8>())};
  out.length = rec.total_length - kSlotHeaderSize;
  out.verdict = validate(out.dest, out.length, rec.immediate, umtt);
  if (out.applied()) {
    mem.write(out.dest, slot.subspan(kSlotHeaderSize, out.length));
  }
  buf.release(rec.slot_index);
  return out;
}

void target_apply_offloaded(const RdmaWriteRequest& req, TargetMemory& mem) {
  mem.write(req.dest, req.payload);
}

}  // namespace unloadsim

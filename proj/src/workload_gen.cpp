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

#include "unloadsim/workload_gen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace unloadsim {

SplitMix64::SplitMix64(uint64_t seed, uint64_t stream) : state_(seed) {
  if (stream != 0) {
    SplitMix64 mixer(stream);
    state_ ^= mixer.next();
  }
}

uint64_t SplitMix64::next() {
  uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::next_double() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

uint64_t SplitMix64::next_below(uint64_t bound) {
  // Lemire's multiply-shift with rejection.
  __uint128_t m = static_cast<__uint128_t>(next()) * bound;
  uint64_t low = static_cast<uint64_t>(m);
  if (low < bound) {
    const uint64_t floor = -bound % bound;
    while (low < floor) {
      m = static_cast<__uint128_t>(next()) * bound;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

ZipfDist::ZipfDist(uint64_t n, double s) : skew_(s) {
  if (n == 0) throw SimError(ErrorCode::kInvalidSupport, "zipf needs n >= 1");
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw SimError(ErrorCode::kInvalidSupport, "zipf skew must be >= 0");
  }
  pmf_.resize(n);
  // Neumaier summation keeps the normalization error near one ulp even for
  // n = 2^20.
  double sum = 0.0;
  double carry = 0.0;
  for (uint64_t i = 0; i < n; ++i) {
    const double w = std::pow(static_cast<double>(i + 1), -s);
    pmf_[i] = w;
    const double t = sum + w;
    carry += std::abs(sum) >= w ? (sum - t) + w : (w - t) + sum;
    sum = t;
  }
  const double norm = sum + carry;
  for (double& p : pmf_) p /= norm;

  cdf_.resize(n);
  sum = 0.0;
  carry = 0.0;
  for (uint64_t i = 0; i < n; ++i) {
    const double t = sum + pmf_[i];
    carry += std::abs(sum) >= pmf_[i] ? (sum - t) + pmf_[i] : (pmf_[i] - t) + sum;
    sum = t;
    cdf_[i] = sum + carry;
  }
  cdf_.back() = 1.0;
}

uint64_t ZipfDist::sample(SplitMix64& rng) const {
  const double u = rng.next_double();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<uint64_t>(it - cdf_.begin()) + 1;
}

std::vector<uint8_t> payload_for(uint64_t seq, uint64_t size) {
  std::vector<uint8_t> out(size);
  for (uint64_t i = 0; i < size; ++i) {
    out[i] = static_cast<uint8_t>(seq >> (8 * (7 - i % 8)));
  }
  return out;
}

std::vector<RdmaWriteRequest> gen_trace(const WorkloadConfig& cfg,
                                        const RegionLayout& layout) {
  if (layout.num_regions() != cfg.num_regions) {
    throw SimError(ErrorCode::kConfigMismatch,
                   "layout has " + std::to_string(layout.num_regions()) +
                       " regions but the workload asks for " +
                       std::to_string(cfg.num_regions));
  }
  if (cfg.write_size == 0 || cfg.write_size > layout.region_size()) {
    throw SimError(ErrorCode::kConfigMismatch,
                   "write size must be in [1, region_size]");
  }
  const ZipfDist dist(cfg.num_regions, cfg.skew);
  SplitMix64 rng(cfg.seed);

  std::vector<RdmaWriteRequest> trace;
  trace.reserve(cfg.num_writes);
  for (uint64_t seq = 0; seq < cfg.num_writes; ++seq) {
    const uint64_t region = dist.sample(rng);
    RdmaWriteRequest req;
    req.seq = seq;
    req.dest = layout.base(region);
    req.stag = layout.stag(region);
    req.payload = payload_for(seq, cfg.write_size);
    trace.push_back(std::move(req));
  }
  return trace;
}

namespace {

template <typename T>
void put_be(std::ostream& out, T value) {
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[sizeof(T) - 1 - i] = static_cast<char>(value & 0xff);
    value >>= 8;
  }
  out.write(buf, sizeof(T));
}

template <typename T>
bool get_be(std::istream& in, T& value) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
  value = 0;
  for (unsigned char b : buf) value = static_cast<T>((value << 8) | b);
  return true;
}

}  // namespace

void write_trace_dump(std::ostream& out,
                      std::span<const RdmaWriteRequest> trace) {
  for (const RdmaWriteRequest& req : trace) {
    put_be<uint64_t>(out, req.seq);
    put_be<uint64_t>(out, req.dest.value);
    put_be<uint32_t>(out, req.stag);
    put_be<uint32_t>(out, static_cast<uint32_t>(req.payload.size()));
    out.write(reinterpret_cast<const char*>(req.payload.data()),
              static_cast<std::streamsize>(req.payload.size()));
  }
}

std::vector<RdmaWriteRequest> read_trace_dump(std::istream& in) {
  std::vector<RdmaWriteRequest> trace;
  while (in.peek() != std::char_traits<char>::eof()) {
    RdmaWriteRequest req;
    uint32_t length = 0;
    if (!get_be(in, req.seq) || !get_be(in, req.dest.value) ||
        !get_be(in, req.stag) || !get_be(in, length)) {
      throw SimError(ErrorCode::kTraceFormat, "truncated trace record header");
    }
    req.payload.resize(length);
    if (!in.read(reinterpret_cast<char*>(req.payload.data()), length)) {
      throw SimError(ErrorCode::kTraceFormat, "truncated trace payload");
    }
    trace.push_back(std::move(req));
  }
  return trace;
}

}  // namespace unloadsim

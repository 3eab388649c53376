/*
 * Copyright 2026 The hdseize authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "hdseize/error.hpp"
#include "hdseize/hypervector.hpp"
#include "hdseize/seeds.hpp"

namespace hdseize {

enum class MemoryPurpose : uint8_t {
  kChannel = 0,
  kFeature = 1,
  kFrequency = 2,
  kLbpCode = 3,
  kValue = 4,
};

inline const char* to_string(MemoryPurpose p) {
  switch (p) {
    case MemoryPurpose::kChannel: return "channel";
    case MemoryPurpose::kFeature: return "feature";
    case MemoryPurpose::kFrequency: return "frequency";
    case MemoryPurpose::kLbpCode: return "lbp-code";
    case MemoryPurpose::kValue: return "value";
  }
  return "unknown";
}

/// Closed interval on the pre-quantization scale.
struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Clamp `value` to the range and map it onto one of `levels` equal bins;
/// value == hi maps to the top level.
inline uint32_t quantize(double value, ValueRange range, uint32_t levels) {
  if (levels < 2) throw config_error("quantize: need at least 2 levels");
  if (!(range.lo < range.hi))
    throw config_error("quantize: degenerate value range [" +
                       std::to_string(range.lo) + ", " +
                       std::to_string(range.hi) + "]");
  if (std::isnan(value)) throw data_error("quantize: NaN value");
  double v = value;
  if (v < range.lo) v = range.lo;
  if (v > range.hi) v = range.hi;
  const double t = (v - range.lo) / (range.hi - range.lo);
  auto idx = static_cast<uint32_t>(t * levels);
  return idx >= levels ? levels - 1 : idx;
}

/// Immutable map from a symbol index (channel, feature, frequency bin, LBP
/// code) to an independently drawn random hypervector. All entries are
/// near-orthogonal with overwhelming probability.
class RandomItemMemory {
public:
  RandomItemMemory(uint32_t count, uint32_t dim, uint64_t seed,
                   MemoryPurpose purpose)
      : purpose_(purpose), seed_(seed) {
    if (count == 0) throw config_error("item memory: count must be positive");
    entries_.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
      entries_.push_back(
          random_hv(dim, derive_seed(seed, to_string(purpose), i)));
  }

  static RandomItemMemory from_rows(std::vector<Hypervector> rows,
                                    MemoryPurpose purpose, uint64_t seed) {
    if (rows.empty()) throw config_error("item memory: count must be positive");
    return RandomItemMemory(std::move(rows), purpose, seed);
  }

  uint32_t size() const { return static_cast<uint32_t>(entries_.size()); }
  uint32_t dim() const { return entries_.front().dim(); }
  MemoryPurpose purpose() const { return purpose_; }
  uint64_t seed() const { return seed_; }

  const Hypervector& at(uint32_t i) const {
    if (i >= entries_.size())
      throw config_error("item memory: index " + std::to_string(i) +
                         " out of range (size " +
                         std::to_string(entries_.size()) + ")");
    return entries_[i];
  }

  /// Every pairwise normalized distance inside [lo, hi].
  bool near_orthogonal(double lo = 0.45, double hi = 0.55) const {
    for (size_t i = 0; i < entries_.size(); ++i)
      for (size_t j = i + 1; j < entries_.size(); ++j) {
        const double d = hamming(entries_[i], entries_[j]);
        if (d < lo || d > hi) return false;
      }
    return true;
  }

private:
  RandomItemMemory(std::vector<Hypervector> rows, MemoryPurpose purpose,
                   uint64_t seed)
      : entries_(std::move(rows)), purpose_(purpose), seed_(seed) {}

  std::vector<Hypervector> entries_;
  MemoryPurpose purpose_;
  uint64_t seed_;
};

/// Item memory for ordered (quantized) values. Level 0 is random; level l is
/// level l-1 with a seeded random permutation applied inside the bit block
/// [(l-1)*d, l*d), d = floor(D / (L-1)). Blocks are consecutive and disjoint,
/// so each block is disturbed exactly once along the chain and the expected
/// distance from level 0 grows with the level gap.
class LevelItemMemory {
public:
  LevelItemMemory(uint32_t levels, uint32_t dim, uint64_t seed,
                  ValueRange range = {0.0, 1.0})
      : block_bits_(0), range_(range), seed_(seed) {
    if (levels < 2) throw config_error("level memory: need at least 2 levels");
    if (levels > dim)
      throw config_error("level memory: level count " + std::to_string(levels) +
                         " exceeds dimension " + std::to_string(dim));
    block_bits_ = dim / (levels - 1);
    levels_.reserve(levels);
    levels_.push_back(random_hv(dim, derive_seed(seed, "level-base")));
    std::vector<uint32_t> perm(block_bits_);
    std::vector<uint8_t> bits(block_bits_);
    for (uint32_t l = 1; l < levels; ++l) {
      Hypervector next = levels_.back();
      const uint32_t begin = (l - 1) * block_bits_;
      for (uint32_t i = 0; i < block_bits_; ++i) {
        perm[i] = i;
        bits[i] = next.bit(begin + i) ? 1 : 0;
      }
      Rng rng(derive_seed(seed, "level-perm", l));
      for (uint32_t i = block_bits_ - 1; i > 0; --i) {
        const auto j = static_cast<uint32_t>(rng.below(i + 1));
        std::swap(perm[i], perm[j]);
      }
      for (uint32_t i = 0; i < block_bits_; ++i)
        next.set_bit(begin + i, bits[perm[i]] != 0);
      levels_.push_back(std::move(next));
    }
  }

  static LevelItemMemory from_rows(std::vector<Hypervector> rows,
                                   uint32_t block_bits, ValueRange range,
                                   uint64_t seed) {
    if (rows.size() < 2)
      throw config_error("level memory: need at least 2 levels");
    return LevelItemMemory(std::move(rows), block_bits, range, seed);
  }

  uint32_t levels() const { return static_cast<uint32_t>(levels_.size()); }
  uint32_t dim() const { return levels_.front().dim(); }
  uint32_t block_bits() const { return block_bits_; }
  ValueRange value_range() const { return range_; }
  uint64_t seed() const { return seed_; }

  const Hypervector& at(uint32_t level) const {
    if (level >= levels_.size())
      throw config_error("level memory: level " + std::to_string(level) +
                         " out of range (levels " +
                         std::to_string(levels_.size()) + ")");
    return levels_[level];
  }

private:
  LevelItemMemory(std::vector<Hypervector> rows, uint32_t block_bits,
                  ValueRange range, uint64_t seed)
      : levels_(std::move(rows)), block_bits_(block_bits), range_(range),
        seed_(seed) {}

  std::vector<Hypervector> levels_;
  uint32_t block_bits_;
  ValueRange range_;
  uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Flat binary serialization. Header (fixed 56 bytes, little-endian):
//   "HDIM" | u16 version | u8 kind (0 random, 1 level) | u8 purpose |
//   u64 dim | u64 rows | u64 seed | u64 block_bits | f64 range_lo | f64 range_hi
// Payload: rows x ceil(dim/8) bytes, bit i of a row at byte i/8, bit i%8.
// The payload carries exactly rows x dim bits (plus per-row byte padding),
// which is what the profiler checks memory factors against.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

inline uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

inline double get_f64(const unsigned char* p) {
  const uint64_t bits = get_u64(p);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

inline void append_row_bits(std::string& out, const Hypervector& hv) {
  const size_t row_bytes = (hv.dim() + 7) / 8;
  for (size_t byte = 0; byte < row_bytes; ++byte) {
    unsigned char b = 0;
    for (uint32_t k = 0; k < 8; ++k) {
      const auto i = static_cast<uint32_t>(byte * 8 + k);
      if (i < hv.dim() && hv.bit(i)) b |= static_cast<unsigned char>(1u << k);
    }
    out.push_back(static_cast<char>(b));
  }
}

inline Hypervector row_from_bits(const unsigned char* p, uint32_t dim) {
  Hypervector hv(dim);
  for (uint32_t i = 0; i < dim; ++i)
    if ((p[i / 8] >> (i % 8)) & 1u) hv.set_bit(i, true);
  return hv;
}

inline std::string serialize_header(uint8_t kind, uint8_t purpose, uint64_t dim,
                                    uint64_t rows, uint64_t seed,
                                    uint64_t block_bits, ValueRange range) {
  std::string out;
  out.reserve(56);
  out += "HDIM";
  put_u16(out, 1);
  out.push_back(static_cast<char>(kind));
  out.push_back(static_cast<char>(purpose));
  put_u64(out, dim);
  put_u64(out, rows);
  put_u64(out, seed);
  put_u64(out, block_bits);
  put_f64(out, range.lo);
  put_f64(out, range.hi);
  return out;
}

} // namespace detail

inline constexpr size_t kMemoryHeaderBytes = 56;

/// Payload size in bytes for a serialized memory of `rows` vectors.
inline uint64_t memory_payload_bytes(uint32_t dim, uint64_t rows) {
  return rows * ((static_cast<uint64_t>(dim) + 7) / 8);
}

inline std::string serialize_memory(const RandomItemMemory& mem) {
  std::string out = detail::serialize_header(
      0, static_cast<uint8_t>(mem.purpose()), mem.dim(), mem.size(),
      mem.seed(), 0, ValueRange{0.0, 0.0});
  for (uint32_t i = 0; i < mem.size(); ++i)
    detail::append_row_bits(out, mem.at(i));
  return out;
}

inline std::string serialize_memory(const LevelItemMemory& mem) {
  std::string out = detail::serialize_header(
      1, static_cast<uint8_t>(MemoryPurpose::kValue), mem.dim(), mem.levels(),
      mem.seed(), mem.block_bits(), mem.value_range());
  for (uint32_t l = 0; l < mem.levels(); ++l)
    detail::append_row_bits(out, mem.at(l));
  return out;
}

template <typename Memory>
void save_memory(const std::string& path, const Memory& mem) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open " + path + " for writing");
  const std::string blob = serialize_memory(mem);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw data_error("failed writing " + path);
}

namespace detail {

struct MemoryBlob {
  uint8_t kind;
  uint8_t purpose;
  uint32_t dim;
  uint64_t rows;
  uint64_t seed;
  uint64_t block_bits;
  ValueRange range;
  std::vector<Hypervector> vectors;
};

inline MemoryBlob parse_memory_blob(const std::string& blob,
                                    const std::string& origin) {
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  if (blob.size() < kMemoryHeaderBytes || blob.compare(0, 4, "HDIM") != 0)
    throw data_error(origin + ": not an item-memory file");
  const uint16_t version = static_cast<uint16_t>(p[4]) |
                           (static_cast<uint16_t>(p[5]) << 8);
  if (version != 1)
    throw data_error(origin + ": unsupported version " +
                     std::to_string(version));
  MemoryBlob m;
  m.kind = p[6];
  m.purpose = p[7];
  m.dim = static_cast<uint32_t>(get_u64(p + 8));
  m.rows = get_u64(p + 16);
  m.seed = get_u64(p + 24);
  m.block_bits = get_u64(p + 32);
  m.range = ValueRange{get_f64(p + 40), get_f64(p + 48)};
  const uint64_t row_bytes = (static_cast<uint64_t>(m.dim) + 7) / 8;
  if (blob.size() != kMemoryHeaderBytes + m.rows * row_bytes)
    throw data_error(origin + ": truncated payload");
  m.vectors.reserve(m.rows);
  for (uint64_t r = 0; r < m.rows; ++r)
    m.vectors.push_back(
        row_from_bits(p + kMemoryHeaderBytes + r * row_bytes, m.dim));
  return m;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return blob;
}

} // namespace detail

inline RandomItemMemory load_random_memory(const std::string& path) {
  auto m = detail::parse_memory_blob(detail::read_file_bytes(path), path);
  if (m.kind != 0) throw data_error(path + ": not a random item memory");
  return RandomItemMemory::from_rows(std::move(m.vectors),
                                     static_cast<MemoryPurpose>(m.purpose),
                                     m.seed);
}

inline LevelItemMemory load_level_memory(const std::string& path) {
  auto m = detail::parse_memory_blob(detail::read_file_bytes(path), path);
  if (m.kind != 1) throw data_error(path + ": not a level item memory");
  return LevelItemMemory::from_rows(std::move(m.vectors),
                                    static_cast<uint32_t>(m.block_bits),
                                    m.range, m.seed);
}

} // namespace hdseize

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

#include <bit>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hdseize/error.hpp"
#include "hdseize/seeds.hpp"

namespace hdseize {

/// Smallest dimension for which random vectors make statistical sense.
inline constexpr uint32_t kMinRandomDim = 64;

/// Fixed-width binary vector of dimension `dim`. Bits are packed into 64-bit
/// words, bit i living at word i/64, position i%64. Padding bits in the last
/// word are kept at zero at all times so they never contribute to popcounts.
class Hypervector {
public:
  Hypervector() = default;

  explicit Hypervector(uint32_t dim)
      : dim_(dim), words_((static_cast<size_t>(dim) + 63) / 64, 0) {
    if (dim == 0) throw config_error("hypervector dimension must be positive");
  }

  uint32_t dim() const { return dim_; }
  size_t word_count() const { return words_.size(); }

  std::span<const uint64_t> words() const { return words_; }
  std::span<uint64_t> words() { return words_; }

  bool bit(uint32_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1ULL;
  }

  void set_bit(uint32_t i, bool value) {
    const uint64_t mask = 1ULL << (i & 63);
    if (value)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  uint32_t popcount() const {
    uint64_t total = 0;
    for (uint64_t w : words_) total += static_cast<uint64_t>(std::popcount(w));
    return static_cast<uint32_t>(total);
  }

  /// Mask for the valid bits of the last word (all-ones when dim % 64 == 0).
  uint64_t last_word_mask() const {
    const uint32_t rem = dim_ & 63;
    return rem == 0 ? ~0ULL : ((1ULL << rem) - 1);
  }

  /// Force padding bits of the last word back to zero.
  void clear_padding() {
    if (!words_.empty()) words_.back() &= last_word_mask();
  }

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

private:
  uint32_t dim_ = 0;
  std::vector<uint64_t> words_;
};

namespace detail {
inline void require_same_dim(const Hypervector& a, const Hypervector& b,
                             const char* op) {
  if (a.dim() == 0 || b.dim() == 0)
    throw config_error(std::string(op) + ": uninitialized hypervector");
  if (a.dim() != b.dim())
    throw config_error(std::string(op) + ": dimension mismatch (" +
                       std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()) + ")");
}
} // namespace detail

/// Random vector with iid fair bits, fully determined by (dim, seed).
inline Hypervector random_hv(uint32_t dim, uint64_t seed) {
  if (dim < kMinRandomDim)
    throw config_error("random_hv: dimension must be at least " +
                       std::to_string(kMinRandomDim) + ", got " +
                       std::to_string(dim));
  Hypervector hv(dim);
  std::mt19937_64 eng(seed);
  for (uint64_t& w : hv.words()) w = eng();
  hv.clear_padding();
  return hv;
}

/// a XOR b, written into `out` (which must already have the right dimension).
inline void bind_into(const Hypervector& a, const Hypervector& b,
                      Hypervector& out) {
  detail::require_same_dim(a, b, "bind");
  detail::require_same_dim(a, out, "bind");
  const auto wa = a.words();
  const auto wb = b.words();
  auto wo = out.words();
  for (size_t i = 0; i < wa.size(); ++i) wo[i] = wa[i] ^ wb[i];
}

/// Bitwise XOR binding; self-inverse, distance-preserving.
inline Hypervector bind(const Hypervector& a, const Hypervector& b) {
  detail::require_same_dim(a, b, "bind");
  Hypervector out(a.dim());
  bind_into(a, b, out);
  return out;
}

inline Hypervector complement(const Hypervector& a) {
  Hypervector out(a.dim());
  const auto wa = a.words();
  auto wo = out.words();
  for (size_t i = 0; i < wa.size(); ++i) wo[i] = ~wa[i];
  out.clear_padding();
  return out;
}

/// Number of differing bits.
inline uint32_t hamming_bits(const Hypervector& a, const Hypervector& b) {
  detail::require_same_dim(a, b, "hamming");
  const auto wa = a.words();
  const auto wb = b.words();
  uint64_t total = 0;
  for (size_t i = 0; i < wa.size(); ++i)
    total += static_cast<uint64_t>(std::popcount(wa[i] ^ wb[i]));
  return static_cast<uint32_t>(total);
}

/// Normalized Hamming distance in [0, 1].
inline double hamming(const Hypervector& a, const Hypervector& b) {
  return static_cast<double>(hamming_bits(a, b)) / a.dim();
}

/// Per-bit integer counters for incremental bundling. Mathematically
/// identical to batch majority bundling: finalize() sets a bit iff the count
/// of ones strictly exceeds n/2 (exact ties go to 0). Single-writer; parallel
/// training uses one accumulator per worker and merges by count addition.
class BundleAccumulator {
public:
  BundleAccumulator() = default;

  explicit BundleAccumulator(uint32_t dim) : dim_(dim), counts_(dim, 0) {
    if (dim == 0)
      throw config_error("bundle accumulator dimension must be positive");
  }

  uint32_t dim() const { return dim_; }
  uint64_t size() const { return n_; }
  const std::vector<uint32_t>& counts() const { return counts_; }

  void add(const Hypervector& v) {
    if (v.dim() != dim_)
      throw config_error("bundle accumulator: dimension mismatch");
    const auto words = v.words();
    for (size_t w = 0; w < words.size(); ++w) {
      uint64_t bits = words[w];
      uint32_t* base = counts_.data() + w * 64;
      while (bits) {
        const int b = std::countr_zero(bits);
        base[b] += 1;
        bits &= bits - 1;
      }
    }
    ++n_;
  }

  /// Element-wise count addition; equivalent to having added the other
  /// accumulator's inputs one by one.
  void merge(const BundleAccumulator& other) {
    if (other.dim_ != dim_)
      throw config_error("bundle accumulator merge: dimension mismatch");
    for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    n_ += other.n_;
  }

  /// Majority vote: bit = 1 iff count * 2 > n.
  Hypervector finalize() const {
    if (n_ == 0) throw config_error("cannot finalize an empty bundle");
    Hypervector out(dim_);
    for (uint32_t i = 0; i < dim_; ++i)
      if (static_cast<uint64_t>(counts_[i]) * 2 > n_) out.set_bit(i, true);
    return out;
  }

private:
  uint32_t dim_ = 0;
  std::vector<uint32_t> counts_;
  uint64_t n_ = 0;
};

/// Majority bundle over a non-empty set of equal-dimension vectors.
inline Hypervector bundle(std::span<const Hypervector> vectors) {
  if (vectors.empty()) throw config_error("bundle: empty input");
  BundleAccumulator acc(vectors.front().dim());
  for (const Hypervector& v : vectors) acc.add(v);
  return acc.finalize();
}

inline Hypervector bundle(const std::vector<Hypervector>& vectors) {
  return bundle(std::span<const Hypervector>(vectors));
}

/// Majority accumulator backed by carry-save bit planes instead of per-bit
/// integers. Functionally identical to BundleAccumulator (same majority and
/// tie rule); accumulating a vector costs ~2 word ops per plane instead of
/// one integer add per bit, which is what makes per-sample bundling in the
/// encoders affordable. Not mergeable; used only inside encode loops.
class BitplaneAccumulator {
public:
  explicit BitplaneAccumulator(uint32_t dim)
      : dim_(dim), words_((static_cast<size_t>(dim) + 63) / 64) {
    if (dim == 0)
      throw config_error("bitplane accumulator dimension must be positive");
  }

  uint32_t dim() const { return dim_; }
  uint64_t size() const { return n_; }

  void reset() {
    planes_.clear();
    n_ = 0;
  }

  void add(const Hypervector& v) {
    if (v.dim() != dim_)
      throw config_error("bitplane accumulator: dimension mismatch");
    if (std::bit_width(n_ + 1) > planes_.size() / words_)
      planes_.resize(planes_.size() + words_, 0);
    const auto in = v.words();
    const size_t nplanes = planes_.size() / words_;
    for (size_t w = 0; w < words_; ++w) {
      uint64_t carry = in[w];
      for (size_t p = 0; p < nplanes && carry; ++p) {
        uint64_t& plane = planes_[p * words_ + w];
        const uint64_t sum = plane ^ carry;
        carry &= plane;
        plane = sum;
      }
    }
    ++n_;
  }

  /// Majority vote with the same strict rule as BundleAccumulator:
  /// bit = 1 iff count > n/2 (integer floor), i.e. ties go to 0.
  Hypervector finalize() const {
    if (n_ == 0) throw config_error("cannot finalize an empty bundle");
    const uint64_t threshold = n_ / 2;
    const size_t nplanes = planes_.size() / words_;
    Hypervector out(dim_);
    auto wo = out.words();
    for (size_t w = 0; w < words_; ++w) {
      uint64_t gt = 0;
      uint64_t eq = ~0ULL;
      for (size_t p = nplanes; p-- > 0;) {
        const uint64_t plane = planes_[p * words_ + w];
        const uint64_t tbit = ((threshold >> p) & 1ULL) ? ~0ULL : 0ULL;
        gt |= eq & plane & ~tbit;
        eq &= ~(plane ^ tbit);
      }
      wo[w] = gt;
    }
    out.clear_padding();
    return out;
  }

private:
  uint32_t dim_ = 0;
  size_t words_ = 0;
  std::vector<uint64_t> planes_; // nplanes x words_, plane-major
  uint64_t n_ = 0;
};

} // namespace hdseize

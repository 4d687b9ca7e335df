// Copyright 2026 The flowcodec Authors
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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "flowcodec/core.hpp"

namespace flowcodec {

// Exp-Golomb code lengths ----------------------------------------------------

/// Length of the unsigned exp-Golomb codeword for v: 2*floor(log2(v+1)) + 1.
constexpr int ue_bits(std::uint32_t v) {
  return 2 * (std::bit_width(static_cast<std::uint64_t>(v) + 1) - 1) + 1;
}

/// Signed values map 0, 1, -1, 2, -2, ... onto 0, 1, 2, 3, 4, ...
constexpr std::uint32_t se_to_ue(std::int32_t v) {
  return v > 0 ? static_cast<std::uint32_t>(2 * static_cast<std::int64_t>(v) - 1)
               : static_cast<std::uint32_t>(-2 * static_cast<std::int64_t>(v));
}

constexpr std::int32_t ue_to_se(std::uint32_t k) {
  return (k & 1u) ? static_cast<std::int32_t>((k + 1) / 2)
                  : -static_cast<std::int32_t>(k / 2);
}

constexpr int se_bits(std::int32_t v) { return ue_bits(se_to_ue(v)); }

// Writer ---------------------------------------------------------------------

/// MSB-first bit writer.
class BitWriter {
 public:
  void put_bit(bool bit) {
    if (bit_count_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_count_ % 8));
    ++bit_count_;
  }

  void put_bits(std::uint32_t value, int n) {
    for (int i = n - 1; i >= 0; --i) put_bit((value >> i) & 1u);
  }

  void put_ue(std::uint32_t v) {
    const std::uint64_t code = static_cast<std::uint64_t>(v) + 1;
    const int len = std::bit_width(code);
    for (int i = 0; i < len - 1; ++i) put_bit(false);
    for (int i = len - 1; i >= 0; --i) put_bit((code >> i) & 1u);
  }

  void put_se(std::int32_t v) { put_ue(se_to_ue(v)); }

  /// Zero-pads to a byte boundary; returns the number of padding bits.
  int align() {
    int pad = 0;
    while (bit_count_ % 8 != 0) {
      put_bit(false);
      ++pad;
    }
    return pad;
  }

  void put_bytes(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) put_bits(b, 8);
  }

  std::size_t bit_count() const { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_count_ = 0;
};

// Reader ---------------------------------------------------------------------

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool get_bit() {
    if (pos_ >= bytes_.size() * 8) {
      throw FormatError("bitstream truncated", pos_ / 8);
    }
    const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    ++pos_;
    return bit;
  }

  std::uint32_t get_bits(int n) {
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint32_t>(get_bit());
    return v;
  }

  std::uint32_t get_ue() {
    const std::size_t start = pos_;
    int zeros = 0;
    while (!get_bit()) {
      if (++zeros > 31) throw FormatError("exp-Golomb prefix too long", start / 8);
    }
    std::uint64_t value = 1;
    for (int i = 0; i < zeros; ++i) value = (value << 1) | get_bit();
    return static_cast<std::uint32_t>(value - 1);
  }

  std::int32_t get_se() { return ue_to_se(get_ue()); }

  void align() {
    while (pos_ % 8 != 0) {
      if (get_bit()) throw FormatError("nonzero alignment padding", pos_ / 8);
    }
  }

  std::size_t bit_position() const { return pos_; }
  std::size_t byte_position() const { return pos_ / 8; }
  bool at_end() const { return pos_ >= bytes_.size() * 8; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace flowcodec

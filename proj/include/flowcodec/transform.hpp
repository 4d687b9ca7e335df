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

// Residual coding: orthonormal 2-D DCT-II, uniform mid-tread quantiser and a
// run-level exp-Golomb code over the zig-zag scan.
//
// Block syntax:
//   coded_flag u(1)            0 => all levels zero, nothing follows
//   repeat:
//     run    ue(v)             zeros preceding the next nonzero level
//     level  se(v)             nonzero
//     last   u(1)              1 => no further nonzero levels

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "flowcodec/bitio.hpp"
#include "flowcodec/core.hpp"

namespace flowcodec {

inline bool valid_transform_size(int n) { return n == 2 || n == 4 || n == 8; }

namespace detail {

/// Row k of the orthonormal DCT-II basis: c_k cos(pi (2i+1) k / 2n).
inline std::vector<double> dct_matrix(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      m[k * n + i] = scale * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }
  return m;
}

inline const std::vector<double>& cached_dct_matrix(int n) {
  static const std::vector<double> m2 = dct_matrix(2);
  static const std::vector<double> m4 = dct_matrix(4);
  static const std::vector<double> m8 = dct_matrix(8);
  switch (n) {
    case 2: return m2;
    case 4: return m4;
    case 8: return m8;
  }
  throw InputError("unsupported transform size " + std::to_string(n));
}

}  // namespace detail

/// 2-D orthonormal DCT-II of an n x n row-major block.
inline std::vector<double> dct_forward(std::span<const double> block, int n) {
  const auto& m = detail::cached_dct_matrix(n);
  std::vector<double> tmp(block.size(), 0.0), out(block.size(), 0.0);
  // rows
  for (int y = 0; y < n; ++y)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += m[k * n + i] * block[y * n + i];
      tmp[y * n + k] = s;
    }
  // columns
  for (int x = 0; x < n; ++x)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += m[k * n + i] * tmp[i * n + x];
      out[k * n + x] = s;
    }
  return out;
}

inline std::vector<double> dct_inverse(std::span<const double> coeffs, int n) {
  const auto& m = detail::cached_dct_matrix(n);
  std::vector<double> tmp(coeffs.size(), 0.0), out(coeffs.size(), 0.0);
  for (int x = 0; x < n; ++x)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m[k * n + i] * coeffs[k * n + x];
      tmp[i * n + x] = s;
    }
  for (int y = 0; y < n; ++y)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m[k * n + i] * tmp[y * n + k];
      out[y * n + i] = s;
    }
  return out;
}

inline std::vector<double> dct8_forward(std::span<const double> block) {
  return dct_forward(block, 8);
}
inline std::vector<double> dct8_inverse(std::span<const double> coeffs) {
  return dct_inverse(coeffs, 8);
}

// Quantisation ---------------------------------------------------------------

/// level = round(c / q), ties away from zero.
inline std::vector<int> quantize(std::span<const double> coeffs, int q) {
  if (q < 1) throw InputError("q must be >= 1");
  std::vector<int> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    out[i] = static_cast<int>(std::round(coeffs[i] / q));
  }
  return out;
}

inline std::vector<double> dequantize(std::span<const int> levels, int q) {
  std::vector<double> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out[i] = static_cast<double>(levels[i]) * q;
  }
  return out;
}

// Scan order -----------------------------------------------------------------

/// Zig-zag order for an n x n block: positions sorted by anti-diagonal,
/// alternating direction.
inline std::vector<int> zigzag_order(int n) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n) * n);
  for (int s = 0; s <= 2 * (n - 1); ++s) {
    if (s % 2 == 0) {
      for (int y = std::min(s, n - 1); y >= 0 && s - y < n; --y) order.push_back(y * n + s - y);
    } else {
      for (int x = std::min(s, n - 1); x >= 0 && s - x < n; --x) order.push_back((s - x) * n + x);
    }
  }
  return order;
}

inline const std::vector<int>& cached_zigzag(int n) {
  static const std::vector<int> z2 = zigzag_order(2);
  static const std::vector<int> z4 = zigzag_order(4);
  static const std::vector<int> z8 = zigzag_order(8);
  switch (n) {
    case 2: return z2;
    case 4: return z4;
    case 8: return z8;
  }
  throw InputError("unsupported transform size " + std::to_string(n));
}

// Run-level coding -----------------------------------------------------------

/// Exact bit length of the run-level code for levels already in scan order.
inline int residual_bits(std::span<const int> scanned) {
  int bits = 1;  // coded flag
  int run = 0;
  for (int level : scanned) {
    if (level == 0) {
      ++run;
      continue;
    }
    bits += ue_bits(static_cast<std::uint32_t>(run)) + se_bits(level) + 1;
    run = 0;
  }
  return bits;
}

inline void write_residual(BitWriter& w, std::span<const int> scanned) {
  int last_nonzero = -1;
  for (int i = 0; i < static_cast<int>(scanned.size()); ++i) {
    if (scanned[i] != 0) last_nonzero = i;
  }
  w.put_bit(last_nonzero >= 0);
  int run = 0;
  for (int i = 0; i <= last_nonzero; ++i) {
    if (scanned[i] == 0) {
      ++run;
      continue;
    }
    w.put_ue(static_cast<std::uint32_t>(run));
    w.put_se(scanned[i]);
    w.put_bit(i == last_nonzero);
    run = 0;
  }
}

/// Inverse of write_residual for a block of `count` coefficients.
inline std::vector<int> read_residual(BitReader& r, int count) {
  std::vector<int> out(static_cast<std::size_t>(count), 0);
  if (!r.get_bit()) return out;
  int pos = 0;
  for (;;) {
    const std::size_t at = r.bit_position() / 8;
    const std::uint32_t run = r.get_ue();
    const std::int32_t level = r.get_se();
    if (level == 0) throw FormatError("zero level in run-level pair", at);
    if (run >= static_cast<std::uint32_t>(count - pos)) {
      throw FormatError("run past end of block", at);
    }
    pos += static_cast<int>(run);
    out[pos++] = level;
    if (r.get_bit()) break;
    if (pos >= count) throw FormatError("block overflows without last flag", at);
  }
  return out;
}

inline std::vector<int> to_scan_order(std::span<const int> raster, int n) {
  const auto& zz = cached_zigzag(n);
  std::vector<int> out(zz.size());
  for (std::size_t i = 0; i < zz.size(); ++i) out[i] = raster[zz[i]];
  return out;
}

inline std::vector<int> from_scan_order(std::span<const int> scanned, int n) {
  const auto& zz = cached_zigzag(n);
  std::vector<int> out(zz.size());
  for (std::size_t i = 0; i < zz.size(); ++i) out[zz[i]] = scanned[i];
  return out;
}

}  // namespace flowcodec

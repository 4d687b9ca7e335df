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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flowcodec {

// Errors ---------------------------------------------------------------------

/// Malformed or unusable input (bad files, bad arguments). Maps to CLI exit 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure with a byte (or bit) position.
class FormatError : public InputError {
 public:
  FormatError(const std::string& what, std::size_t position)
      : InputError(what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// Planes and frames ----------------------------------------------------------

enum class PlaneId { kY = 0, kU = 1, kV = 2 };

inline const char* plane_name(PlaneId id) {
  switch (id) {
    case PlaneId::kY: return "Y";
    case PlaneId::kU: return "U";
    case PlaneId::kV: return "V";
  }
  return "?";
}

/// One 8-bit sample plane, row-major, no padding.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Plane() = default;
  Plane(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw InputError("plane dimensions must be positive");
  }

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  // Border replication for out-of-range coordinates.
  std::uint8_t clamped(int x, int y) const {
    return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
  }

  bool operator==(const Plane&) const = default;
};

/// YUV 4:2:0 picture. Chroma planes are half size in each dimension.
struct Frame {
  int width = 0;
  int height = 0;
  Plane y, u, v;
  int index = 0;

  Frame() = default;
  Frame(int w, int h, int frame_index = 0, std::uint8_t luma = 0,
        std::uint8_t chroma = 128)
      : width(w), height(h), index(frame_index) {
    if (w <= 0 || h <= 0 || w % 2 != 0 || h % 2 != 0) {
      throw InputError("frame dimensions must be positive and even, got " +
                       std::to_string(w) + "x" + std::to_string(h));
    }
    y = Plane(w, h, luma);
    u = Plane(w / 2, h / 2, chroma);
    v = Plane(w / 2, h / 2, chroma);
  }

  const Plane& plane(PlaneId id) const {
    switch (id) {
      case PlaneId::kY: return y;
      case PlaneId::kU: return u;
      case PlaneId::kV: return v;
    }
    throw InputError("invalid plane id");
  }
  Plane& plane(PlaneId id) {
    return const_cast<Plane&>(std::as_const(*this).plane(id));
  }

  // Pixel content only; the frame number is bookkeeping.
  bool same_pixels(const Frame& o) const {
    return width == o.width && height == o.height && y == o.y && u == o.u &&
           v == o.v;
  }
};

inline constexpr PlaneId kAllPlanes[] = {PlaneId::kY, PlaneId::kU, PlaneId::kV};

// Motion ---------------------------------------------------------------------

/// Default search range bound in pixels; vectors are limited to 4x this in
/// quarter-pel units.
inline constexpr int kDefaultSearchRangeMax = 32;
inline constexpr int kDefaultVectorBound = 4 * kDefaultSearchRangeMax;

/// Displacement in quarter-pel units.
struct MotionVector {
  int dx = 0;
  int dy = 0;

  constexpr bool operator==(const MotionVector&) const = default;
  constexpr MotionVector operator-(const MotionVector& o) const {
    return {dx - o.dx, dy - o.dy};
  }
  constexpr MotionVector operator+(const MotionVector& o) const {
    return {dx + o.dx, dy + o.dy};
  }
  double u_px() const { return dx / 4.0; }
  double v_px() const { return dy / 4.0; }
};

/// Round half away from zero to the nearest quarter, in quarter units.
inline int round_quarter_units(double px) {
  return static_cast<int>(std::round(px * 4.0));
}

inline MotionVector quantize_to_quarter_pel(double u, double v,
                                            int bound = kDefaultVectorBound) {
  return {std::clamp(round_quarter_units(u), -bound, bound),
          std::clamp(round_quarter_units(v), -bound, bound)};
}

/// Chroma displacement for a luma vector: half the distance, re-rounded on the
/// chroma quarter-pel grid (ties away from zero).
inline MotionVector chroma_vector(MotionVector luma) {
  auto half = [](int q) {
    return q >= 0 ? (q + 1) / 2 : -((-q + 1) / 2);
  };
  return {half(luma.dx), half(luma.dy)};
}

/// Per-pixel real-valued flow.
struct FlowVector {
  float u = 0.0f;
  float v = 0.0f;
  bool operator==(const FlowVector&) const = default;
};

struct DenseFlowField {
  int width = 0;
  int height = 0;
  std::vector<FlowVector> vectors;

  DenseFlowField() = default;
  DenseFlowField(int w, int h, FlowVector fill = {})
      : width(w), height(h),
        vectors(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw InputError("flow dimensions must be positive");
  }

  const FlowVector& at(int x, int y) const {
    return vectors[static_cast<std::size_t>(y) * width + x];
  }
  FlowVector& at(int x, int y) {
    return vectors[static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const DenseFlowField&) const = default;
};

inline bool valid_block_size(int size) {
  return size == 4 || size == 8 || size == 16;
}

/// One vector per block on a grid covering the frame; edge blocks may be
/// partial.
struct BlockMotionField {
  int block_size = 16;
  int cols = 0;
  int rows = 0;
  std::vector<MotionVector> vectors;

  BlockMotionField() = default;
  BlockMotionField(int frame_width, int frame_height, int bs)
      : block_size(bs),
        cols((frame_width + bs - 1) / bs),
        rows((frame_height + bs - 1) / bs),
        vectors(static_cast<std::size_t>(cols) * rows) {
    if (!valid_block_size(bs)) {
      throw InputError("block size must be 4, 8 or 16, got " + std::to_string(bs));
    }
  }

  const MotionVector& at(int col, int row) const {
    return vectors[static_cast<std::size_t>(row) * cols + col];
  }
  MotionVector& at(int col, int row) {
    return vectors[static_cast<std::size_t>(row) * cols + col];
  }
  bool operator==(const BlockMotionField&) const = default;
};

// Rate-distortion points -----------------------------------------------------

struct RDPoint {
  int q = 0;
  double rate = 0.0;  // mean bits per frame
  double psnr = 0.0;  // dB
  bool operator==(const RDPoint&) const = default;
};

using RDCurve = std::vector<RDPoint>;

// Sampling -------------------------------------------------------------------

/// size x size samples with top-left (x0, y0); reads outside the plane
/// replicate the border. Luma blocks are 4, 8 or 16; chroma blocks are half
/// that (2, 4 or 8).
inline std::vector<std::uint8_t> extract_block(const Frame& frame, PlaneId plane,
                                               int x0, int y0, int size) {
  const bool chroma = plane != PlaneId::kY;
  const bool ok = chroma ? (size == 2 || size == 4 || size == 8)
                         : valid_block_size(size);
  if (!ok) {
    throw InputError(std::string("invalid block size ") + std::to_string(size) +
                     " for plane " + plane_name(plane));
  }
  const Plane& p = frame.plane(plane);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      out[static_cast<std::size_t>(y) * size + x] = p.clamped(x0 + x, y0 + y);
    }
  }
  return out;
}

/// Bilinear sample at quarter-pel position (qx, qy); coordinates are clamped
/// to the plane first, so integer positions return the stored sample.
inline double sample_bilinear(const Plane& p, int qx, int qy) {
  qx = std::clamp(qx, 0, 4 * (p.width - 1));
  qy = std::clamp(qy, 0, 4 * (p.height - 1));
  const int ix = qx >> 2;
  const int iy = qy >> 2;
  const double a = (qx & 3) / 4.0;
  const double b = (qy & 3) / 4.0;
  const double p00 = p.clamped(ix, iy);
  const double p01 = p.clamped(ix + 1, iy);
  const double p10 = p.clamped(ix, iy + 1);
  const double p11 = p.clamped(ix + 1, iy + 1);
  return (1 - a) * (1 - b) * p00 + a * (1 - b) * p01 + (1 - a) * b * p10 +
         a * b * p11;
}

/// sample_bilinear rounded half-up to 8 bits, in exact integer arithmetic
/// (the weights are multiples of 1/16).
inline std::uint8_t sample_bilinear_u8(const Plane& p, int qx, int qy) {
  qx = std::clamp(qx, 0, 4 * (p.width - 1));
  qy = std::clamp(qy, 0, 4 * (p.height - 1));
  const int ix = qx >> 2;
  const int iy = qy >> 2;
  const int a = qx & 3;
  const int b = qy & 3;
  const int sum = (4 - a) * (4 - b) * p.clamped(ix, iy) +
                  a * (4 - b) * p.clamped(ix + 1, iy) +
                  (4 - a) * b * p.clamped(ix, iy + 1) +
                  a * b * p.clamped(ix + 1, iy + 1);
  return static_cast<std::uint8_t>((sum + 8) >> 4);
}

/// Motion-compensated size x size block of `ref` for a block at (x0, y0)
/// displaced by `mv` (quarter-pel units on this plane's grid).
inline std::vector<std::uint8_t> predict_block(const Plane& ref, int x0, int y0,
                                               int size, MotionVector mv) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      out[static_cast<std::size_t>(y) * size + x] =
          sample_bilinear_u8(ref, 4 * (x0 + x) + mv.dx, 4 * (y0 + y) + mv.dy);
    }
  }
  return out;
}

}  // namespace flowcodec

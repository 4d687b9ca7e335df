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

// Reduction of dense per-pixel flow to one vector per block.
//
// Mean: component-wise average of the K flow vectors in the block.
// Vector median: the input vector with the smallest summed distance to all
// the others. Both ignore the image data; the codec's RD decision is where
// image cost enters.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "flowcodec/core.hpp"

namespace flowcodec {

struct BlockRect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
};

enum class DownsampleMethod { kMean, kVectorMedian };
enum class MedianNorm { kL2, kL1 };

inline DownsampleMethod parse_downsample_method(std::string_view s) {
  if (s == "mean") return DownsampleMethod::kMean;
  if (s == "vector-median" || s == "median") return DownsampleMethod::kVectorMedian;
  throw InputError("unknown downsample method '" + std::string(s) + "'");
}

/// Real-valued block estimate before quarter-pel quantisation.
struct FlowEstimate {
  double u = 0.0;
  double v = 0.0;
};

namespace detail {

/// Flow vectors of the block clipped to the field, in raster order.
inline std::vector<FlowVector> gather(const DenseFlowField& field, const BlockRect& r) {
  const int x_end = std::min(r.x0 + r.width, field.width);
  const int y_end = std::min(r.y0 + r.height, field.height);
  const int x_begin = std::max(r.x0, 0);
  const int y_begin = std::max(r.y0, 0);
  if (x_begin >= x_end || y_begin >= y_end) {
    throw InputError("block at (" + std::to_string(r.x0) + "," + std::to_string(r.y0) +
                     ") does not intersect the flow field");
  }
  std::vector<FlowVector> out;
  out.reserve(static_cast<std::size_t>(x_end - x_begin) * (y_end - y_begin));
  for (int y = y_begin; y < y_end; ++y) {
    for (int x = x_begin; x < x_end; ++x) out.push_back(field.at(x, y));
  }
  return out;
}

}  // namespace detail

inline FlowEstimate mean_of(const std::vector<FlowVector>& vs) {
  if (vs.empty()) throw InputError("mean of an empty vector set");
  double su = 0.0;
  double sv = 0.0;
  for (const auto& f : vs) {
    su += f.u;
    sv += f.v;
  }
  return {su / static_cast<double>(vs.size()), sv / static_cast<double>(vs.size())};
}

/// Relative tolerance under which two distance sums count as tied.
inline constexpr double kMedianTieTolerance = 1e-12;

/// Index of the vector median of `vs`. Near-equal distance sums are broken by
/// smaller magnitude, then by u, then by v.
inline std::size_t vector_median_index(const std::vector<FlowVector>& vs,
                                       MedianNorm norm = MedianNorm::kL2) {
  if (vs.empty()) throw InputError("vector median of an empty vector set");
  const std::size_t k = vs.size();
  std::vector<double> sums(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double du = static_cast<double>(vs[i].u) - vs[j].u;
      const double dv = static_cast<double>(vs[i].v) - vs[j].v;
      const double d = norm == MedianNorm::kL2 ? std::hypot(du, dv)
                                               : std::fabs(du) + std::fabs(dv);
      sums[i] += d;
      sums[j] += d;
    }
  }
  auto magnitude = [&](std::size_t i) {
    return std::hypot(static_cast<double>(vs[i].u), static_cast<double>(vs[i].v));
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i) {
    const double tol = kMedianTieTolerance * std::max({1.0, sums[i], sums[best]});
    if (sums[i] < sums[best] - tol) {
      best = i;
    } else if (sums[i] <= sums[best] + tol) {
      const double mi = magnitude(i);
      const double mb = magnitude(best);
      if (mi < mb || (mi == mb && (vs[i].u < vs[best].u ||
                                   (vs[i].u == vs[best].u && vs[i].v < vs[best].v)))) {
        best = i;
      }
    }
  }
  return best;
}

inline MotionVector block_mean(const DenseFlowField& field, const BlockRect& rect,
                               int bound = kDefaultVectorBound) {
  const FlowEstimate e = mean_of(detail::gather(field, rect));
  return quantize_to_quarter_pel(e.u, e.v, bound);
}

inline MotionVector block_vector_median(const DenseFlowField& field, const BlockRect& rect,
                                        MedianNorm norm = MedianNorm::kL2,
                                        int bound = kDefaultVectorBound) {
  const auto vs = detail::gather(field, rect);
  const FlowVector& m = vs[vector_median_index(vs, norm)];
  return quantize_to_quarter_pel(m.u, m.v, bound);
}

/// One estimate per block of a block_size grid over the field. Edge blocks
/// use only the in-bounds vectors.
inline BlockMotionField downsample_flow(const DenseFlowField& field, int block_size,
                                        DownsampleMethod method,
                                        MedianNorm norm = MedianNorm::kL2,
                                        int bound = kDefaultVectorBound) {
  BlockMotionField out(field.width, field.height, block_size);
  for (int row = 0; row < out.rows; ++row) {
    for (int col = 0; col < out.cols; ++col) {
      const BlockRect rect{col * block_size, row * block_size, block_size, block_size};
      out.at(col, row) = method == DownsampleMethod::kMean
                             ? block_mean(field, rect, bound)
                             : block_vector_median(field, rect, norm, bound);
    }
  }
  return out;
}

/// Paints each block vector over its block, giving a dense field viewable with
/// ordinary flow tools.
inline DenseFlowField expand_block_field(const BlockMotionField& blocks, int width,
                                         int height) {
  DenseFlowField out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const MotionVector mv = blocks.at(x / blocks.block_size, y / blocks.block_size);
      out.at(x, y) = {static_cast<float>(mv.u_px()), static_cast<float>(mv.v_px())};
    }
  }
  return out;
}

}  // namespace flowcodec

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

// Block-matching motion estimation under the RD energy
//   E(d) = lambda_y * R(d) + SAD(d)
// where R(d) counts signed exp-Golomb bits of the vector difference against
// the median predictor.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <tuple>
#include <vector>

#include "flowcodec/bitio.hpp"
#include "flowcodec/core.hpp"

namespace flowcodec {

struct SearchConfig {
  int search_range = 16;  // integer-pel window [-R, R]^2
  int block_size = 16;
  bool refine_subpel = true;

  void validate() const {
    if (search_range < 1) throw InputError("search range must be >= 1");
    if (search_range > kDefaultSearchRangeMax) {
      throw InputError("search range must be <= " +
                       std::to_string(kDefaultSearchRangeMax));
    }
    if (!valid_block_size(block_size)) {
      throw InputError("block size must be 4, 8 or 16");
    }
  }
};

/// Lagrangian weights derived from the quantiser. The lambdas are always
/// recomputed from q.
class RDParams {
 public:
  explicit RDParams(int q, bool chroma_in_cost = false)
      : q_(q), chroma_in_cost_(chroma_in_cost) {
    if (q < 1) throw InputError("q must be >= 1, got " + std::to_string(q));
  }

  int q() const { return q_; }
  double lambda_y() const { return std::exp2(q_ / 6.0 - 2.0); }
  double lambda_c() const { return static_cast<double>(q_) * q_ * 0.9 * 256.0; }

  bool chroma_in_cost() const { return chroma_in_cost_; }
  /// Weight on chroma SAD when enabled: lambda_c with its q^2 * 256 scale
  /// removed.
  double chroma_weight() const {
    return lambda_c() / (static_cast<double>(q_) * q_ * 256.0);
  }

 private:
  int q_;
  bool chroma_in_cost_;
};

// Distortion -----------------------------------------------------------------

/// Sum of |cur - ref(x + mv)| over a size x size block at (x0, y0). Sub-pel
/// reference samples are bilinear, rounded to 8 bits.
inline int sad(std::span<const std::uint8_t> cur_block, const Plane& ref, int x0,
               int y0, int size, MotionVector mv) {
  int total = 0;
  if ((mv.dx & 3) == 0 && (mv.dy & 3) == 0) {
    const int ox = mv.dx >> 2;
    const int oy = mv.dy >> 2;
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        total += std::abs(static_cast<int>(cur_block[y * size + x]) -
                          ref.clamped(x0 + x + ox, y0 + y + oy));
      }
    }
    return total;
  }
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      total += std::abs(static_cast<int>(cur_block[y * size + x]) -
                        sample_bilinear_u8(ref, 4 * (x0 + x) + mv.dx,
                                           4 * (y0 + y) + mv.dy));
    }
  }
  return total;
}

/// Luma SAD of the block at (x0, y0) of `cur` against `ref`.
inline int sad(const Frame& cur, const Frame& ref, int x0, int y0, int size,
               MotionVector mv) {
  const auto block = extract_block(cur, PlaneId::kY, x0, y0, size);
  return sad(block, ref.y, x0, y0, size, mv);
}

/// Chroma (U + V) SAD for the luma block at (x0, y0) with luma vector mv.
inline int chroma_sad(const Frame& cur, const Frame& ref, int x0, int y0,
                      int size, MotionVector mv) {
  const int cs = size / 2;
  const MotionVector cmv = chroma_vector(mv);
  int total = 0;
  for (PlaneId id : {PlaneId::kU, PlaneId::kV}) {
    const auto block = extract_block(cur, id, x0 / 2, y0 / 2, cs);
    total += sad(block, ref.plane(id), x0 / 2, y0 / 2, cs, cmv);
  }
  return total;
}

// Rate -----------------------------------------------------------------------

inline int mv_rate_bits(MotionVector mv, MotionVector predictor) {
  return se_bits(mv.dx - predictor.dx) + se_bits(mv.dy - predictor.dy);
}

inline double rd_cost(double distortion, MotionVector mv, MotionVector predictor,
                      const RDParams& rd) {
  return rd.lambda_y() * mv_rate_bits(mv, predictor) + distortion;
}

// Candidates -----------------------------------------------------------------

struct Candidate {
  MotionVector mv;
  int distortion = 0;  // luma SAD
  int chroma_distortion = 0;
  int bits = 0;
  double cost = 0.0;
};

/// Deterministic ordering: cost, then |dx|+|dy|, then dy, then dx.
inline bool better(const Candidate& a, const Candidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  auto key = [](MotionVector v) {
    return std::make_tuple(std::abs(v.dx) + std::abs(v.dy), v.dy, v.dx);
  };
  return key(a.mv) < key(b.mv);
}

/// Everything needed to price a vector for one block.
class BlockEvaluator {
 public:
  BlockEvaluator(const Frame& cur, const Frame& ref, int x0, int y0, int size,
                 MotionVector predictor, const RDParams& rd)
      : cur_(cur), ref_(ref), x0_(x0), y0_(y0), size_(size),
        predictor_(predictor), rd_(rd),
        block_(extract_block(cur, PlaneId::kY, x0, y0, size)) {}

  Candidate evaluate(MotionVector mv) const {
    Candidate c;
    c.mv = mv;
    c.distortion = sad(block_, ref_.y, x0_, y0_, size_, mv);
    c.bits = mv_rate_bits(mv, predictor_);
    double distortion = c.distortion;
    if (rd_.chroma_in_cost()) {
      c.chroma_distortion = chroma_sad(cur_, ref_, x0_, y0_, size_, mv);
      distortion += rd_.chroma_weight() * c.chroma_distortion;
    }
    c.cost = rd_cost(distortion, mv, predictor_, rd_);
    return c;
  }

  MotionVector predictor() const { return predictor_; }
  int x0() const { return x0_; }
  int y0() const { return y0_; }
  int size() const { return size_; }

 private:
  const Frame& cur_;
  const Frame& ref_;
  int x0_, y0_, size_;
  MotionVector predictor_;
  const RDParams& rd_;
  std::vector<std::uint8_t> block_;
};

struct SearchResult {
  MotionVector mv;
  double cost = 0.0;
  int distortion = 0;
  int bits = 0;
  int iterations = 0;  // large-pattern steps (diamond/hex), 0 for full search
};

namespace detail {

inline SearchResult to_result(const Candidate& c, int iterations) {
  return {c.mv, c.cost, c.distortion, c.bits, iterations};
}

inline bool in_window(MotionVector mv, int range) {
  const int b = 4 * range;
  return std::abs(mv.dx) <= b && std::abs(mv.dy) <= b;
}

/// Local quarter-pel refinement: move among the 8 neighbours at +-1/4 pel
/// while it improves, staying within +-3/4 pel of the integer optimum.
inline Candidate refine_quarter_pel(const BlockEvaluator& eval, Candidate best,
                                    int range) {
  const MotionVector base = best.mv;
  for (;;) {
    Candidate step = best;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const MotionVector mv{best.mv.dx + dx, best.mv.dy + dy};
        if (std::abs(mv.dx - base.dx) > 3 || std::abs(mv.dy - base.dy) > 3) continue;
        if (!in_window(mv, range)) continue;
        const Candidate c = eval.evaluate(mv);
        if (better(c, step)) step = c;
      }
    }
    if (step.mv == best.mv) return best;
    best = step;
  }
}

inline MotionVector round_to_integer_pel(MotionVector mv, int range) {
  auto r = [range](int q) {
    const int px = q >= 0 ? (q + 2) / 4 : -((-q + 2) / 4);
    return 4 * std::clamp(px, -range, range);
  };
  return {r(mv.dx), r(mv.dy)};
}

/// Iterates `pattern` around the current best until the centre wins, then
/// applies `refine` once.
template <std::size_t N, std::size_t M>
SearchResult pattern_search(const BlockEvaluator& eval, const SearchConfig& config,
                            MotionVector seed,
                            const std::array<std::array<int, 2>, N>& pattern,
                            const std::array<std::array<int, 2>, M>& refine) {
  const int range = config.search_range;
  Candidate best = eval.evaluate(round_to_integer_pel(seed, range));
  const MotionVector pred = round_to_integer_pel(eval.predictor(), range);
  if (!(pred == best.mv)) {
    const Candidate c = eval.evaluate(pred);
    if (better(c, best)) best = c;
  }

  auto step = [&](const auto& pts) {
    Candidate next = best;
    for (const auto& p : pts) {
      const MotionVector mv{best.mv.dx + 4 * p[0], best.mv.dy + 4 * p[1]};
      if (!in_window(mv, range)) continue;
      const Candidate c = eval.evaluate(mv);
      if (better(c, next)) next = c;
    }
    const bool moved = !(next.mv == best.mv);
    best = next;
    return moved;
  };

  int iterations = 0;
  for (;;) {
    ++iterations;
    if (!step(pattern)) break;
  }
  step(refine);
  if (config.refine_subpel) best = refine_quarter_pel(eval, best, range);
  return to_result(best, iterations);
}

inline constexpr std::array<std::array<int, 2>, 8> kLargeDiamond{
    {{0, -2}, {-1, -1}, {1, -1}, {-2, 0}, {2, 0}, {-1, 1}, {1, 1}, {0, 2}}};
inline constexpr std::array<std::array<int, 2>, 4> kSmallDiamond{
    {{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};
inline constexpr std::array<std::array<int, 2>, 6> kHexagon{
    {{-1, -2}, {1, -2}, {-2, 0}, {2, 0}, {-1, 2}, {1, 2}}};
inline constexpr std::array<std::array<int, 2>, 8> kSquare{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

}  // namespace detail

// Searches -------------------------------------------------------------------

/// Exhaustive integer-pel search over [-R, R]^2, optionally followed by
/// quarter-pel refinement around the winner.
inline SearchResult full_search(const BlockEvaluator& eval, const SearchConfig& config) {
  const int r = config.search_range;
  Candidate best = eval.evaluate({0, 0});
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const Candidate c = eval.evaluate({4 * dx, 4 * dy});
      if (better(c, best)) best = c;
    }
  }
  if (config.refine_subpel) best = detail::refine_quarter_pel(eval, best, r);
  return detail::to_result(best, 0);
}

/// Large-diamond descent, small-diamond refinement, then quarter-pel.
/// Starts from the better of `seed` and the predictor (both integer-rounded).
inline SearchResult diamond_search(const BlockEvaluator& eval,
                                   const SearchConfig& config,
                                   MotionVector seed = {}) {
  return detail::pattern_search(eval, config, seed, detail::kLargeDiamond,
                                detail::kSmallDiamond);
}

/// Hexagon descent, square refinement, then quarter-pel.
inline SearchResult hex_search(const BlockEvaluator& eval, const SearchConfig& config,
                               MotionVector seed = {}) {
  return detail::pattern_search(eval, config, seed, detail::kHexagon,
                                detail::kSquare);
}

inline SearchResult full_search(const Frame& cur, const Frame& ref, int x0, int y0,
                                const SearchConfig& config, const RDParams& rd,
                                MotionVector predictor = {}) {
  return full_search(BlockEvaluator(cur, ref, x0, y0, config.block_size, predictor, rd),
                     config);
}

inline SearchResult diamond_search(const Frame& cur, const Frame& ref, int x0, int y0,
                                   const SearchConfig& config, const RDParams& rd,
                                   MotionVector predictor = {}, MotionVector seed = {}) {
  return diamond_search(
      BlockEvaluator(cur, ref, x0, y0, config.block_size, predictor, rd), config, seed);
}

inline SearchResult hex_search(const Frame& cur, const Frame& ref, int x0, int y0,
                               const SearchConfig& config, const RDParams& rd,
                               MotionVector predictor = {}, MotionVector seed = {}) {
  return hex_search(BlockEvaluator(cur, ref, x0, y0, config.block_size, predictor, rd),
                    config, seed);
}

// Prediction -----------------------------------------------------------------

/// Component-wise median of the left, top and top-right neighbours; missing
/// neighbours count as (0,0). Blocks must be decided in raster order.
inline MotionVector median_predictor(const BlockMotionField& field, int col, int row) {
  const MotionVector zero{};
  const MotionVector left = col > 0 ? field.at(col - 1, row) : zero;
  const MotionVector top = row > 0 ? field.at(col, row - 1) : zero;
  const MotionVector top_right =
      (row > 0 && col + 1 < field.cols) ? field.at(col + 1, row - 1) : zero;
  auto med = [](int a, int b, int c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
  };
  return {med(left.dx, top.dx, top_right.dx), med(left.dy, top.dy, top_right.dy)};
}

}  // namespace flowcodec

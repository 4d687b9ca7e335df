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

// Closed-loop P-frame codec.
//
// Each frame is predicted block by block from the decoded previous frame,
//   I_n(x) = I_{n-1}(x + d(x)) + e_n(x),
// and the residual e_n is transform coded. The first frame of every GOP is
// intra coded against a flat 128 prediction.
//
// Bitstream ("FCL1"), all fields MSB first:
//   magic        32  "FCL1"
//   width        16
//   height       16
//   q            16
//   block_size    8
//   gop_size     16
//   mode          8  MotionMode id
//   frame_count  32
//   frames:
//     type        1  0 = intra, 1 = predicted
//     blocks in raster order:
//       P only: se(dx - pred_dx) se(dy - pred_dy)   quarter-pel, median predictor
//       residual tiles for Y, then U, then V (see transform.hpp)
//     zero padding to a byte boundary

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowcodec/bitio.hpp"
#include "flowcodec/block_match.hpp"
#include "flowcodec/core.hpp"
#include "flowcodec/flow_adapt.hpp"
#include "flowcodec/flow_provider.hpp"
#include "flowcodec/metrics.hpp"
#include "flowcodec/transform.hpp"

namespace flowcodec {

enum class MotionMode : std::uint8_t {
  kZero = 0,
  kInternalDiamond = 1,
  kInternalHex = 2,
  kFlowMean = 3,
  kFlowMedian = 4,
  kHybridMean = 5,
  kHybridMedian = 6,
};

inline constexpr MotionMode kAllMotionModes[] = {
    MotionMode::kZero,       MotionMode::kInternalDiamond, MotionMode::kInternalHex,
    MotionMode::kFlowMean,   MotionMode::kFlowMedian,      MotionMode::kHybridMean,
    MotionMode::kHybridMedian};

inline const char* motion_mode_name(MotionMode m) {
  switch (m) {
    case MotionMode::kZero: return "zero";
    case MotionMode::kInternalDiamond: return "internal-diamond";
    case MotionMode::kInternalHex: return "internal-hex";
    case MotionMode::kFlowMean: return "flow-mean";
    case MotionMode::kFlowMedian: return "flow-median";
    case MotionMode::kHybridMean: return "hybrid-mean";
    case MotionMode::kHybridMedian: return "hybrid-median";
  }
  return "?";
}

inline MotionMode parse_motion_mode(std::string_view s) {
  for (MotionMode m : kAllMotionModes) {
    if (s == motion_mode_name(m)) return m;
  }
  throw InputError("unknown motion mode '" + std::string(s) + "'");
}

inline bool uses_flow(MotionMode m) {
  return m == MotionMode::kFlowMean || m == MotionMode::kFlowMedian ||
         m == MotionMode::kHybridMean || m == MotionMode::kHybridMedian;
}

inline DownsampleMethod flow_method(MotionMode m) {
  return (m == MotionMode::kFlowMean || m == MotionMode::kHybridMean)
             ? DownsampleMethod::kMean
             : DownsampleMethod::kVectorMedian;
}

enum class InternalSearch { kDiamond, kHex };

struct CodecConfig {
  int gop_size = 100;
  int block_size = 16;
  int q = 5;
  MotionMode motion_mode = MotionMode::kInternalHex;
  ProvenanceMode provenance = ProvenanceMode::kT1;
  SearchConfig search;
  InternalSearch hybrid_search = InternalSearch::kHex;  // internal candidate for hybrids
  bool chroma_in_cost = false;
  MedianNorm median_norm = MedianNorm::kL2;
  std::string sequence = "sequence";  // flow lookup key

  void validate() const {
    if (gop_size < 1) throw InputError("gop size must be >= 1");
    if (q < 1) throw InputError("q must be >= 1");
    if (!valid_block_size(block_size)) throw InputError("block size must be 4, 8 or 16");
    SearchConfig s = search;
    s.block_size = block_size;
    s.validate();
  }

  SearchConfig effective_search() const {
    SearchConfig s = search;
    s.block_size = block_size;
    return s;
  }
};

enum class FrameType { kIntra, kPredicted };

struct FrameStats {
  int index = 0;
  FrameType type = FrameType::kIntra;
  std::uint64_t bits_motion = 0;
  std::uint64_t bits_residual = 0;
  std::uint64_t bits_header = 0;  // type flag + byte alignment
  std::uint64_t bits_total = 0;
  double psnr_y = 0.0;
  double psnr_u = 0.0;
  double psnr_v = 0.0;
  double psnr_combined = 0.0;
};

/// How one block's vector was chosen.
struct BlockDecision {
  int col = 0;
  int row = 0;
  MotionVector predictor;
  Candidate chosen;
  std::optional<Candidate> internal;  // search candidate (internal and hybrid modes)
  std::optional<Candidate> flow;      // flow candidate (flow and hybrid modes)
};

// Motion compensation --------------------------------------------------------

/// Prediction of a whole frame from `ref` with one vector per block; chroma
/// uses the halved vector.
inline Frame motion_compensate(const Frame& ref, const BlockMotionField& field) {
  const int bs = field.block_size;
  if (field.cols != (ref.width + bs - 1) / bs || field.rows != (ref.height + bs - 1) / bs) {
    throw InputError("block field grid does not match the frame");
  }
  Frame out(ref.width, ref.height, ref.index);
  for (int row = 0; row < field.rows; ++row) {
    for (int col = 0; col < field.cols; ++col) {
      const MotionVector mv = field.at(col, row);
      for (PlaneId id : kAllPlanes) {
        const bool luma = id == PlaneId::kY;
        const int size = luma ? bs : bs / 2;
        const int x0 = col * size;
        const int y0 = row * size;
        const auto pred = predict_block(ref.plane(id), x0, y0, size,
                                        luma ? mv : chroma_vector(mv));
        Plane& dst = out.plane(id);
        for (int y = 0; y < size && y0 + y < dst.height; ++y) {
          for (int x = 0; x < size && x0 + x < dst.width; ++x) {
            dst.at(x0 + x, y0 + y) = pred[static_cast<std::size_t>(y) * size + x];
          }
        }
      }
    }
  }
  return out;
}

// Motion selection -----------------------------------------------------------

/// Chooses the vector for the block at (col, row). `flow_vector` is the
/// downsampled flow estimate for this block (required by flow and hybrid
/// modes). Hybrids price exactly two candidates, internal search and flow,
/// and keep the cheaper; ties go to the search candidate.
inline BlockDecision select_block_vector(MotionMode mode, const Frame& cur,
                                         const Frame& ref_decoded, int col, int row,
                                         MotionVector predictor,
                                         std::optional<MotionVector> flow_vector,
                                         const RDParams& rd, const SearchConfig& search,
                                         InternalSearch hybrid_search = InternalSearch::kHex) {
  const int bs = search.block_size;
  const BlockEvaluator eval(cur, ref_decoded, col * bs, row * bs, bs, predictor, rd);
  BlockDecision d;
  d.col = col;
  d.row = row;
  d.predictor = predictor;

  auto internal = [&](InternalSearch which) {
    const SearchResult r = which == InternalSearch::kDiamond ? diamond_search(eval, search)
                                                             : hex_search(eval, search);
    return eval.evaluate(r.mv);
  };
  auto need_flow = [&] {
    if (!flow_vector) {
      throw InputError(std::string("motion mode ") + motion_mode_name(mode) +
                       " needs a flow field");
    }
    return eval.evaluate(*flow_vector);
  };

  switch (mode) {
    case MotionMode::kZero:
      d.chosen = eval.evaluate({0, 0});
      break;
    case MotionMode::kInternalDiamond:
      d.internal = internal(InternalSearch::kDiamond);
      d.chosen = *d.internal;
      break;
    case MotionMode::kInternalHex:
      d.internal = internal(InternalSearch::kHex);
      d.chosen = *d.internal;
      break;
    case MotionMode::kFlowMean:
    case MotionMode::kFlowMedian:
      d.flow = need_flow();
      d.chosen = *d.flow;
      break;
    case MotionMode::kHybridMean:
    case MotionMode::kHybridMedian:
      d.flow = need_flow();
      d.internal = internal(hybrid_search);
      d.chosen = d.flow->cost < d.internal->cost ? *d.flow : *d.internal;
      break;
  }
  return d;
}

// Residual tiles -------------------------------------------------------------

namespace detail {

inline constexpr char kStreamMagic[4] = {'F', 'C', 'L', '1'};
inline constexpr int kStreamHeaderBits = 18 * 8;

inline int transform_size_for(int block_size_on_plane) {
  return std::min(8, block_size_on_plane);
}

inline std::uint8_t clamp_pixel(double v) {
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

/// Reconstructs one tile from its levels and writes the in-bounds pixels.
inline void reconstruct_tile(Plane& recon, std::span<const std::uint8_t> pred, int block_size,
                             int x0, int y0, int tx, int ty, int n,
                             std::span<const int> raster_levels, int q) {
  const auto coeffs = dequantize(raster_levels, q);
  const auto residual = dct_inverse(coeffs, n);
  for (int y = 0; y < n; ++y) {
    const int py = y0 + ty + y;
    if (py >= recon.height) break;
    for (int x = 0; x < n; ++x) {
      const int px = x0 + tx + x;
      if (px >= recon.width) break;
      const double p = pred[static_cast<std::size_t>(ty + y) * block_size + tx + x];
      recon.at(px, py) = clamp_pixel(p + residual[static_cast<std::size_t>(y) * n + x]);
    }
  }
}

/// Codes cur - pred for one plane block, returns residual bits.
inline std::uint64_t encode_plane_block(BitWriter& w, const Frame& cur, PlaneId id,
                                        Plane& recon, std::span<const std::uint8_t> pred,
                                        int x0, int y0, int size, int q) {
  const auto block = extract_block(cur, id, x0, y0, size);
  const int n = transform_size_for(size);
  std::uint64_t bits = 0;
  std::vector<double> tile(static_cast<std::size_t>(n) * n);
  for (int ty = 0; ty < size; ty += n) {
    for (int tx = 0; tx < size; tx += n) {
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const std::size_t i = static_cast<std::size_t>(ty + y) * size + tx + x;
          tile[static_cast<std::size_t>(y) * n + x] =
              static_cast<double>(block[i]) - static_cast<double>(pred[i]);
        }
      }
      const auto levels = quantize(dct_forward(tile, n), q);
      const auto scanned = to_scan_order(levels, n);
      const std::size_t before = w.bit_count();
      write_residual(w, scanned);
      bits += w.bit_count() - before;
      reconstruct_tile(recon, pred, size, x0, y0, tx, ty, n, levels, q);
    }
  }
  return bits;
}

inline void decode_plane_block(BitReader& r, Plane& recon,
                               std::span<const std::uint8_t> pred, int x0, int y0,
                               int size, int q) {
  const int n = transform_size_for(size);
  for (int ty = 0; ty < size; ty += n) {
    for (int tx = 0; tx < size; tx += n) {
      const auto scanned = read_residual(r, n * n);
      const auto levels = from_scan_order(scanned, n);
      reconstruct_tile(recon, pred, size, x0, y0, tx, ty, n, levels, q);
    }
  }
}

inline std::vector<std::uint8_t> flat_prediction(int size) {
  return std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size, 128);
}

struct PlaneBlock {
  PlaneId id;
  int x0, y0, size;
  MotionVector mv;
};

/// Plane-local geometry of luma block (col, row).
inline std::array<PlaneBlock, 3> plane_blocks(int col, int row, int bs, MotionVector mv) {
  const MotionVector cmv = chroma_vector(mv);
  return {{{PlaneId::kY, col * bs, row * bs, bs, mv},
           {PlaneId::kU, col * bs / 2, row * bs / 2, bs / 2, cmv},
           {PlaneId::kV, col * bs / 2, row * bs / 2, bs / 2, cmv}}};
}

}  // namespace detail

// Encoder --------------------------------------------------------------------

struct EncodeResult {
  std::vector<FrameStats> stats;
  std::vector<Frame> reconstructions;
  Bytes bitstream;
  std::uint64_t stream_header_bits = detail::kStreamHeaderBits;
  std::vector<std::vector<BlockDecision>> decisions;  // per frame; empty for intra
  std::vector<BlockMotionField> motion;               // per frame; zero for intra
};

inline void write_stream_header(BitWriter& w, const CodecConfig& c, int width, int height,
                                std::uint32_t frame_count) {
  for (char ch : detail::kStreamMagic) w.put_bits(static_cast<std::uint8_t>(ch), 8);
  w.put_bits(static_cast<std::uint32_t>(width), 16);
  w.put_bits(static_cast<std::uint32_t>(height), 16);
  w.put_bits(static_cast<std::uint32_t>(c.q), 16);
  w.put_bits(static_cast<std::uint32_t>(c.block_size), 8);
  w.put_bits(static_cast<std::uint32_t>(c.gop_size), 16);
  w.put_bits(static_cast<std::uint32_t>(c.motion_mode), 8);
  w.put_bits(frame_count, 32);
}

/// Encodes `frames` (all the same size). Flow and hybrid modes pull one flow
/// field per predicted frame from `provider`.
inline EncodeResult encode_sequence(const std::vector<Frame>& frames, const CodecConfig& config,
                                    FlowProvider* provider = nullptr) {
  config.validate();
  if (frames.empty()) throw InputError("no frames to encode");
  if (uses_flow(config.motion_mode) && provider == nullptr) {
    throw InputError(std::string("motion mode ") + motion_mode_name(config.motion_mode) +
                     " needs a flow provider");
  }
  if (config.q > 0xFFFF || config.gop_size > 0xFFFF) {
    throw InputError("q and gop size must fit in 16 bits");
  }
  const int width = frames.front().width;
  const int height = frames.front().height;
  if (width > 0xFFFF || height > 0xFFFF) throw InputError("frame too large");
  for (const auto& f : frames) {
    if (f.width != width || f.height != height) {
      throw InputError("frame " + std::to_string(f.index) + " differs in size");
    }
  }

  const int bs = config.block_size;
  const SearchConfig search = config.effective_search();
  const RDParams rd(config.q, config.chroma_in_cost);

  EncodeResult result;
  BitWriter w;
  write_stream_header(w, config, width, height, static_cast<std::uint32_t>(frames.size()));

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& cur = frames[i];
    const bool intra = i % static_cast<std::size_t>(config.gop_size) == 0;
    Frame recon(width, height, cur.index);
    FrameStats st;
    st.index = cur.index;
    st.type = intra ? FrameType::kIntra : FrameType::kPredicted;
    const std::size_t frame_start = w.bit_count();
    w.put_bit(!intra);

    BlockMotionField field(width, height, bs);
    std::vector<BlockDecision> decisions;

    if (intra) {
      for (int row = 0; row < field.rows; ++row) {
        for (int col = 0; col < field.cols; ++col) {
          for (const auto& pb : detail::plane_blocks(col, row, bs, {})) {
            st.bits_residual += detail::encode_plane_block(
                w, cur, pb.id, recon.plane(pb.id), detail::flat_prediction(pb.size), pb.x0,
                pb.y0, pb.size, config.q);
          }
        }
      }
    } else {
      const Frame& ref = result.reconstructions.back();
      std::optional<BlockMotionField> flow_blocks;
      if (uses_flow(config.motion_mode)) {
        const DenseFlowField dense =
            provider->get_flow(config.sequence, static_cast<int>(i), cur, ref);
        flow_blocks = downsample_flow(dense, bs, flow_method(config.motion_mode),
                                      config.median_norm);
      }
      for (int row = 0; row < field.rows; ++row) {
        for (int col = 0; col < field.cols; ++col) {
          const MotionVector pred_mv = median_predictor(field, col, row);
          std::optional<MotionVector> fv;
          if (flow_blocks) fv = flow_blocks->at(col, row);
          BlockDecision d = select_block_vector(config.motion_mode, cur, ref, col, row,
                                                pred_mv, fv, rd, search,
                                                config.hybrid_search);
          const MotionVector mv = d.chosen.mv;
          field.at(col, row) = mv;

          const std::size_t before = w.bit_count();
          w.put_se(mv.dx - pred_mv.dx);
          w.put_se(mv.dy - pred_mv.dy);
          st.bits_motion += w.bit_count() - before;

          for (const auto& pb : detail::plane_blocks(col, row, bs, mv)) {
            const auto pred = predict_block(ref.plane(pb.id), pb.x0, pb.y0, pb.size, pb.mv);
            st.bits_residual += detail::encode_plane_block(
                w, cur, pb.id, recon.plane(pb.id), pred, pb.x0, pb.y0, pb.size, config.q);
          }
          decisions.push_back(std::move(d));
        }
      }
    }
    w.align();
    st.bits_total = w.bit_count() - frame_start;
    st.bits_header = st.bits_total - st.bits_motion - st.bits_residual;

    const FramePsnr p = psnr(cur, recon);
    st.psnr_y = p.y;
    st.psnr_u = p.u;
    st.psnr_v = p.v;
    st.psnr_combined = p.combined;

    result.stats.push_back(st);
    result.reconstructions.push_back(std::move(recon));
    result.decisions.push_back(std::move(decisions));
    result.motion.push_back(std::move(field));
  }
  result.bitstream = w.take();
  return result;
}

// Decoder --------------------------------------------------------------------

struct StreamHeader {
  int width = 0;
  int height = 0;
  int q = 0;
  int block_size = 0;
  int gop_size = 0;
  MotionMode motion_mode = MotionMode::kZero;
  std::uint32_t frame_count = 0;
};

struct DecodeResult {
  StreamHeader header;
  std::vector<Frame> frames;
};

inline StreamHeader read_stream_header(BitReader& r) {
  for (char ch : detail::kStreamMagic) {
    if (r.get_bits(8) != static_cast<std::uint8_t>(ch)) {
      throw FormatError("bad bitstream magic (expected FCL1)", 0);
    }
  }
  StreamHeader h;
  h.width = static_cast<int>(r.get_bits(16));
  h.height = static_cast<int>(r.get_bits(16));
  h.q = static_cast<int>(r.get_bits(16));
  h.block_size = static_cast<int>(r.get_bits(8));
  h.gop_size = static_cast<int>(r.get_bits(16));
  const std::uint32_t mode = r.get_bits(8);
  h.frame_count = r.get_bits(32);
  if (h.width <= 0 || h.height <= 0 || h.width % 2 || h.height % 2) {
    throw FormatError("bad frame dimensions in stream header", 4);
  }
  if (h.q < 1) throw FormatError("bad q in stream header", 8);
  if (!valid_block_size(h.block_size)) throw FormatError("bad block size in stream header", 10);
  if (h.gop_size < 1) throw FormatError("bad gop size in stream header", 11);
  if (mode > static_cast<std::uint32_t>(MotionMode::kHybridMedian)) {
    throw FormatError("bad motion mode in stream header", 13);
  }
  h.motion_mode = static_cast<MotionMode>(mode);
  return h;
}

inline DecodeResult decode_sequence(std::span<const std::uint8_t> bitstream) {
  BitReader r(bitstream);
  DecodeResult out;
  out.header = read_stream_header(r);
  const StreamHeader& h = out.header;
  const int bs = h.block_size;
  const int cols = (h.width + bs - 1) / bs;
  const int rows = (h.height + bs - 1) / bs;

  for (std::uint32_t i = 0; i < h.frame_count; ++i) {
    const std::size_t frame_pos = r.byte_position();
    const bool predicted = r.get_bit();
    const bool expect_intra = i % static_cast<std::uint32_t>(h.gop_size) == 0;
    if (predicted == expect_intra) {
      throw FormatError("frame " + std::to_string(i) + " has the wrong frame type", frame_pos);
    }
    if (predicted && out.frames.empty()) {
      throw FormatError("predicted frame without reference", frame_pos);
    }
    Frame recon(h.width, h.height, static_cast<int>(i));
    BlockMotionField field(h.width, h.height, bs);
    for (int row = 0; row < rows; ++row) {
      for (int col = 0; col < cols; ++col) {
        MotionVector mv{};
        if (predicted) {
          const std::size_t at = r.byte_position();
          const MotionVector pred_mv = median_predictor(field, col, row);
          mv.dx = pred_mv.dx + r.get_se();
          mv.dy = pred_mv.dy + r.get_se();
          if (std::abs(mv.dx) > kDefaultVectorBound || std::abs(mv.dy) > kDefaultVectorBound) {
            throw FormatError("motion vector out of range", at);
          }
          field.at(col, row) = mv;
        }
        for (const auto& pb : detail::plane_blocks(col, row, bs, mv)) {
          const auto pred =
              predicted ? predict_block(out.frames.back().plane(pb.id), pb.x0, pb.y0,
                                        pb.size, pb.mv)
                        : detail::flat_prediction(pb.size);
          detail::decode_plane_block(r, recon.plane(pb.id), pred, pb.x0, pb.y0, pb.size, h.q);
        }
      }
    }
    r.align();
    out.frames.push_back(std::move(recon));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last frame", r.byte_position());
  return out;
}

/// Decodes and checks that the stream was produced with `config`.
inline std::vector<Frame> decode_sequence(std::span<const std::uint8_t> bitstream,
                                          const CodecConfig& config) {
  DecodeResult d = decode_sequence(bitstream);
  if (d.header.q != config.q || d.header.block_size != config.block_size ||
      d.header.gop_size != config.gop_size || d.header.motion_mode != config.motion_mode) {
    throw InputError("bitstream parameters do not match the codec configuration");
  }
  return std::move(d.frames);
}

/// Mean bits per frame and mean luma PSNR over a run.
inline RDPoint rd_point(int q, const std::vector<FrameStats>& stats) {
  if (stats.empty()) throw InputError("no frame statistics for an RD point");
  RDPoint p;
  p.q = q;
  double bits = 0.0;
  double ps = 0.0;
  for (const auto& s : stats) {
    bits += static_cast<double>(s.bits_total);
    ps += s.psnr_y;
  }
  p.rate = bits / static_cast<double>(stats.size());
  p.psnr = ps / static_cast<double>(stats.size());
  return p;
}

}  // namespace flowcodec

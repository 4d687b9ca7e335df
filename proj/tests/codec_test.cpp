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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "flowcodec/codec.hpp"
#include "test_util.hpp"

namespace flowcodec {
namespace {

using testing::MemoryFlowProvider;

// Motion compensation written out pixel by pixel from the definition.
Frame reference_compensate(const Frame& ref, const BlockMotionField& field) {
  Frame out(ref.width, ref.height);
  for (PlaneId id : kAllPlanes) {
    const bool luma = id == PlaneId::kY;
    const int size = luma ? field.block_size : field.block_size / 2;
    const Plane& src = ref.plane(id);
    Plane& dst = out.plane(id);
    for (int y = 0; y < dst.height; ++y)
      for (int x = 0; x < dst.width; ++x) {
        MotionVector mv = field.at(x / size, y / size);
        if (!luma) {
          // half of a quarter-pel value, ties away from zero
          auto half = [](int q) { return int(std::copysign(std::floor(std::abs(q) / 2.0 + 0.5), q)); };
          mv = {half(mv.dx), half(mv.dy)};
        }
        const double sx = std::clamp(x + mv.dx / 4.0, 0.0, double(src.width - 1));
        const double sy = std::clamp(y + mv.dy / 4.0, 0.0, double(src.height - 1));
        const int ix = int(sx), iy = int(sy);
        const double a = sx - ix, b = sy - iy;
        const double v = (1 - a) * (1 - b) * src.clamped(ix, iy) + a * (1 - b) * src.clamped(ix + 1, iy) +
                         (1 - a) * b * src.clamped(ix, iy + 1) + a * b * src.clamped(ix + 1, iy + 1);
        dst.at(x, y) = static_cast<std::uint8_t>(std::floor(v + 0.5));
      }
  }
  return out;
}

CodecConfig small_config(MotionMode mode, int q, int bs = 16) {
  CodecConfig c;
  c.motion_mode = mode;
  c.q = q;
  c.block_size = bs;
  c.search.search_range = 8;
  return c;
}

TEST(MotionCompensate, ZeroFieldIsIdentity) {
  std::mt19937 rng(1);
  const Frame ref = testing::random_frame(40, 24, rng);
  EXPECT_TRUE(motion_compensate(ref, BlockMotionField(40, 24, 16)).same_pixels(ref));
}

TEST(MotionCompensate, ConstantIntegerShift) {
  const Frame ref = testing::textured_frame(64, 64, 0, 0);
  BlockMotionField f(64, 64, 8);
  for (auto& v : f.vectors) v = {12, 0};
  const Frame pred = motion_compensate(ref, f);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 60; ++x) EXPECT_EQ(pred.y.at(x, y), ref.y.at(x + 3, y));
  // chroma moves by 1.5 px: (12 -> 6 quarter-pel)
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 28; ++x)
      EXPECT_EQ(pred.u.at(x, y), (ref.u.at(x + 1, y) + ref.u.at(x + 2, y) + 1) / 2);
}

TEST(MotionCompensate, RandomFieldsMatchReference) {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> mv(-40, 40);
  for (int bs : {4, 8, 16}) {
    for (int t = 0; t < 10; ++t) {
      const Frame ref = testing::random_frame(36, 28, rng);
      BlockMotionField f(36, 28, bs);
      for (auto& v : f.vectors) v = {mv(rng), mv(rng)};
      EXPECT_TRUE(motion_compensate(ref, f).same_pixels(reference_compensate(ref, f)));
    }
  }
  EXPECT_THROW(motion_compensate(Frame(32, 32), BlockMotionField(16, 16, 16)), InputError);
}

TEST(SelectBlockVector, ZeroMode) {
  std::mt19937 rng(3);
  const Frame cur = testing::random_frame(32, 32, rng), ref = testing::random_frame(32, 32, rng);
  const RDParams rd(5);
  const SearchConfig s{8, 16, true};
  const auto d = select_block_vector(MotionMode::kZero, cur, ref, 1, 1, {}, std::nullopt, rd, s);
  EXPECT_EQ(d.chosen.mv, (MotionVector{0, 0}));
  EXPECT_EQ(d.chosen.bits, 2);
  EXPECT_FALSE(d.internal.has_value());
  EXPECT_THROW(select_block_vector(MotionMode::kFlowMean, cur, ref, 0, 0, {}, std::nullopt, rd, s),
               InputError);
}

TEST(SelectBlockVector, HybridIsMinOfTwoIndependentCosts) {
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> fv(-24, 24), shift(-6, 6), qd(1, 45);
  int flow_won = 0, internal_won = 0;
  for (int t = 0; t < 300; ++t) {
    const int a = shift(rng), b = shift(rng);
    const Frame ref = testing::textured_frame(48, 48, t, 2 * t, 0, t % 5);
    const Frame cur = testing::textured_frame(48, 48, t + a, 2 * t + b, 1, t % 5);
    const RDParams rd(qd(rng));
    // A short search range often cannot reach the true shift; the flow can.
    const SearchConfig s{2, 16, t % 2 == 0};
    const MotionVector pred{fv(rng), fv(rng)};
    const MotionVector flow = t % 2 ? MotionVector{4 * a, 4 * b} : MotionVector{fv(rng), fv(rng)};
    const int col = t % 3, row = (t / 3) % 3;
    for (auto mode : {MotionMode::kHybridMean, MotionMode::kHybridMedian}) {
      const auto d = select_block_vector(mode, cur, ref, col, row, pred, flow, rd, s);
      ASSERT_TRUE(d.internal && d.flow);
      // Re-price both candidates from scratch.
      auto price = [&](MotionVector mv) {
        return rd_cost(sad(cur, ref, col * 16, row * 16, 16, mv), mv, pred, rd);
      };
      const double c_int = price(d.internal->mv);
      const double c_flow = price(flow);
      EXPECT_EQ(d.flow->mv, flow);
      EXPECT_EQ(d.internal->mv, hex_search(cur, ref, col * 16, row * 16, s, rd, pred).mv);
      EXPECT_EQ(d.chosen.cost, std::min(c_int, c_flow));
      EXPECT_EQ(d.chosen.mv, c_flow < c_int ? flow : d.internal->mv);
      (c_flow < c_int ? flow_won : internal_won)++;
    }
  }
  EXPECT_GT(flow_won, 0);
  EXPECT_GT(internal_won, 0);
}

TEST(SelectBlockVector, HybridTieKeepsSearchCandidate) {
  const Frame ref = testing::textured_frame(48, 48, 0, 0);
  const Frame cur = testing::textured_frame(48, 48, 2, 0, 1);
  const RDParams rd(5);
  const SearchConfig s{8, 16, true};
  const auto internal = select_block_vector(MotionMode::kInternalHex, cur, ref, 1, 1, {}, std::nullopt, rd, s);
  const auto d = select_block_vector(MotionMode::kHybridMedian, cur, ref, 1, 1, {}, internal.chosen.mv, rd, s);
  EXPECT_EQ(d.chosen.mv, internal.chosen.mv);
  EXPECT_EQ(d.chosen.cost, internal.chosen.cost);
  EXPECT_EQ(d.flow->cost, d.internal->cost);
}

class RoundTrip : public ::testing::TestWithParam<MotionMode> {};

TEST_P(RoundTrip, DecoderMatchesEncoderAndBitsAreExact) {
  const MotionMode mode = GetParam();
  const auto frames = testing::mixed_motion_sequence(48, 32, 7);
  for (int q : {1, 6, 30}) {
    for (int bs : {4, 8, 16}) {
      CodecConfig c = small_config(mode, q, bs);
      c.gop_size = 4;  // intra at 0 and 4, a short GOP tail
      MemoryFlowProvider flows(testing::translation_flows(48, 32, 7, 2.0f));
      const auto enc = encode_sequence(frames, c, &flows);
      std::uint64_t total = enc.stream_header_bits;
      for (const auto& s : enc.stats) {
        total += s.bits_total;
        EXPECT_EQ(s.bits_total, s.bits_motion + s.bits_residual + s.bits_header);
        EXPECT_LT(s.bits_header, 9u);
      }
      EXPECT_EQ(total, 8 * enc.bitstream.size());
      EXPECT_EQ(enc.stats[0].type, FrameType::kIntra);
      EXPECT_EQ(enc.stats[4].type, FrameType::kIntra);
      EXPECT_EQ(enc.stats[5].type, FrameType::kPredicted);
      const auto dec = decode_sequence(enc.bitstream, c);
      ASSERT_EQ(dec.size(), frames.size());
      for (std::size_t i = 0; i < dec.size(); ++i) {
        ASSERT_TRUE(dec[i].same_pixels(enc.reconstructions[i])) << "frame " << i << " q " << q;
        EXPECT_EQ(psnr(dec[i], enc.reconstructions[i]).combined, kPsnrCap);
        EXPECT_EQ(psnr(frames[i], enc.reconstructions[i]).y, enc.stats[i].psnr_y);
      }
      if (uses_flow(mode)) {
        EXPECT_EQ(flows.requested, (std::vector<int>{1, 2, 3, 5, 6}));
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllModes, RoundTrip, ::testing::ValuesIn(kAllMotionModes),
                         [](const auto& info) {
                           std::string n = motion_mode_name(info.param);
                           std::replace(n.begin(), n.end(), '-', '_');
                           return n;
                         });

TEST(Encode, FlowIsComputedAgainstDecodedReference) {
  const auto frames = testing::translating_sequence(32, 32, 3, 2);
  MemoryFlowProvider flows(testing::translation_flows(32, 32, 3, 2.0f));
  const auto enc = encode_sequence(frames, small_config(MotionMode::kFlowMedian, 20), &flows);
  ASSERT_EQ(flows.seen_refs.size(), 2u);
  EXPECT_TRUE(flows.seen_refs[0].same_pixels(enc.reconstructions[0]));
  EXPECT_TRUE(flows.seen_refs[1].same_pixels(enc.reconstructions[1]));
  EXPECT_FALSE(flows.seen_refs[0].same_pixels(frames[0]));
  // Flow modes code exactly the downsampled flow vector.
  for (const auto& d : enc.decisions[1]) EXPECT_EQ(d.chosen.mv, (MotionVector{-8, 0}));
}

TEST(Encode, SingleFrameIsIntraOnly) {
  const auto frames = testing::translating_sequence(32, 16, 1, 2);
  const auto enc = encode_sequence(frames, small_config(MotionMode::kInternalHex, 5));
  ASSERT_EQ(enc.stats.size(), 1u);
  EXPECT_EQ(enc.stats[0].type, FrameType::kIntra);
  EXPECT_EQ(enc.stats[0].bits_motion, 0u);
  EXPECT_EQ(decode_sequence(enc.bitstream).frames.size(), 1u);
}

TEST(Encode, FlatStaticSequenceCodesOnlyEmptyTiles) {
  // A mid-grey frame is reproduced exactly by intra, so every P residual is zero.
  Frame grey(64, 48);
  for (Plane* p : {&grey.y, &grey.u, &grey.v}) std::fill(p->data.begin(), p->data.end(), 128);
  std::vector<Frame> frames(4, grey);
  for (auto mode : kAllMotionModes) {
    for (int q : {8, 20, 40}) {
      MemoryFlowProvider flows(testing::translation_flows(64, 48, 4, 0.0f));
      const auto enc = encode_sequence(frames, small_config(mode, q, 16), &flows);
      for (std::size_t i = 1; i < 4; ++i) {
        // 12 blocks of 4 luma + 2 chroma tiles, one bit per empty tile; zero mvd costs 2 bits.
        EXPECT_EQ(enc.stats[i].bits_residual, 12u * 6u) << motion_mode_name(mode) << " q " << q;
        EXPECT_EQ(enc.stats[i].bits_motion, 12u * 2u);
        EXPECT_TRUE(enc.reconstructions[i].same_pixels(grey));
      }
    }
  }
}

TEST(Encode, TexturedStaticSequenceResidualIsSmallAndShrinking) {
  // Textured content: the first P frame only corrects intra quantisation error,
  // and later P frames correct less. A rounding quantiser does not zero it all.
  const Frame still = testing::textured_frame(64, 48, 10, 10);
  std::vector<Frame> frames(5, still);
  for (int i = 0; i < 5; ++i) frames[i].index = i;
  // Search modes are left out: against a lossy reference a quarter-pel shift
  // can legitimately beat (0,0).
  for (auto mode : {MotionMode::kZero, MotionMode::kFlowMean, MotionMode::kFlowMedian}) {
    for (int q : {16, 24, 30, 40}) {
      MemoryFlowProvider flows(testing::translation_flows(64, 48, 5, 0.0f));
      const auto enc = encode_sequence(frames, small_config(mode, q, 16), &flows);
      for (std::size_t i = 1; i < 5; ++i) {
        EXPECT_LT(enc.stats[i].bits_residual * 10, enc.stats[0].bits_residual) << "q " << q;
        EXPECT_LE(enc.stats[i].bits_residual, enc.stats[i - 1].bits_residual) << "q " << q;
        EXPECT_EQ(enc.motion[i].vectors, BlockMotionField(64, 48, 16).vectors);
      }
    }
  }
  // Before quantisation the zero-motion residual of a static pair is zero.
  const Frame pred = motion_compensate(still, BlockMotionField(64, 48, 16));
  EXPECT_EQ(plane_sse(pred.y, still.y), 0.0);
}

TEST(Encode, NearLosslessAtQOne) {
  std::mt19937 rng(5);
  std::vector<Frame> frames;
  for (int i = 0; i < 3; ++i) frames.push_back(testing::random_frame(32, 32, rng, i));
  for (auto mode : {MotionMode::kZero, MotionMode::kInternalDiamond}) {
    const auto enc = encode_sequence(frames, small_config(mode, 1));
    for (const auto& s : enc.stats) {
      EXPECT_GE(s.psnr_y, 50.0);
      EXPECT_GE(s.psnr_combined, 50.0);
    }
  }
}

TEST(Encode, MonotoneInQ) {
  const auto frames = testing::mixed_motion_sequence(64, 48, 6);
  for (auto mode : {MotionMode::kZero, MotionMode::kInternalHex, MotionMode::kHybridMedian}) {
    double last_rate = 1e300, last_psnr = 1e300;
    for (int q : {2, 5, 10, 15, 20, 25, 30, 35, 40}) {
      MemoryFlowProvider flows(testing::translation_flows(64, 48, 6, 2.0f));
      const auto enc = encode_sequence(frames, small_config(mode, q), &flows);
      const RDPoint p = rd_point(q, enc.stats);
      EXPECT_LE(p.rate, last_rate) << motion_mode_name(mode) << " q " << q;
      EXPECT_LE(p.psnr, last_psnr) << motion_mode_name(mode) << " q " << q;
      last_rate = p.rate;
      last_psnr = p.psnr;
    }
  }
}

TEST(Encode, MotionSearchBeatsZeroOnTranslation) {
  const auto frames = testing::translating_sequence(64, 64, 6, 2);
  for (int q : {5, 15, 30}) {
    const auto zero = encode_sequence(frames, small_config(MotionMode::kZero, q));
    const auto hex = encode_sequence(frames, small_config(MotionMode::kInternalHex, q));
    std::uint64_t rz = 0, rh = 0;
    for (std::size_t i = 1; i < frames.size(); ++i) {
      rz += zero.stats[i].bits_residual;
      rh += hex.stats[i].bits_residual;
    }
    EXPECT_GT(rz, rh) << "q " << q;
    // And the residual energy before quantisation, frame 1 against frame 0.
    const Frame zpred = motion_compensate(zero.reconstructions[0], zero.motion[1]);
    const Frame hpred = motion_compensate(hex.reconstructions[0], hex.motion[1]);
    EXPECT_GT(plane_sse(zpred.y, frames[1].y), plane_sse(hpred.y, frames[1].y));
  }
}

TEST(Encode, ConfigErrors) {
  const auto frames = testing::translating_sequence(32, 32, 2, 2);
  EXPECT_THROW(encode_sequence({}, small_config(MotionMode::kZero, 5)), InputError);
  EXPECT_THROW(encode_sequence(frames, small_config(MotionMode::kFlowMean, 5)), InputError);
  EXPECT_THROW(encode_sequence(frames, small_config(MotionMode::kZero, 0)), InputError);
  CodecConfig c = small_config(MotionMode::kZero, 5);
  c.gop_size = 0;
  EXPECT_THROW(encode_sequence(frames, c), InputError);
  std::vector<Frame> mixed = {Frame(32, 32), Frame(32, 16)};
  EXPECT_THROW(encode_sequence(mixed, small_config(MotionMode::kZero, 5)), InputError);
  EXPECT_THROW(rd_point(5, {}), InputError);
}

TEST(Decode, RejectsMalformedStreams) {
  const auto frames = testing::translating_sequence(32, 32, 3, 2);
  const CodecConfig c = small_config(MotionMode::kInternalHex, 10);
  const auto enc = encode_sequence(frames, c);
  Bytes b = enc.bitstream;

  Bytes bad_magic = b;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_sequence(bad_magic), FormatError);
  Bytes truncated(b.begin(), b.end() - 3);
  EXPECT_THROW(decode_sequence(truncated), FormatError);
  Bytes trailing = b;
  trailing.push_back(0);
  EXPECT_THROW(decode_sequence(trailing), FormatError);
  Bytes bad_bs = b;
  bad_bs[10] = 12;
  EXPECT_THROW(decode_sequence(bad_bs), FormatError);
  Bytes bad_mode = b;
  bad_mode[13] = 9;
  EXPECT_THROW(decode_sequence(bad_mode), FormatError);
  Bytes more_frames = b;
  more_frames[17] = 4;
  EXPECT_THROW(decode_sequence(more_frames), FormatError);
  EXPECT_THROW(decode_sequence(Bytes{}), FormatError);

  CodecConfig other = c;
  other.q = 11;
  EXPECT_THROW(decode_sequence(b, other), InputError);
  EXPECT_EQ(decode_sequence(b).header.motion_mode, MotionMode::kInternalHex);
}

TEST(Modes, NamesRoundTrip) {
  for (auto m : kAllMotionModes) EXPECT_EQ(parse_motion_mode(motion_mode_name(m)), m);
  EXPECT_THROW(parse_motion_mode("bogus"), InputError);
  EXPECT_TRUE(uses_flow(MotionMode::kHybridMean));
  EXPECT_FALSE(uses_flow(MotionMode::kInternalDiamond));
  EXPECT_EQ(flow_method(MotionMode::kFlowMedian), DownsampleMethod::kVectorMedian);
}

}  // namespace
}  // namespace flowcodec

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

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "flowcodec/media_io.hpp"
#include "test_util.hpp"

namespace flowcodec {
namespace {

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::string flo_bytes(float magic, std::int32_t w, std::int32_t h, const std::vector<float>& payload) {
  std::string s(12 + 4 * payload.size(), '\0');
  std::memcpy(s.data(), &magic, 4);  // host is little-endian in this build
  std::memcpy(s.data() + 4, &w, 4);
  std::memcpy(s.data() + 8, &h, 4);
  if (!payload.empty()) std::memcpy(s.data() + 12, payload.data(), 4 * payload.size());
  return s;
}

TEST(Y4m, MinimalStream) {
  std::string s = "YUV4MPEG2 W4 H4 F25:1 C420\nFRAME\n";
  for (int i = 0; i < 24; ++i) s += char(i);
  std::istringstream in(s);
  auto [h, frames] = read_y4m(in);
  EXPECT_EQ(h.width, 4);
  EXPECT_EQ(h.height, 4);
  EXPECT_EQ(h.frame_rate, (FrameRate{25, 1}));
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0].y.at(3, 3), 15);
  EXPECT_EQ(frames[0].u.at(0, 0), 16);
  EXPECT_EQ(frames[0].v.at(1, 1), 23);
}

TEST(Y4m, TruncationNamesFrame) {
  std::string s = "YUV4MPEG2 W4 H4 F25:1 C420\nFRAME\n" + std::string(24, 'a') + "FRAME\n" +
                  std::string(23, 'b');
  std::istringstream in(s);
  try {
    read_y4m(in);
    FAIL() << "expected truncation";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos) << e.what();
  }
}

TEST(Y4m, RejectsBadInput) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_y4m(in);
  };
  EXPECT_THROW(parse("YUV4MPEG W4 H4\n"), FormatError);
  EXPECT_THROW(parse("YUV4MPEG2 W4 H4 C444\n"), FormatError);
  EXPECT_THROW(parse("YUV4MPEG2 W5 H4\n"), FormatError);
  EXPECT_THROW(parse("YUV4MPEG2 Wabc H4\n"), FormatError);
  EXPECT_THROW(parse("YUV4MPEG2 W4 H4 F25\n"), FormatError);
  EXPECT_THROW(parse("YUV4MPEG2 W4 H4\nFRAMX\n" + std::string(24, 'a')), FormatError);
  EXPECT_THROW(parse(""), FormatError);
  // Missing C tag means 4:2:0; frame parameters after FRAME are allowed.
  const auto [h, f] = parse("YUV4MPEG2 W2 H2 F30000:1001 Ip A1:1 XYSCSS=420\nFRAME Ixx\n" + std::string(6, 'z'));
  EXPECT_EQ(h.colorspace, "");
  EXPECT_EQ(h.interlace, "p");
  EXPECT_EQ(f.size(), 1u);
}

TEST(Y4m, RoundTripCanonicalStreams) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> dim(1, 12), count(0, 4);
  for (int t = 0; t < 40; ++t) {
    SequenceHeader h;
    h.width = 2 * dim(rng);
    h.height = 2 * dim(rng);
    h.frame_rate = {24 + t, 1 + t % 3};
    h.colorspace = t % 3 == 0 ? "" : (t % 3 == 1 ? "420" : "420jpeg");
    if (t % 4 == 0) h.interlace = "p";
    if (t % 5 == 0) h.aspect = "1:1";
    std::vector<Frame> frames;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) frames.push_back(testing::random_frame(h.width, h.height, rng, i));
    const std::string s = write_y4m(h, frames);
    std::istringstream in(s);
    const auto [h2, f2] = read_y4m(in);
    EXPECT_EQ(h2, h);
    ASSERT_EQ(f2.size(), frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) EXPECT_TRUE(f2[i].same_pixels(frames[i]));
    EXPECT_EQ(write_y4m(h2, f2), s);
  }
  SequenceHeader h;
  h.width = h.height = 4;
  EXPECT_EQ(write_y4m(h, {}), "YUV4MPEG2 W4 H4 F25:1 C420\n");
  EXPECT_THROW(write_y4m(h, {Frame(6, 4)}), InputError);
}

TEST(Flo, SinglePixel) {
  const auto b = to_bytes(flo_bytes(202021.25f, 1, 1, {1.5f, -2.0f}));
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "PIEH");
  const auto f = read_flo(b);
  EXPECT_EQ(f.width, 1);
  EXPECT_EQ(f.at(0, 0).u, 1.5f);
  EXPECT_EQ(f.at(0, 0).v, -2.0f);
}

TEST(Flo, Errors) {
  EXPECT_THROW(read_flo(to_bytes(flo_bytes(202021.0f, 1, 1, {0, 0}))), FormatError);
  EXPECT_THROW(read_flo(to_bytes(flo_bytes(202021.25f, 2, 1, {0, 0}))), FormatError);
  EXPECT_THROW(read_flo(to_bytes(flo_bytes(202021.25f, 0, 1, {}))), FormatError);
  EXPECT_THROW(read_flo(to_bytes(flo_bytes(202021.25f, 1 << 30, 1 << 30, {0, 0}))), FormatError);
  EXPECT_THROW(read_flo(to_bytes(flo_bytes(202021.25f, 1, 1, {0, 0, 0, 0}))), FormatError);
  EXPECT_THROW(read_flo(Bytes{1, 2, 3}), FormatError);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  try {
    read_flo(to_bytes(flo_bytes(202021.25f, 2, 1, {nan, 0, 1, nan})));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos) << e.what();
  }
}

TEST(Flo, UnknownSentinelBecomesZero) {
  FloReadStats stats;
  const auto f = read_flo(to_bytes(flo_bytes(202021.25f, 3, 1, {1e10f, 0, 2, 3, 0, -2e9f})), &stats);
  EXPECT_EQ(stats.unknown_replaced, 2u);
  EXPECT_EQ(f.at(0, 0).u, 0.0f);
  EXPECT_EQ(f.at(1, 0).v, 3.0f);
  EXPECT_EQ(f.at(2, 0).v, 0.0f);
}

TEST(Flo, WriteLayoutAndRoundTrip) {
  const std::string z = write_flo(DenseFlowField(2, 2));
  ASSERT_EQ(z.size(), 12u + 32u);
  EXPECT_EQ(z.substr(0, 4), "PIEH");
  EXPECT_EQ(z.substr(12), std::string(32, '\0'));
  std::mt19937 rng(2);
  for (auto [w, h] : {std::pair{1, 1}, std::pair{7, 3}, std::pair{64, 40}}) {
    const auto f = testing::random_flow(w, h, rng, 100.0f);
    const auto b = to_bytes(write_flo(f));
    const auto g = read_flo(b);
    ASSERT_EQ(g.width, w);
    ASSERT_EQ(g.height, h);
    for (std::size_t i = 0; i < f.vectors.size(); ++i) {
      EXPECT_EQ(g.vectors[i].u, f.vectors[i].u);
      EXPECT_EQ(g.vectors[i].v, f.vectors[i].v);
    }
  }
}

TEST(Pgm, Layout) {
  Plane p(2, 2);
  p.data = {0, 255, 128, 64};
  const std::string s = write_pgm(p);
  EXPECT_EQ(s, std::string("P5\n2 2\n255\n") + char(0) + char(255) + char(128) + char(64));
}

TEST(Metrics, CsvAndJsonRoundTrip) {
  EXPECT_EQ(write_metrics({}, MetricsFormat::kCsv), "sequence,mode,q,rate_bits_per_frame,psnr_db\n");
  EXPECT_TRUE(parse_metrics_csv(write_metrics({}, MetricsFormat::kCsv)).empty());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0, 1e6);
  std::vector<MetricRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back({"seq" + std::to_string(i % 4), "internal-hex", i, d(rng), d(rng) / 1e4});
  recs.push_back({"s", "zero", 1, 0.1, 99.0});
  EXPECT_EQ(parse_metrics_json(write_metrics(recs, MetricsFormat::kJson)), recs);
  EXPECT_EQ(parse_metrics_csv(write_metrics(recs, MetricsFormat::kCsv)), recs);
}

TEST(Metrics, MalformedRejected) {
  EXPECT_THROW(parse_metrics_csv("a,b\n"), FormatError);
  EXPECT_THROW(parse_metrics_csv("sequence,mode,q,rate_bits_per_frame,psnr_db\ns,m,1,x,2\n"), FormatError);
  EXPECT_THROW(parse_metrics_csv("sequence,mode,q,rate_bits_per_frame,psnr_db\ns,m,1,2\n"), FormatError);
  EXPECT_THROW(parse_metrics_json("{"), FormatError);
  EXPECT_THROW(parse_metrics_json("{}"), FormatError);
  EXPECT_THROW(parse_metrics_json(R"([{"sequence":"a"}])"), FormatError);
}

TEST(Files, AtomicWriteLeavesNoPartial) {
  const auto dir = testing::scratch_dir("atomic");
  write_file_atomic(dir / "x.bin", std::string("hello"));
  EXPECT_EQ(read_file(dir / "x.bin"), to_bytes("hello"));
  EXPECT_FALSE(std::filesystem::exists(dir / "x.bin.partial"));
  EXPECT_THROW(write_file_atomic(dir / "missing" / "y", std::string("z")), InputError);
  EXPECT_THROW(read_file(dir / "nope"), InputError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace flowcodec

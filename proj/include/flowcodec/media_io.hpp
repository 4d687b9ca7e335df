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

// Readers and writers for Y4M video, Middlebury .flo flow fields, binary PGM
// and the metrics CSV/JSON tables.

#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "flowcodec/core.hpp"

namespace flowcodec {

using Bytes = std::vector<std::uint8_t>;

// Files ----------------------------------------------------------------------

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes to a sibling temp file and renames it into place, so a failed run
/// never leaves a partial file under the final name.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::string_view contents) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_file_atomic(const std::filesystem::path& path, const Bytes& b) {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(b.data()),
                                           b.size()));
}

// Y4M ------------------------------------------------------------------------

struct FrameRate {
  int num = 25;
  int den = 1;
  bool operator==(const FrameRate&) const = default;
};

struct SequenceHeader {
  int width = 0;
  int height = 0;
  FrameRate frame_rate;
  std::string colorspace = "420";  // empty when the header omits the C tag
  std::string interlace;           // I tag value, if present
  std::string aspect;              // A tag value, if present
  bool operator==(const SequenceHeader&) const = default;
};

inline bool is_420_tag(const std::string& c) {
  return c.empty() || c == "420" || c == "420jpeg" || c == "420mpeg2" ||
         c == "420paldv";
}

/// Streaming Y4M reader; frames are pulled one at a time with next().
class Y4mReader {
 public:
  explicit Y4mReader(std::istream& in) : in_(in) { parse_header(); }

  const SequenceHeader& header() const { return header_; }

  std::optional<Frame> next() {
    std::string line;
    const std::size_t marker_pos = offset_;
    int c = in_.peek();
    if (c == std::char_traits<char>::eof()) return std::nullopt;
    if (!std::getline(in_, line)) return std::nullopt;
    offset_ += line.size() + 1;
    if (line.rfind("FRAME", 0) != 0) {
      throw FormatError("expected FRAME marker for frame " +
                            std::to_string(frame_index_),
                        marker_pos);
    }
    Frame f(header_.width, header_.height, frame_index_);
    for (PlaneId id : kAllPlanes) {
      auto& p = f.plane(id);
      in_.read(reinterpret_cast<char*>(p.data.data()),
               static_cast<std::streamsize>(p.data.size()));
      const auto got = static_cast<std::size_t>(in_.gcount());
      offset_ += got;
      if (got != p.data.size()) {
        throw FormatError("truncated payload in frame " +
                              std::to_string(frame_index_),
                          offset_);
      }
    }
    ++frame_index_;
    return f;
  }

 private:
  void parse_header() {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError("empty Y4M stream", 0);
    offset_ = line.size() + 1;
    std::istringstream tokens(line);
    std::string magic;
    tokens >> magic;
    if (magic != "YUV4MPEG2") throw FormatError("bad Y4M magic", 0);
    std::string tok;
    header_.colorspace.clear();
    while (tokens >> tok) try {
      const char key = tok[0];
      const std::string val = tok.substr(1);
      switch (key) {
        case 'W': header_.width = std::stoi(val); break;
        case 'H': header_.height = std::stoi(val); break;
        case 'F': {
          const auto colon = val.find(':');
          if (colon == std::string::npos) throw FormatError("bad frame rate", 0);
          header_.frame_rate = {std::stoi(val.substr(0, colon)),
                                std::stoi(val.substr(colon + 1))};
          break;
        }
        case 'I': header_.interlace = val; break;
        case 'A': header_.aspect = val; break;
        case 'C': header_.colorspace = val; break;
        default: break;  // X and unknown tags are ignored
      }
    } catch (const std::logic_error&) {
      throw FormatError("bad Y4M header tag '" + tok + "'", 0);
    }
    if (!is_420_tag(header_.colorspace)) {
      throw FormatError("unsupported colorspace C" + header_.colorspace, 0);
    }
    if (header_.width <= 0 || header_.height <= 0 || header_.width % 2 ||
        header_.height % 2) {
      throw FormatError("Y4M dimensions must be positive and even", 0);
    }
  }

  std::istream& in_;
  SequenceHeader header_;
  std::size_t offset_ = 0;
  int frame_index_ = 0;
};

inline std::pair<SequenceHeader, std::vector<Frame>> read_y4m(std::istream& in) {
  Y4mReader reader(in);
  std::vector<Frame> frames;
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return {reader.header(), std::move(frames)};
}

inline std::pair<SequenceHeader, std::vector<Frame>> read_y4m(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_y4m(in);
}

inline std::string y4m_header_line(const SequenceHeader& h) {
  std::string s = "YUV4MPEG2 W" + std::to_string(h.width) + " H" +
                  std::to_string(h.height) + " F" +
                  std::to_string(h.frame_rate.num) + ":" +
                  std::to_string(h.frame_rate.den);
  if (!h.interlace.empty()) s += " I" + h.interlace;
  if (!h.aspect.empty()) s += " A" + h.aspect;
  if (!h.colorspace.empty()) s += " C" + h.colorspace;
  return s + "\n";
}

/// Canonical tag order: W H F [I] [A] [C].
inline std::string write_y4m(const SequenceHeader& h, const std::vector<Frame>& frames) {
  std::string out = y4m_header_line(h);
  for (const Frame& f : frames) {
    if (f.width != h.width || f.height != h.height) {
      throw InputError("frame " + std::to_string(f.index) + " is " +
                       std::to_string(f.width) + "x" + std::to_string(f.height) +
                       ", header says " + std::to_string(h.width) + "x" +
                       std::to_string(h.height));
    }
    out += "FRAME\n";
    for (PlaneId id : kAllPlanes) {
      const auto& d = f.plane(id).data;
      out.append(reinterpret_cast<const char*>(d.data()), d.size());
    }
  }
  return out;
}

// Middlebury .flo ------------------------------------------------------------

inline constexpr float kFloMagic = 202021.25f;
inline constexpr float kFloUnknownThreshold = 1e9f;

namespace detail {

inline std::uint32_t load_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_le32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace detail

struct FloReadStats {
  std::size_t unknown_replaced = 0;  // sentinel components mapped to (0,0)
};

inline DenseFlowField read_flo(std::span<const std::uint8_t> bytes,
                               FloReadStats* stats = nullptr) {
  if (bytes.size() < 12) throw FormatError("flo header truncated", bytes.size());
  const float magic = std::bit_cast<float>(detail::load_le32(bytes.data()));
  if (magic != kFloMagic) throw FormatError("bad flo magic", 0);
  const auto w = static_cast<std::int32_t>(detail::load_le32(bytes.data() + 4));
  const auto h = static_cast<std::int32_t>(detail::load_le32(bytes.data() + 8));
  if (w <= 0 || h <= 0) {
    throw FormatError("bad flo dimensions " + std::to_string(w) + "x" +
                          std::to_string(h),
                      4);
  }
  const std::uint64_t need = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h) * 8;
  if (need > bytes.size() - 12) {
    throw FormatError("flo payload of " + std::to_string(w) + "x" +
                          std::to_string(h) + " exceeds stream",
                      bytes.size());
  }
  if (need < bytes.size() - 12) {
    throw FormatError("trailing bytes after flo payload", 12 + need);
  }
  DenseFlowField field(w, h);
  std::size_t nan_count = 0;
  std::size_t first_nan = 0;
  std::size_t unknown = 0;
  const std::uint8_t* p = bytes.data() + 12;
  for (std::size_t i = 0; i < field.vectors.size(); ++i, p += 8) {
    float u = std::bit_cast<float>(detail::load_le32(p));
    float v = std::bit_cast<float>(detail::load_le32(p + 4));
    if (std::isnan(u) || std::isnan(v)) {
      if (nan_count++ == 0) first_nan = static_cast<std::size_t>(p - bytes.data());
      continue;
    }
    if (std::fabs(u) > kFloUnknownThreshold || std::fabs(v) > kFloUnknownThreshold) {
      ++unknown;
      u = v = 0.0f;
    }
    field.vectors[i] = {u, v};
  }
  if (nan_count > 0) {
    throw FormatError("flo contains " + std::to_string(nan_count) +
                          " NaN vector(s)",
                      first_nan);
  }
  if (stats) stats->unknown_replaced = unknown;
  return field;
}

inline DenseFlowField read_flo(const std::filesystem::path& path,
                               FloReadStats* stats = nullptr) {
  const Bytes b = read_file(path);
  try {
    return read_flo(b, stats);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.position());
  }
}

inline std::string write_flo(const DenseFlowField& field) {
  std::string out;
  out.reserve(12 + field.vectors.size() * 8);
  detail::store_le32(out, std::bit_cast<std::uint32_t>(kFloMagic));
  detail::store_le32(out, static_cast<std::uint32_t>(field.width));
  detail::store_le32(out, static_cast<std::uint32_t>(field.height));
  for (const FlowVector& fv : field.vectors) {
    detail::store_le32(out, std::bit_cast<std::uint32_t>(fv.u));
    detail::store_le32(out, std::bit_cast<std::uint32_t>(fv.v));
  }
  return out;
}

// PGM ------------------------------------------------------------------------

inline std::string write_pgm(const Plane& plane) {
  std::string out = "P5\n" + std::to_string(plane.width) + " " +
                    std::to_string(plane.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(plane.data.data()), plane.data.size());
  return out;
}

// Metrics tables -------------------------------------------------------------

struct MetricRecord {
  std::string sequence;
  std::string mode;
  int q = 0;
  double rate_bits_per_frame = 0.0;
  double psnr_db = 0.0;
  bool operator==(const MetricRecord&) const = default;
};

enum class MetricsFormat { kCsv, kJson };

inline constexpr std::string_view kMetricsCsvHeader =
    "sequence,mode,q,rate_bits_per_frame,psnr_db";

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string write_metrics(const std::vector<MetricRecord>& records,
                                 MetricsFormat format) {
  if (format == MetricsFormat::kJson) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
      arr.push_back({{"sequence", r.sequence},
                     {"mode", r.mode},
                     {"q", r.q},
                     {"rate_bits_per_frame", r.rate_bits_per_frame},
                     {"psnr_db", r.psnr_db}});
    }
    return arr.dump(2) + "\n";
  }
  std::string out(kMetricsCsvHeader);
  out += "\n";
  for (const auto& r : records) {
    out += r.sequence + "," + r.mode + "," + std::to_string(r.q) + "," +
           format_double(r.rate_bits_per_frame) + "," + format_double(r.psnr_db) +
           "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw FormatError("bad number '" + s + "' on line " + std::to_string(line), line);
  }
  return v;
}

}  // namespace detail

inline std::vector<MetricRecord> parse_metrics_json(std::string_view text) {
  std::vector<MetricRecord> out;
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("metrics JSON: ") + e.what(), e.byte);
  }
  if (!arr.is_array()) throw FormatError("metrics JSON must be an array", 0);
  for (const auto& o : arr) {
    try {
      out.push_back({o.at("sequence").get<std::string>(), o.at("mode").get<std::string>(),
                     o.at("q").get<int>(), o.at("rate_bits_per_frame").get<double>(),
                     o.at("psnr_db").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("metrics JSON record: ") + e.what(), out.size());
    }
  }
  return out;
}

/// Parses the metrics CSV; positions in errors are line numbers.
inline std::vector<MetricRecord> parse_metrics_csv(std::string_view text) {
  std::vector<MetricRecord> out;
  std::size_t line_no = 0;
  for (std::string line : detail::split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kMetricsCsvHeader) throw FormatError("unexpected metrics CSV header", 1);
      continue;
    }
    auto cols = detail::split(line, ',');
    if (cols.size() != 5) {
      throw FormatError("expected 5 columns on line " + std::to_string(line_no), line_no);
    }
    out.push_back({cols[0], cols[1],
                   static_cast<int>(detail::parse_double(cols[2], line_no)),
                   detail::parse_double(cols[3], line_no),
                   detail::parse_double(cols[4], line_no)});
  }
  if (line_no == 0) throw FormatError("empty metrics CSV", 0);
  return out;
}

}  // namespace flowcodec

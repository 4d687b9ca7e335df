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

// Command-line front end. Subcommands:
//   encode           one sequence, one mode, one q -> bitstream + per-frame CSV
//   decode           bitstream -> Y4M
//   rd-sweep         sequences x modes x q grid -> RD CSV/JSON (+ median table)
//   bdrate           BD-Rate / BD-PSNR between two RD tables
//   epe              mean end-point error between .flo files or directories
//   downsample-flow  dense .flo -> block field painted back to a dense .flo
//
// Exit codes: 0 success, 1 input error, 2 internal error.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "flowcodec/codec.hpp"
#include "flowcodec/core.hpp"
#include "flowcodec/flow_adapt.hpp"
#include "flowcodec/flow_provider.hpp"
#include "flowcodec/media_io.hpp"
#include "flowcodec/metrics.hpp"

namespace flowcodec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInternalError = 2;

inline constexpr std::string_view kFrameStatsCsvHeader =
    "frame,type,bits_motion,bits_residual,bits_header,bits_total,psnr_y,psnr_u,psnr_v,"
    "psnr_combined";

inline std::string write_frame_stats_csv(const std::vector<FrameStats>& stats) {
  std::string out(kFrameStatsCsvHeader);
  out += "\n";
  for (const auto& s : stats) {
    out += std::to_string(s.index) + "," + (s.type == FrameType::kIntra ? "I" : "P") + "," +
           std::to_string(s.bits_motion) + "," + std::to_string(s.bits_residual) + "," +
           std::to_string(s.bits_header) + "," + std::to_string(s.bits_total) + "," +
           format_double(s.psnr_y) + "," + format_double(s.psnr_u) + "," +
           format_double(s.psnr_v) + "," + format_double(s.psnr_combined) + "\n";
  }
  return out;
}

/// Comma list of integers; "a:step:b" expands a range and "..." continues
/// the step of the two preceding values ("2,5,10,...,40").
inline std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  const auto items = detail::split(text, ',');
  bool pending_ellipsis = false;
  for (const auto& raw : items) {
    const std::string item = raw;
    if (item.empty()) continue;
    if (item == "...") {
      if (out.size() < 2) throw InputError("'...' needs two preceding values in '" + text + "'");
      pending_ellipsis = true;
      continue;
    }
    auto to_int = [&](const std::string& s) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::logic_error&) {
        throw InputError("bad integer '" + s + "' in '" + text + "'");
      }
    };
    const auto parts = detail::split(item, ':');
    std::vector<int> values;
    if (parts.size() == 3) {
      const int a = to_int(parts[0]), step = to_int(parts[1]), b = to_int(parts[2]);
      if (step <= 0) throw InputError("range step must be positive in '" + text + "'");
      for (int v = a; v <= b; v += step) values.push_back(v);
    } else if (parts.size() == 1) {
      values.push_back(to_int(item));
    } else {
      throw InputError("bad list item '" + item + "'");
    }
    if (pending_ellipsis) {
      const int step = out[out.size() - 1] - out[out.size() - 2];
      if (step <= 0) throw InputError("'...' needs an increasing sequence in '" + text + "'");
      for (int v = out.back() + step; v < values.front(); v += step) out.push_back(v);
      pending_ellipsis = false;
    }
    out.insert(out.end(), values.begin(), values.end());
  }
  if (pending_ellipsis) throw InputError("'...' must be followed by an end value");
  if (out.empty()) throw InputError("empty list '" + text + "'");
  return out;
}

inline std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& s : detail::split(text, ',')) {
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

/// Codec flags shared by encode and rd-sweep.
struct CodecFlags {
  int gop = 100;
  int block_size = 16;
  int search_range = 16;
  bool no_subpel = false;
  std::string provenance = "T1";
  std::string flow_dir;
  std::string estimator_cmd;
  double timeout_s = 60.0;
  std::string hybrid_search = "hex";
  bool chroma_cost = false;
  std::string median_norm = "l2";

  void add_to(CLI::App* app) {
    app->add_option("--gop", gop, "GOP size (frames)")->capture_default_str();
    app->add_option("--block-size", block_size, "Motion block size: 4, 8 or 16")
        ->capture_default_str();
    app->add_option("--search-range", search_range, "Integer-pel search range")
        ->capture_default_str();
    app->add_flag("--no-subpel", no_subpel, "Disable quarter-pel refinement");
    app->add_option("--provenance", provenance,
                    "Flow provenance for flow/hybrid modes: T0, T1 or T2")
        ->capture_default_str();
    app->add_option("--flow-dir", flow_dir,
                    "Directory of BACKWARD flows <dir>/<sequence>/frame_%04d.flo (T0/T1)");
    app->add_option("--estimator-cmd", estimator_cmd,
                    "T2 estimator: run as <cmd> <current.pgm> <reference.pgm> <out.flo>");
    app->add_option("--timeout", timeout_s, "T2 estimator timeout per frame (s)")
        ->capture_default_str();
    app->add_option("--hybrid-search", hybrid_search,
                    "Internal search used by hybrid modes: diamond or hex")
        ->capture_default_str();
    app->add_flag("--chroma-cost", chroma_cost, "Add weighted chroma SAD to the RD cost");
    app->add_option("--median-norm", median_norm, "Vector median distance: l2 or l1")
        ->capture_default_str();
  }

  CodecConfig config(MotionMode mode, int q, const std::string& sequence) const {
    CodecConfig c;
    c.gop_size = gop;
    c.block_size = block_size;
    c.q = q;
    c.motion_mode = mode;
    c.provenance = parse_provenance(provenance);
    c.search.search_range = search_range;
    c.search.block_size = block_size;
    c.search.refine_subpel = !no_subpel;
    if (hybrid_search == "hex") {
      c.hybrid_search = InternalSearch::kHex;
    } else if (hybrid_search == "diamond") {
      c.hybrid_search = InternalSearch::kDiamond;
    } else {
      throw InputError("--hybrid-search must be diamond or hex");
    }
    c.chroma_in_cost = chroma_cost;
    if (median_norm == "l2") {
      c.median_norm = MedianNorm::kL2;
    } else if (median_norm == "l1") {
      c.median_norm = MedianNorm::kL1;
    } else {
      throw InputError("--median-norm must be l1 or l2");
    }
    c.sequence = sequence;
    c.validate();
    return c;
  }

  std::unique_ptr<FlowProvider> provider(MotionMode mode) const {
    if (!uses_flow(mode)) return nullptr;
    FlowSourceConfig fc;
    fc.provenance = parse_provenance(provenance);
    fc.flow_dir = flow_dir;
    fc.estimator_cmd = estimator_cmd;
    fc.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
    return make_flow_provider(fc);
  }
};

inline std::string sequence_name(const std::filesystem::path& p) { return p.stem().string(); }

// encode ---------------------------------------------------------------------

struct EncodeArgs {
  std::string input, out, stats, recon, mode = "internal-hex", sequence;
  int q = 5;
  CodecFlags codec;
};

inline int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  const auto [header, frames] = read_y4m(std::filesystem::path(a.input));
  if (frames.empty()) throw InputError(a.input + " contains no frames");
  const std::string seq = a.sequence.empty() ? sequence_name(a.input) : a.sequence;
  const MotionMode mode = parse_motion_mode(a.mode);
  const CodecConfig config = a.codec.config(mode, a.q, seq);
  auto provider = a.codec.provider(mode);
  const EncodeResult r = encode_sequence(frames, config, provider.get());

  write_file_atomic(a.out, r.bitstream);
  if (!a.stats.empty()) write_file_atomic(a.stats, write_frame_stats_csv(r.stats));
  if (!a.recon.empty()) write_file_atomic(a.recon, write_y4m(header, r.reconstructions));

  const RDPoint p = rd_point(a.q, r.stats);
  out << "encoded " << frames.size() << " frames, mode " << a.mode << ", q " << a.q << ": "
      << format_double(p.rate) << " bits/frame, Y-PSNR " << format_double(p.psnr) << " dB\n";
  return kExitOk;
}

// decode ---------------------------------------------------------------------

struct DecodeArgs {
  std::string input, out;
  std::string frame_rate = "25:1";
};

inline int cmd_decode(const DecodeArgs& a, std::ostream& out) {
  const Bytes bytes = read_file(a.input);
  DecodeResult d = decode_sequence(bytes);
  SequenceHeader h;
  h.width = d.header.width;
  h.height = d.header.height;
  const auto parts = detail::split(a.frame_rate, ':');
  if (parts.size() != 2) throw InputError("--frame-rate must be num:den");
  try {
    h.frame_rate = {std::stoi(parts[0]), std::stoi(parts[1])};
  } catch (const std::logic_error&) {
    throw InputError("--frame-rate must be num:den");
  }
  write_file_atomic(a.out, write_y4m(h, d.frames));
  out << "decoded " << d.frames.size() << " frames (" << h.width << "x" << h.height << ")\n";
  return kExitOk;
}

// rd-sweep -------------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> inputs;
  std::string modes = "zero,internal-hex";
  std::string qs = "2,5,10,...,40";
  std::string out, aggregate, format = "csv";
  int jobs = 0;
  CodecFlags codec;
};

struct SweepJob {
  std::size_t sequence;
  std::size_t mode;
  int q;
};

inline std::vector<MetricRecord> run_sweep(const SweepArgs& a) {
  const auto qs = parse_int_list(a.qs);
  std::vector<MotionMode> modes;
  for (const auto& m : parse_name_list(a.modes)) modes.push_back(parse_motion_mode(m));
  if (modes.empty()) throw InputError("no modes given");
  if (a.inputs.empty()) throw InputError("no input sequences given");

  struct Sequence {
    std::string name;
    std::vector<Frame> frames;
  };
  std::vector<Sequence> sequences;
  for (const auto& in : a.inputs) {
    auto [h, frames] = read_y4m(std::filesystem::path(in));
    if (frames.empty()) throw InputError(in + " contains no frames");
    sequences.push_back({sequence_name(in), std::move(frames)});
  }
  // Validate configuration once, before spawning workers.
  for (MotionMode m : modes) {
    for (int q : qs) (void)a.codec.config(m, q, sequences.front().name);
    (void)a.codec.provider(m);
  }

  std::vector<SweepJob> jobs;
  for (std::size_t s = 0; s < sequences.size(); ++s)
    for (std::size_t m = 0; m < modes.size(); ++m)
      for (int q : qs) jobs.push_back({s, m, q});

  std::vector<MetricRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        const SweepJob& j = jobs[i];
        const Sequence& seq = sequences[j.sequence];
        const MotionMode mode = modes[j.mode];
        const CodecConfig config = a.codec.config(mode, j.q, seq.name);
        auto provider = a.codec.provider(mode);
        const EncodeResult r = encode_sequence(seq.frames, config, provider.get());
        const RDPoint p = rd_point(j.q, r.stats);
        records[i] = {seq.name, motion_mode_name(mode), j.q, p.rate, p.psnr};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned threads = a.jobs > 0 ? static_cast<unsigned>(a.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  // Deterministic order: sequence name, mode order as given, q ascending.
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& jx = jobs[x];
    const auto& jy = jobs[y];
    const auto& nx = sequences[jx.sequence].name;
    const auto& ny = sequences[jy.sequence].name;
    if (nx != ny) return nx < ny;
    if (jx.mode != jy.mode) return jx.mode < jy.mode;
    return jx.q < jy.q;
  });
  std::vector<MetricRecord> sorted;
  for (std::size_t i : order) sorted.push_back(records[i]);
  return sorted;
}

/// One row per (mode, q): the median over sequences.
inline std::vector<MetricRecord> aggregate_records(const std::vector<MetricRecord>& records) {
  std::vector<std::string> mode_order;
  std::map<std::string, std::map<std::string, RDCurve>> by_mode;
  for (const auto& r : records) {
    if (std::find(mode_order.begin(), mode_order.end(), r.mode) == mode_order.end()) {
      mode_order.push_back(r.mode);
    }
    by_mode[r.mode][r.sequence].push_back({r.q, r.rate_bits_per_frame, r.psnr_db});
  }
  std::vector<MetricRecord> out;
  for (const auto& mode : mode_order) {
    std::vector<RDCurve> curves;
    for (auto& [seq, curve] : by_mode[mode]) curves.push_back(curve);
    for (const RDPoint& p : median_aggregate(curves)) {
      out.push_back({"median", mode, p.q, p.rate, p.psnr});
    }
  }
  return out;
}

inline MetricsFormat parse_format(const std::string& f) {
  if (f == "csv") return MetricsFormat::kCsv;
  if (f == "json") return MetricsFormat::kJson;
  throw InputError("--format must be csv or json");
}

inline int cmd_rd_sweep(const SweepArgs& a, std::ostream& out) {
  const MetricsFormat fmt = parse_format(a.format);
  const auto records = run_sweep(a);
  const std::string table = write_metrics(records, fmt);
  if (a.out.empty()) {
    out << table;
  } else {
    write_file_atomic(a.out, table);
    out << "wrote " << records.size() << " rows to " << a.out << "\n";
  }
  if (!a.aggregate.empty()) {
    const auto agg = aggregate_records(records);
    write_file_atomic(a.aggregate, write_metrics(agg, fmt));
    out << "wrote " << agg.size() << " aggregated rows to " << a.aggregate << "\n";
  }
  return kExitOk;
}

// bdrate ---------------------------------------------------------------------

struct BdArgs {
  std::string reference, test, reference_mode, test_mode;
};

inline std::vector<MetricRecord> load_metrics(const std::string& path) {
  const Bytes b = read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(b.data()), b.size());
  try {
    if (std::filesystem::path(path).extension() == ".json") return parse_metrics_json(text);
    return parse_metrics_csv(text);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what(), e.position());
  }
}

/// Sequence -> curve for one mode of a table.
inline std::map<std::string, RDCurve> curves_for(const std::vector<MetricRecord>& records,
                                                 const std::string& mode_filter,
                                                 const std::string& path) {
  std::vector<std::string> modes;
  for (const auto& r : records) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
  }
  std::string mode = mode_filter;
  if (mode.empty()) {
    if (modes.size() != 1) {
      throw InputError(path + " holds " + std::to_string(modes.size()) +
                       " modes; choose one with --reference-mode/--test-mode");
    }
    mode = modes.front();
  }
  std::map<std::string, RDCurve> out;
  for (const auto& r : records) {
    if (r.mode == mode) out[r.sequence].push_back({r.q, r.rate_bits_per_frame, r.psnr_db});
  }
  if (out.empty()) throw InputError(path + " has no rows for mode '" + mode + "'");
  for (auto& [seq, c] : out) {
    std::sort(c.begin(), c.end(), [](const RDPoint& x, const RDPoint& y) { return x.q < y.q; });
  }
  return out;
}

inline std::string fixed(double v, int decimals) {
  if (v == 0.0) v = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

inline void print_bd(std::ostream& out, const std::string& label, const RDCurve& ref,
                     const RDCurve& test) {
  const double rate = bd_rate(ref, test);
  const double dpsnr = bd_psnr(ref, test);
  out << label << ": BD-Rate " << fixed(rate, 2) << "%, BD-PSNR " << fixed(dpsnr, 2)
      << " dB\n";
  const std::string mag = fixed(std::fabs(rate), 2);
  if (mag == "0.00") {
    out << "  test and reference need the same rate at equal PSNR\n";
  } else {
    out << "  test needs " << mag << "% " << (rate < 0 ? "fewer" : "more")
        << " bits than reference at equal PSNR\n";
  }
}

inline int cmd_bdrate(const BdArgs& a, std::ostream& out) {
  const auto ref = curves_for(load_metrics(a.reference), a.reference_mode, a.reference);
  const auto test = curves_for(load_metrics(a.test), a.test_mode, a.test);
  std::vector<RDCurve> ref_common, test_common;
  for (const auto& [seq, c] : ref) {
    auto it = test.find(seq);
    if (it == test.end()) continue;
    print_bd(out, seq, c, it->second);
    ref_common.push_back(c);
    test_common.push_back(it->second);
  }
  if (ref_common.empty()) throw InputError("the two tables share no sequence");
  if (ref_common.size() > 1) {
    print_bd(out, "median", median_aggregate(ref_common), median_aggregate(test_common));
  }
  return kExitOk;
}

// epe ------------------------------------------------------------------------

struct EpeArgs {
  std::string a, b;
};

inline std::vector<std::filesystem::path> flo_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".flo") {
      out.push_back(std::filesystem::relative(e.path(), dir));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline int cmd_epe(const EpeArgs& a, std::ostream& out) {
  namespace fs = std::filesystem;
  const bool dir_a = fs::is_directory(a.a);
  const bool dir_b = fs::is_directory(a.b);
  if (dir_a != dir_b) throw InputError("epe needs two files or two directories");
  if (!dir_a) {
    out << "EPE: " << fixed(epe(read_flo(a.a), read_flo(a.b)), 6) << "\n";
    return kExitOk;
  }
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& rel : flo_files(a.a)) {
    if (!fs::exists(fs::path(a.b) / rel)) continue;
    const double e = epe(read_flo(fs::path(a.a) / rel), read_flo(fs::path(a.b) / rel));
    out << rel.string() << ": " << fixed(e, 6) << "\n";
    total += e;
    ++count;
  }
  if (count == 0) throw InputError("no matching .flo files in " + a.a + " and " + a.b);
  out << "mean EPE over " << count << " files: " << fixed(total / static_cast<double>(count), 6)
      << "\n";
  return kExitOk;
}

// downsample-flow ------------------------------------------------------------

struct DownsampleArgs {
  std::string input, out, method = "vector-median", median_norm = "l2";
  int block_size = 16;
};

inline int cmd_downsample_flow(const DownsampleArgs& a, std::ostream& out) {
  const DenseFlowField field = read_flo(a.input);
  MedianNorm norm = MedianNorm::kL2;
  if (a.median_norm == "l1") {
    norm = MedianNorm::kL1;
  } else if (a.median_norm != "l2") {
    throw InputError("--median-norm must be l1 or l2");
  }
  if (!valid_block_size(a.block_size)) throw InputError("--block-size must be 4, 8 or 16");
  const BlockMotionField blocks =
      downsample_flow(field, a.block_size, parse_downsample_method(a.method), norm);
  write_file_atomic(a.out, write_flo(expand_block_field(blocks, field.width, field.height)));
  out << "wrote " << blocks.cols << "x" << blocks.rows << " block field to " << a.out << "\n";
  return kExitOk;
}

// Entry point ----------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"flowcodec: motion-estimation experiments on a closed-loop P-frame codec"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode one sequence");
  encode->add_option("--input", enc.input, "Input Y4M (4:2:0)")->required();
  encode->add_option("--mode", enc.mode, "Motion mode")->capture_default_str();
  encode->add_option("--q", enc.q, "Quantiser")->capture_default_str();
  encode->add_option("--out", enc.out, "Output bitstream")->required();
  encode->add_option("--stats", enc.stats, "Per-frame stats CSV");
  encode->add_option("--recon", enc.recon, "Reconstruction Y4M");
  encode->add_option("--sequence", enc.sequence, "Name used for flow lookup (default: file stem)");
  enc.codec.add_to(encode);

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Decode a bitstream to Y4M");
  decode->add_option("--input", dec.input, "Bitstream")->required();
  decode->add_option("--out", dec.out, "Output Y4M")->required();
  decode->add_option("--frame-rate", dec.frame_rate, "Frame rate num:den")->capture_default_str();

  SweepArgs sw;
  auto* sweep = app.add_subcommand("rd-sweep", "Quantiser sweep over sequences and modes");
  sweep->add_option("--input", sw.inputs, "Input Y4M files")->required();
  sweep->add_option("--modes", sw.modes, "Comma list of motion modes")->capture_default_str();
  sweep->add_option("--q", sw.qs, "Quantisers: list, a:step:b ranges, '...'")
      ->capture_default_str();
  sweep->add_option("--out", sw.out, "RD table (default: stdout)");
  sweep->add_option("--aggregate", sw.aggregate, "Median-over-sequences table");
  sweep->add_option("--format", sw.format, "csv or json")->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  sw.codec.add_to(sweep);

  BdArgs bd;
  auto* bdrate = app.add_subcommand("bdrate", "BD-Rate and BD-PSNR between two RD tables");
  bdrate->add_option("--reference", bd.reference, "Reference RD table")->required();
  bdrate->add_option("--test", bd.test, "Test RD table")->required();
  bdrate->add_option("--reference-mode", bd.reference_mode, "Mode to take from the reference");
  bdrate->add_option("--test-mode", bd.test_mode, "Mode to take from the test table");

  EpeArgs ep;
  auto* epe_cmd = app.add_subcommand("epe", "Mean end-point error between flows");
  epe_cmd->add_option("a", ep.a, "First .flo file or directory")->required();
  epe_cmd->add_option("b", ep.b, "Second .flo file or directory")->required();

  DownsampleArgs ds;
  auto* down = app.add_subcommand("downsample-flow", "Reduce a dense flow to block vectors");
  down->add_option("--input", ds.input, "Dense .flo")->required();
  down->add_option("--out", ds.out, "Output .flo (block vectors painted per pixel)")->required();
  down->add_option("--block-size", ds.block_size, "4, 8 or 16")->capture_default_str();
  down->add_option("--method", ds.method, "mean or vector-median")->capture_default_str();
  down->add_option("--median-norm", ds.median_norm, "l2 or l1")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*encode) return cmd_encode(enc, out);
    if (*decode) return cmd_decode(dec, out);
    if (*sweep) return cmd_rd_sweep(sw, out);
    if (*bdrate) return cmd_bdrate(bd, out);
    if (*epe_cmd) return cmd_epe(ep, out);
    if (*down) return cmd_downsample_flow(ds, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace flowcodec::cli

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

// Sources of dense flow for the codec.
//
// All flows are BACKWARD: the field stored for frame n maps pixels of frame n
// to frame n-1, i.e. I_n(x) ~ I_{n-1}(x + d(x)). Forward flow (n -> n+1, as
// shipped by most datasets) must be re-indexed or inverted before use.
//
//   T0  ground-truth files   <dir>/<sequence>/frame_%04d.flo
//   T1  flow precomputed on the original frames, same layout
//   T2  external estimator run on the ORIGINAL current frame and the DECODED
//       previous frame: `<cmd> <current.pgm> <reference.pgm> <output.flo>`

#pragma once

#include <spawn.h>
#include <sys/wait.h>
#include <signal.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "flowcodec/core.hpp"
#include "flowcodec/media_io.hpp"

extern char** environ;

namespace flowcodec {

enum class ProvenanceMode { kT0, kT1, kT2 };

inline ProvenanceMode parse_provenance(std::string_view s) {
  if (s == "T0" || s == "t0") return ProvenanceMode::kT0;
  if (s == "T1" || s == "t1") return ProvenanceMode::kT1;
  if (s == "T2" || s == "t2") return ProvenanceMode::kT2;
  throw InputError("unknown provenance '" + std::string(s) + "' (expected T0, T1 or T2)");
}

inline const char* provenance_name(ProvenanceMode m) {
  switch (m) {
    case ProvenanceMode::kT0: return "T0";
    case ProvenanceMode::kT1: return "T1";
    case ProvenanceMode::kT2: return "T2";
  }
  return "?";
}

class FlowProvider {
 public:
  virtual ~FlowProvider() = default;

  /// Backward flow for frame `n` of `sequence`. `cur` is the original frame n;
  /// `ref_decoded` the reconstruction of frame n-1.
  virtual DenseFlowField get_flow(const std::string& sequence, int n, const Frame& cur,
                                  const Frame& ref_decoded) = 0;

  virtual ProvenanceMode mode() const = 0;
};

inline std::filesystem::path flow_file_path(const std::filesystem::path& dir,
                                            const std::string& sequence, int n) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%04d.flo", n);
  return dir / sequence / name;
}

namespace detail {

inline void check_flow_dims(const DenseFlowField& f, const Frame& frame,
                            const std::string& what) {
  if (f.width != frame.width || f.height != frame.height) {
    throw InputError(what + " is " + std::to_string(f.width) + "x" +
                     std::to_string(f.height) + ", frame is " +
                     std::to_string(frame.width) + "x" + std::to_string(frame.height));
  }
}

}  // namespace detail

/// T0 and T1: read-only lookups in a flow directory.
class FileFlowProvider final : public FlowProvider {
 public:
  FileFlowProvider(std::filesystem::path dir, ProvenanceMode mode)
      : dir_(std::move(dir)), mode_(mode) {
    if (mode == ProvenanceMode::kT2) {
      throw InputError("file flow provider serves T0/T1 only");
    }
  }

  DenseFlowField get_flow(const std::string& sequence, int n, const Frame& cur,
                          const Frame&) override {
    const auto path = flow_file_path(dir_, sequence, n);
    if (!std::filesystem::exists(path)) {
      throw InputError("missing flow file " + path.string());
    }
    DenseFlowField f = read_flo(path);
    detail::check_flow_dims(f, cur, path.string());
    return f;
  }

  ProvenanceMode mode() const override { return mode_; }

 private:
  std::filesystem::path dir_;
  ProvenanceMode mode_;
};

/// Temporary directory removed with its contents on destruction.
class TempDir {
 public:
  TempDir() {
    std::filesystem::path base;
    if (const char* env = std::getenv("FLOWCODEC_TMPDIR"); env && *env) {
      base = env;
    } else {
      base = std::filesystem::temp_directory_path();
    }
    std::string templ = (base / "flowcodec-XXXXXX").string();
    if (!::mkdtemp(templ.data())) {
      throw InputError("cannot create temp directory under " + base.string());
    }
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Runs `command "$1" "$2" "$3"` through /bin/sh; returns the exit status.
/// The child is killed when `timeout` elapses.
inline int run_command(const std::string& command, const std::vector<std::string>& args,
                       std::chrono::milliseconds timeout) {
  std::string script = command;
  for (std::size_t i = 0; i < args.size(); ++i) {
    script += " \"${" + std::to_string(i + 1) + "}\"";  // braces: $10 would mean ${1}0
  }
  std::vector<std::string> argv_store{"/bin/sh", "-c", script, "flowcodec-estimator"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  argv.push_back(nullptr);

  // Own process group, so a timeout takes down the estimator's children too.
  posix_spawnattr_t attr;
  ::posix_spawnattr_init(&attr);
  ::posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  ::posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, "/bin/sh", nullptr, &attr, argv.data(), environ);
  ::posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    throw InputError("cannot spawn estimator command '" + command + "'");
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto delay = std::chrono::milliseconds(1);
  for (;;) {
    int status = 0;
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      if (WIFEXITED(status)) return WEXITSTATUS(status);
      return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    }
    if (r < 0) throw InputError("waitpid failed for estimator command");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw InputError("estimator command timed out after " +
                       std::to_string(timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, std::chrono::milliseconds(50));
  }
}

/// T2: closed-loop flow from an external estimator. One process in flight at
/// a time per provider; use separate providers for concurrent sequences.
class ExternalFlowProvider final : public FlowProvider {
 public:
  explicit ExternalFlowProvider(std::string command,
                                std::chrono::milliseconds timeout = std::chrono::seconds(60))
      : command_(std::move(command)), timeout_(timeout) {
    if (command_.empty()) throw InputError("T2 requires an estimator command");
  }

  DenseFlowField get_flow(const std::string&, int n, const Frame& cur,
                          const Frame& ref_decoded) override {
    TempDir tmp;
    const auto cur_path = tmp.path() / "current.pgm";
    const auto ref_path = tmp.path() / "reference.pgm";
    const auto out_path = tmp.path() / "output.flo";
    write_file_atomic(cur_path, write_pgm(cur.y));
    write_file_atomic(ref_path, write_pgm(ref_decoded.y));
    const int status = run_command(
        command_, {cur_path.string(), ref_path.string(), out_path.string()}, timeout_);
    if (status != 0) {
      throw InputError("estimator command exited with status " + std::to_string(status) +
                       " for frame " + std::to_string(n));
    }
    if (!std::filesystem::exists(out_path)) {
      throw InputError("estimator command wrote no output for frame " + std::to_string(n));
    }
    DenseFlowField f = read_flo(out_path);
    detail::check_flow_dims(f, cur, "estimator output for frame " + std::to_string(n));
    return f;
  }

  ProvenanceMode mode() const override { return ProvenanceMode::kT2; }

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
};

struct FlowSourceConfig {
  ProvenanceMode provenance = ProvenanceMode::kT1;
  std::filesystem::path flow_dir;
  std::string estimator_cmd;
  std::chrono::milliseconds timeout = std::chrono::seconds(60);
};

inline std::unique_ptr<FlowProvider> make_flow_provider(const FlowSourceConfig& cfg) {
  if (cfg.provenance == ProvenanceMode::kT2) {
    return std::make_unique<ExternalFlowProvider>(cfg.estimator_cmd, cfg.timeout);
  }
  if (cfg.flow_dir.empty()) {
    throw InputError(std::string(provenance_name(cfg.provenance)) +
                     " requires a flow directory");
  }
  return std::make_unique<FileFlowProvider>(cfg.flow_dir, cfg.provenance);
}

}  // namespace flowcodec

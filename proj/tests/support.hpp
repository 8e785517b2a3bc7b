// Copyright 2026 The dgrid Authors
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

// Test helpers: scratch directories and in-process "ranks" on threads.

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "dgrid/fsmpi.hpp"

namespace dgrid::test {

namespace fs = std::filesystem;

class TempDir {
public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "dgrid_test_XXXXXX").string();
    if (!::mkdtemp(tmpl.data()))
      throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

inline CommConfig config(int rank, int size, const fs::path& dir, const std::string& job = "job") {
  CommConfig c;
  c.rank = rank;
  c.size = size;
  c.comm_dir = dir;
  c.job_id = job;
  c.recv_timeout = std::chrono::milliseconds(20000);
  return c;
}

/// Runs fn(comm) for ranks 0..np-1 on separate threads and returns each
/// rank's result. doctest assertions are not thread safe, so fn should
/// return what it observed and leave the checking to the caller.
template <class Fn>
auto run_ranks(int np, const fs::path& dir, Fn fn, const std::string& job = "job") {
  using R = decltype(fn(std::declval<Comm&>()));
  std::vector<R> results(static_cast<std::size_t>(np));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(np));
  std::vector<std::thread> threads;
  for (int r = 0; r < np; ++r)
    threads.emplace_back([&, r] {
      try {
        Comm comm(config(r, np, dir, job));
        results[static_cast<std::size_t>(r)] = fn(comm);
        comm.finalize();
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    });
  for (auto& t : threads)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
  return results;
}

/// Names of the entries in a directory, sorted.
inline std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace dgrid::test

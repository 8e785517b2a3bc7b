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

// dgrid-bench {stream|fft|ra|pingpong} --np N --size S [--iters K] [--csv out.csv]
//
// Started by hand, the tool launches itself under the SPMD launcher with N
// ranks; each rank then runs the kernel and rank 0 reports.
//
// --size is the vector length N for stream, the transform length n for fft,
// the table exponent m for ra and the largest message in bytes for pingpong.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dgrid/error.hpp"
#include "dgrid/hpcbench.hpp"
#include "dgrid/launcher.hpp"

namespace {

struct Args {
  std::string kernel;
  int np = 1;
  std::int64_t size = 0;
  int iters = 10;
  std::uint64_t updates = 0;
  std::size_t batch = 1024;
  int trials = 7;
  std::string csv;
  std::string comm_dir;
  bool serial = false;
};

std::int64_t default_size(const std::string& kernel) {
  if (kernel == "stream")
    return std::int64_t{1} << 20;
  if (kernel == "fft")
    return std::int64_t{1} << 10;
  if (kernel == "ra")
    return 10;
  return std::int64_t{8} << 20;
}

std::vector<dgrid::BenchResult> run_kernel(dgrid::Comm* comm, const Args& a) {
  using namespace dgrid;
  if (a.kernel == "stream") {
    StreamOptions o{a.size, 3.14, a.iters};
    return {comm ? stream_triad(*comm, o).result : stream_triad_serial(o).result};
  }
  if (a.kernel == "fft") {
    if (a.size < 1 || !is_power_of_two(static_cast<std::size_t>(a.size)))
      throw std::invalid_argument("fft size must be a power of two");
    Index p = 1;
    while (p * p < a.size)
      p *= 2;
    FftOptions o{p, a.size / p, true};
    return {comm ? parallel_fft_1d(*comm, o).result : parallel_fft_1d_serial(o).result};
  }
  if (a.kernel == "ra") {
    RandomAccessOptions o;
    o.table_bits = static_cast<int>(a.size);
    o.updates = a.updates ? a.updates : (std::uint64_t{4} << a.size);
    o.batch = a.batch;
    if (!comm)
      throw std::invalid_argument("ra has no serial mode");
    return {random_access(*comm, o).result};
  }
  if (a.kernel == "pingpong") {
    if (!comm)
      throw std::invalid_argument("pingpong has no serial mode");
    PingPongOptions o;
    o.max_bytes = static_cast<std::size_t>(a.size);
    o.trials = a.trials;
    return pingpong(*comm, o);
  }
  throw std::invalid_argument("unknown kernel " + a.kernel);
}

void report(const std::vector<dgrid::BenchResult>& results, const std::string& csv) {
  std::cout << dgrid::csv_header() << "\n";
  for (const auto& r : results)
    std::cout << dgrid::to_csv_row(r) << "\n";
  if (!csv.empty()) {
    std::ofstream out(csv);
    out << dgrid::csv_header() << "\n";
    for (const auto& r : results)
      out << dgrid::to_csv_row(r) << "\n";
    if (!out)
      throw dgrid::IoError("cannot write " + csv);
  }
}

int relaunch(int argc, char** argv, const Args& a) {
  dgrid::LaunchSpec spec;
  spec.nprocs = a.np;
  spec.program.push_back(std::filesystem::canonical("/proc/self/exe").string());
  for (int i = 1; i < argc; ++i)
    spec.program.push_back(argv[i]);
  if (!a.comm_dir.empty())
    spec.comm_dir = a.comm_dir;
  const auto rep = dgrid::prun(spec);
  for (int r : rep.failed_ranks())
    std::cerr << "dgrid-bench: rank " << r << " exited with code " << rep.exit_codes[static_cast<std::size_t>(r)]
              << "\n";
  return rep.exit_code();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale HPC Challenge kernels"};
  Args a;
  app.add_option("kernel", a.kernel, "stream | fft | ra | pingpong | hpl")
      ->required()
      ->check(CLI::IsMember({"stream", "fft", "ra", "pingpong", "hpl"}));
  app.add_option("--np", a.np, "number of ranks")->check(CLI::PositiveNumber);
  app.add_option("--size", a.size, "problem size");
  app.add_option("--iters", a.iters, "STREAM iterations")->check(CLI::PositiveNumber);
  app.add_option("--updates", a.updates, "RandomAccess updates (default 4 * 2^m)");
  app.add_option("--batch", a.batch, "RandomAccess batch size")->check(CLI::Range(1, 1024));
  app.add_option("--trials", a.trials, "ping-pong trials per size")->check(CLI::Range(7, 1000));
  app.add_option("--csv", a.csv, "write results to this CSV file");
  app.add_option("--comm-dir", a.comm_dir, "shared directory for message files");
  app.add_flag("--serial", a.serial, "run with maps turned off in this process");
  CLI11_PARSE(app, argc, argv);

  if (a.kernel == "hpl") {
    std::cerr << "dgrid-bench: hpl is not implemented\n";
    return 3;
  }
  if (a.size == 0)
    a.size = default_size(a.kernel);

  try {
    if (a.serial) {
      report(run_kernel(nullptr, a), a.csv);
      return 0;
    }
    if (!std::getenv("DGRID_RANK"))
      return relaunch(argc, argv, a);

    auto& comm = dgrid::Comm::world();
    const auto results = run_kernel(&comm, a);
    bool ok = true;
    if (comm.rank() == 0) {
      report(results, a.csv);
      for (const auto& r : results)
        ok = ok && r.correct;
    }
    comm.finalize();
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "dgrid-bench: " << e.what() << "\n";
    return 2;
  }
}

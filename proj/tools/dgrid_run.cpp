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

// dgrid-run --np N [--comm-dir DIR] [--hosts h1,h2] [--keep-msgs] [--timeout S] -- program args...

#include <iostream>

#include <CLI11.hpp>

#include "dgrid/error.hpp"
#include "dgrid/launcher.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Launch N ranks of an SPMD program"};
  dgrid::LaunchSpec spec;
  std::string comm_dir;
  double timeout = 0.0;
  std::string slurm;
  app.add_option("--np", spec.nprocs, "number of ranks")->required()->check(CLI::PositiveNumber);
  app.add_option("--comm-dir", comm_dir, "shared directory for message files");
  app.add_option("--hosts", spec.hosts, "hosts, ranks placed round-robin")->delimiter(',');
  app.add_flag("--keep-msgs", spec.keep_msgs, "keep delivered message files");
  app.add_option("--timeout", timeout, "kill the job after S seconds")->check(CLI::PositiveNumber);
  app.add_option("--remote-shell", spec.remote_shell, "remote spawn template, {host} is substituted");
  app.add_option("--emit-script", slurm, "print a batch script for the given scheduler instead of running");
  app.add_option("program", spec.program, "program and its arguments")->required();
  app.positionals_at_end();
  CLI11_PARSE(app, argc, argv);

  if (!comm_dir.empty())
    spec.comm_dir = comm_dir;
  if (timeout > 0)
    spec.timeout_sec = timeout;

  try {
    if (!slurm.empty()) {
      std::cout << dgrid::emit_scheduler_script(spec, slurm);
      return 0;
    }
    const auto report = dgrid::prun(spec);
    if (report.timed_out)
      std::cerr << "dgrid-run: job " << report.job_id << " timed out after " << timeout << " s\n";
    for (int r : report.failed_ranks())
      std::cerr << "dgrid-run: rank " << r << " exited with code " << report.exit_codes[static_cast<std::size_t>(r)]
                << (r > 0 ? " (output in " + (report.job_dir / ("rank" + std::to_string(r) + ".out")).string() + ")"
                          : std::string{})
                << "\n";
    return report.exit_code();
  } catch (const dgrid::Error& e) {
    std::cerr << "dgrid-run: " << e.what() << "\n";
    return 2;
  }
}

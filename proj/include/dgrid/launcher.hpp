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

// SPMD launcher: starts N copies of a program, each told its rank through
// DGRID_RANK / DGRID_SIZE / DGRID_COMMDIR / DGRID_JOBID, and waits for all.

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dgrid {

struct LaunchSpec {
  int nprocs = 1;
  std::vector<std::string> program; // argv; program[0] is the executable
  std::filesystem::path comm_dir;   // empty: <tmp>/dgrid
  std::vector<std::string> hosts;   // ranks placed round-robin; empty or "localhost" spawns locally
  bool keep_msgs = false;
  std::optional<double> timeout_sec;
  std::string remote_shell = "ssh {host}";
  std::optional<std::string> job_id; // generated when absent
  std::map<std::string, std::string> extra_env;
  std::string runner = "dgrid-run"; // used by emit_scheduler_script
};

struct LaunchReport {
  std::string job_id;
  std::filesystem::path job_dir;
  std::vector<int> exit_codes; // per rank; 128+signal for signalled ranks, 127 if never started
  bool timed_out = false;
  bool interrupted = false;
  bool cleaned = false;
  double wall_seconds = 0.0;

  std::vector<int> failed_ranks() const;
  bool ok() const;
  /// 0 iff every rank exited 0; otherwise the first nonzero rank code (124 on timeout).
  int exit_code() const;
};

std::string generate_job_id();

std::filesystem::path default_comm_dir();

/// Environment assignments ("KEY=VALUE") given to one rank.
std::vector<std::string> rank_environment(const LaunchSpec& spec, int rank, const std::string& job_id);

/// Host for a rank, or nullopt for a local spawn.
std::optional<std::string> rank_host(const LaunchSpec& spec, int rank);

/// argv actually executed for a rank. Local ranks run the program directly
/// (the environment is passed separately); remote ranks run the remote-shell
/// template followed by `env KEY=VALUE ... program args`.
std::vector<std::string> build_rank_command(const LaunchSpec& spec, int rank, const std::string& job_id);

/// Resolves program[0] against PATH. Throws LaunchError if it is missing or
/// not executable.
std::filesystem::path resolve_program(const std::string& name);

/// Runs the job to completion. Throws LaunchError before spawning anything
/// when the LaunchSpec is invalid or the program is missing.
LaunchReport prun(const LaunchSpec& spec);

/// Batch script that re-invokes the launcher on the allocated nodes. Only
/// "slurm" is understood; anything else throws LaunchError.
std::string emit_scheduler_script(const LaunchSpec& spec, const std::string& flavor);

} // namespace dgrid

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

#include "dgrid/launcher.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <random>
#include <signal.h>
#include <spawn.h>
#include <sstream>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "dgrid/error.hpp"

extern char** environ;

namespace dgrid {

namespace fs = std::filesystem;

namespace {

std::atomic<int> g_interrupt{0};

extern "C" void on_interrupt(int sig) { g_interrupt.store(sig); }

bool is_local_host(const std::string& h) { return h.empty() || h == "localhost" || h == "127.0.0.1"; }

std::string shell_quote(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-./=:,@+") ==
                        std::string::npos)
    return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> words;
  for (std::string w; is >> w;)
    words.push_back(w);
  return words;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

bool executable(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

void kill_groups(const std::vector<pid_t>& pids, const std::vector<bool>& done, int sig) {
  for (std::size_t i = 0; i < pids.size(); ++i)
    if (pids[i] > 0 && !done[i])
      ::kill(-pids[i], sig);
}

struct SignalGuard {
  struct sigaction old_int {}, old_term {};
  SignalGuard() {
    g_interrupt.store(0);
    struct sigaction sa {};
    sa.sa_handler = on_interrupt;
    sigemptyset(&sa.sa_mask);
    ::sigaction(SIGINT, &sa, &old_int);
    ::sigaction(SIGTERM, &sa, &old_term);
  }
  ~SignalGuard() {
    ::sigaction(SIGINT, &old_int, nullptr);
    ::sigaction(SIGTERM, &old_term, nullptr);
  }
};

} // namespace

std::vector<int> LaunchReport::failed_ranks() const {
  std::vector<int> out;
  for (std::size_t r = 0; r < exit_codes.size(); ++r)
    if (exit_codes[r] != 0)
      out.push_back(static_cast<int>(r));
  return out;
}

bool LaunchReport::ok() const { return !timed_out && !interrupted && failed_ranks().empty(); }

int LaunchReport::exit_code() const {
  if (timed_out)
    return 124;
  for (int c : exit_codes)
    if (c != 0)
      return c;
  return interrupted ? 130 : 0;
}

std::string generate_job_id() {
  const auto now = std::chrono::system_clock::now();
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count();
  std::random_device rd;
  std::mt19937_64 gen((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ static_cast<std::uint64_t>(::getpid()));
  std::ostringstream os;
  os << "job" << micros << '_' << std::hex << (gen() & 0xffffffffULL);
  return os.str();
}

fs::path default_comm_dir() { return fs::temp_directory_path() / "dgrid"; }

std::vector<std::string> rank_environment(const LaunchSpec& spec, int rank, const std::string& job_id) {
  const fs::path dir = spec.comm_dir.empty() ? default_comm_dir() : spec.comm_dir;
  std::vector<std::string> env{
      "DGRID_RANK=" + std::to_string(rank),
      "DGRID_SIZE=" + std::to_string(spec.nprocs),
      "DGRID_COMMDIR=" + fs::absolute(dir).string(),
      "DGRID_JOBID=" + job_id,
  };
  if (spec.keep_msgs)
    env.push_back("DGRID_KEEP_MSGS=1");
  for (const auto& [k, v] : spec.extra_env)
    env.push_back(k + "=" + v);
  return env;
}

std::optional<std::string> rank_host(const LaunchSpec& spec, int rank) {
  if (spec.hosts.empty())
    return std::nullopt;
  const auto& h = spec.hosts[static_cast<std::size_t>(rank) % spec.hosts.size()];
  if (is_local_host(h))
    return std::nullopt;
  return h;
}

std::vector<std::string> build_rank_command(const LaunchSpec& spec, int rank, const std::string& job_id) {
  const auto host = rank_host(spec, rank);
  if (!host)
    return spec.program;
  std::vector<std::string> argv;
  for (const auto& w : split_words(spec.remote_shell))
    argv.push_back(replace_all(w, "{host}", *host));
  // The remote shell concatenates its arguments, so quote them here.
  std::vector<std::string> remote{"cd", shell_quote(fs::current_path().string()), "&&", "env"};
  for (const auto& kv : rank_environment(spec, rank, job_id))
    remote.push_back(shell_quote(kv));
  for (const auto& a : spec.program)
    remote.push_back(shell_quote(a));
  std::string joined;
  for (const auto& w : remote)
    joined += (joined.empty() ? "" : " ") + w;
  argv.push_back(joined);
  return argv;
}

fs::path resolve_program(const std::string& name) {
  if (name.empty())
    throw LaunchError("no program given");
  if (name.find('/') != std::string::npos) {
    if (!executable(name))
      throw LaunchError("program not found or not executable: " + name);
    return fs::absolute(name);
  }
  const char* path = std::getenv("PATH");
  std::istringstream is(path ? path : "/usr/bin:/bin");
  for (std::string dir; std::getline(is, dir, ':');) {
    const fs::path candidate = fs::path(dir.empty() ? "." : dir) / name;
    if (executable(candidate))
      return candidate;
  }
  throw LaunchError("program not found on PATH: " + name);
}

LaunchReport prun(const LaunchSpec& spec) {
  if (spec.nprocs < 1)
    throw LaunchError("nprocs must be >= 1, got " + std::to_string(spec.nprocs));
  if (spec.program.empty())
    throw LaunchError("no program given");
  if (spec.timeout_sec && *spec.timeout_sec <= 0)
    throw LaunchError("timeout must be positive");
  const fs::path program = resolve_program(spec.program[0]);

  LaunchReport report;
  report.job_id = spec.job_id.value_or(generate_job_id());
  const fs::path comm_dir = fs::absolute(spec.comm_dir.empty() ? default_comm_dir() : spec.comm_dir);
  report.job_dir = comm_dir / report.job_id;
  std::error_code ec;
  fs::create_directories(report.job_dir, ec);
  if (ec)
    throw LaunchError("cannot create " + report.job_dir.string() + ": " + ec.message());

  const auto n = static_cast<std::size_t>(spec.nprocs);
  report.exit_codes.assign(n, 127);
  std::vector<pid_t> pids(n, -1);
  std::vector<bool> done(n, false);

  SignalGuard guard;
  const auto t0 = std::chrono::steady_clock::now();
  bool spawn_failed = false;

  for (int r = 0; r < spec.nprocs && !spawn_failed; ++r) {
    auto argv_s = build_rank_command(spec, r, report.job_id);
    const bool local = !rank_host(spec, r);
    if (local)
      argv_s[0] = program.string();

    std::vector<std::string> env_s;
    for (char** e = environ; *e; ++e) {
      const std::string kv = *e;
      const auto key = kv.substr(0, kv.find('='));
      if (key != "DGRID_RANK" && key != "DGRID_SIZE" && key != "DGRID_COMMDIR" && key != "DGRID_JOBID" &&
          key != "DGRID_KEEP_MSGS")
        env_s.push_back(kv);
    }
    if (local)
      for (auto& kv : rank_environment(spec, r, report.job_id))
        env_s.push_back(kv);

    std::vector<char*> argv, envp;
    for (auto& s : argv_s)
      argv.push_back(s.data());
    argv.push_back(nullptr);
    for (auto& s : env_s)
      envp.push_back(s.data());
    envp.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    const std::string out = (report.job_dir / ("rank" + std::to_string(r) + ".out")).string();
    if (r > 0) {
      posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
    }
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    pid_t pid = -1;
    const int rc = local ? posix_spawn(&pid, argv[0], &actions, &attr, argv.data(), envp.data())
                         : posix_spawnp(&pid, argv[0], &actions, &attr, argv.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) {
      spawn_failed = true;
      std::fprintf(stderr, "dgrid-run: failed to spawn rank %d: %s\n", r, std::strerror(rc));
      break;
    }
    pids[static_cast<std::size_t>(r)] = pid;
  }

  if (spawn_failed) {
    kill_groups(pids, done, SIGKILL);
  }

  const auto deadline =
      spec.timeout_sec ? std::optional(t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                std::chrono::duration<double>(*spec.timeout_sec)))
                       : std::nullopt;
  auto remaining = [&] {
    std::size_t live = 0;
    for (std::size_t i = 0; i < n; ++i)
      live += pids[i] > 0 && !done[i];
    return live;
  };

  auto sleep_for = std::chrono::microseconds(200);
  while (remaining() > 0) {
    bool reaped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (pids[i] <= 0 || done[i])
        continue;
      int status = 0;
      const pid_t w = ::waitpid(pids[i], &status, WNOHANG);
      if (w == pids[i]) {
        done[i] = true;
        reaped = true;
        if (WIFEXITED(status))
          report.exit_codes[i] = WEXITSTATUS(status);
        else if (WIFSIGNALED(status))
          report.exit_codes[i] = 128 + WTERMSIG(status);
        // Stragglers left in the rank's process group go with it.
        ::kill(-pids[i], SIGKILL);
      } else if (w < 0 && errno != EINTR) {
        done[i] = true;
      }
    }
    if (const int sig = g_interrupt.load(); sig != 0 && !report.interrupted) {
      report.interrupted = true;
      kill_groups(pids, done, SIGTERM);
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      kill_groups(pids, done, SIGKILL);
    }
    if (deadline && !report.timed_out && std::chrono::steady_clock::now() >= *deadline) {
      report.timed_out = true;
      kill_groups(pids, done, SIGKILL);
    }
    if (reaped) {
      sleep_for = std::chrono::microseconds(200);
    } else {
      std::this_thread::sleep_for(sleep_for);
      sleep_for = std::min(sleep_for * 2, std::chrono::microseconds(20000));
    }
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (report.ok() && !spec.keep_msgs) {
    fs::remove_all(report.job_dir, ec);
    report.cleaned = !ec && !fs::exists(report.job_dir);
  }
  return report;
}

std::string emit_scheduler_script(const LaunchSpec& spec, const std::string& flavor) {
  if (flavor != "slurm")
    throw LaunchError("unknown scheduler flavor '" + flavor + "' (supported: slurm)");
  if (spec.nprocs < 1)
    throw LaunchError("nprocs must be >= 1");
  if (spec.program.empty())
    throw LaunchError("no program given");
  const int nodes = std::max<int>(1, static_cast<int>(spec.hosts.size()));
  const int per_node = (spec.nprocs + nodes - 1) / nodes;
  const fs::path comm_dir = spec.comm_dir.empty() ? default_comm_dir() : spec.comm_dir;

  std::ostringstream os;
  os << "#!/bin/bash\n"
     << "#SBATCH --job-name=dgrid\n"
     << "#SBATCH --nodes=" << nodes << "\n"
     << "#SBATCH --ntasks-per-node=" << per_node << "\n";
  if (spec.timeout_sec) {
    const long minutes = std::max(1L, static_cast<long>((*spec.timeout_sec + 59.0) / 60.0));
    os << "#SBATCH --time=" << minutes << "\n";
  }
  os << "set -euo pipefail\n"
     << "COMMDIR=" << shell_quote(comm_dir.string()) << "\n"
     << "mkdir -p \"$COMMDIR\"\n";
  if (nodes > 1)
    os << "HOSTS=$(scontrol show hostnames \"$SLURM_JOB_NODELIST\" | paste -sd, -)\n";
  os << "exec " << shell_quote(spec.runner) << " --np " << spec.nprocs << " --comm-dir \"$COMMDIR\"";
  if (nodes > 1)
    os << " --hosts \"$HOSTS\"";
  if (spec.keep_msgs)
    os << " --keep-msgs";
  if (spec.timeout_sec)
    os << " --timeout " << *spec.timeout_sec;
  os << " --";
  for (const auto& a : spec.program)
    os << ' ' << shell_quote(a);
  os << "\n";
  return os.str();
}

} // namespace dgrid

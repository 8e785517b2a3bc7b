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

// File-based one-sided point-to-point messaging over a shared directory.
//
// A message from rank s to rank d on tag t is two files in the job directory:
//   msg_s<s>_d<d>_t<t>.bin     encoded TypedPayload
//   msg_s<s>_d<d>_t<t>.ready   empty marker, renamed into place after the
//                              payload has been written and closed
// A receiver only ever opens a payload whose marker it has seen, so it never
// observes a partially written file.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dgrid/payload.hpp"

namespace dgrid {

using Tag = std::uint64_t;

/// Tags at or above this value belong to library collectives.
inline constexpr Tag kReservedTagBase = Tag{1} << 62;

/// Collective families that draw tags from the reserved range.
enum class Collective : std::uint8_t {
  bcast = 1,
  synch = 2,
  redistribute = 3,
  aggregate = 4,
  random_access = 5,
  user = 6,
};

struct CommConfig {
  int rank = 0;
  int size = 1;
  std::filesystem::path comm_dir;
  std::string job_id;
  std::optional<std::chrono::milliseconds> recv_timeout;
  bool keep_msgs = false;

  /// Directory holding this job's message files: comm_dir / job_id.
  std::filesystem::path job_dir() const { return comm_dir / job_id; }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads DGRID_RANK, DGRID_SIZE, DGRID_COMMDIR, DGRID_JOBID and the optional
/// DGRID_RECV_TIMEOUT_MS / DGRID_KEEP_MSGS. Throws InitError naming the
/// offending variable.
CommConfig config_from_env(const EnvLookup& lookup);
CommConfig config_from_env();

struct MessageId {
  int src = 0;
  Tag tag = 0;
  friend bool operator==(const MessageId&, const MessageId&) = default;
  friend auto operator<=>(const MessageId&, const MessageId&) = default;
};

struct CommCounters {
  std::uint64_t sends = 0;
  std::uint64_t recvs = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

/// One rank's messaging context. Confined to a single thread.
class Comm {
public:
  /// Validates the configuration and creates the job directory and this
  /// rank's scratch subdirectory.
  explicit Comm(CommConfig cfg);

  Comm(const Comm&) = delete;
  Comm& operator=(const Comm&) = delete;
  Comm(Comm&&) noexcept = default;
  Comm& operator=(Comm&&) noexcept = default;
  ~Comm() = default;

  /// Process-wide context built from the environment on first use.
  static Comm& world();

  int rank() const { return cfg_.rank; }
  int size() const { return cfg_.size; }
  const CommConfig& config() const { return cfg_; }
  std::filesystem::path job_dir() const { return cfg_.job_dir(); }
  std::filesystem::path scratch_dir() const;

  /// Deposits the message and returns; never waits for the receiver.
  void send(int dst, Tag tag, const TypedPayload& payload);

  /// Blocks until the message (src -> this rank, tag) is ready.
  TypedPayload recv(int src, Tag tag);

  /// Non-blocking scan of ready messages addressed to this rank.
  std::vector<MessageId> probe(std::optional<int> src = std::nullopt,
                               std::optional<Tag> tag = std::nullopt) const;

  /// Root's payload on every rank. Non-root ranks pass std::nullopt.
  TypedPayload bcast(int root, std::optional<TypedPayload> payload);

  void finalize();
  bool finalized() const { return finalized_; }

  /// Next tag in the reserved range for a collective. Every rank must draw
  /// collective tags in the same order; the low 20 bits are left for
  /// per-message sequence numbers within one collective call.
  Tag collective_tag(Collective kind);

  const CommCounters& counters() const { return counters_; }

  static std::string message_stem(int src, int dst, Tag tag);

private:
  void check_rank(int r, const char* what) const;
  std::filesystem::path stem_path(int src, int dst, Tag tag) const;

  CommConfig cfg_;
  CommCounters counters_;
  std::uint64_t collective_seq_ = 0;
  std::uint64_t kept_seq_ = 0;
  bool finalized_ = false;
};

} // namespace dgrid

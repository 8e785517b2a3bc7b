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

#include "dgrid/fsmpi.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <thread>

#include "dgrid/error.hpp"

namespace fs = std::filesystem;

namespace dgrid {

namespace {

constexpr auto kPollFloor = std::chrono::milliseconds(1);
constexpr auto kPollCap = std::chrono::milliseconds(100);
constexpr auto kFinalizeWait = std::chrono::seconds(30);

std::string errno_text(const std::string& what, const fs::path& p) {
  return what + " " + p.string() + ": " + std::strerror(errno);
}

/// Writes the whole buffer to `tmp`, closes it, then renames it to `dst`.
void write_then_rename(const fs::path& tmp, const fs::path& dst, std::span<const std::byte> bytes) {
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0)
    throw IoError(errno_text("cannot create", tmp));
  const auto* p = reinterpret_cast<const char*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      if (errno == EINTR)
        continue;
      const auto msg = errno_text("write failed on", tmp);
      ::close(fd);
      ::unlink(tmp.c_str());
      throw IoError(msg);
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  if (::close(fd) != 0) {
    const auto msg = errno_text("close failed on", tmp);
    ::unlink(tmp.c_str());
    throw IoError(msg);
  }
  if (::rename(tmp.c_str(), dst.c_str()) != 0)
    throw IoError(errno_text("rename failed for", tmp));
}

std::vector<std::byte> read_file(const fs::path& p) {
  const int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0)
    throw IoError(errno_text("cannot open", p));
  std::vector<std::byte> out;
  std::size_t got = 0;
  for (;;) {
    if (got == out.size())
      out.resize(std::max<std::size_t>(out.size() * 2, 1 << 16));
    const ssize_t n = ::read(fd, out.data() + got, out.size() - got);
    if (n < 0) {
      if (errno == EINTR)
        continue;
      const auto msg = errno_text("read failed on", p);
      ::close(fd);
      throw IoError(msg);
    }
    if (n == 0)
      break;
    got += static_cast<std::size_t>(n);
  }
  ::close(fd);
  out.resize(got);
  return out;
}

bool exists_noexcept(const fs::path& p) {
  std::error_code ec;
  return fs::exists(p, ec);
}

template <class Int>
Int parse_int(const std::string& name, const std::string& text) {
  Int v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw InitError(name + " is not an integer: '" + text + "'");
  return v;
}

/// Parses "msg_s<src>_d<dst>_t<tag>.ready".
std::optional<std::tuple<int, int, Tag>> parse_marker(const std::string& name) {
  constexpr std::string_view prefix = "msg_s";
  constexpr std::string_view suffix = ".ready";
  if (name.size() <= prefix.size() + suffix.size() || !name.starts_with(prefix) ||
      !name.ends_with(suffix))
    return std::nullopt;
  const char* p = name.data() + prefix.size();
  const char* end = name.data() + name.size() - suffix.size();
  int src = 0, dst = 0;
  Tag tag = 0;
  auto r1 = std::from_chars(p, end, src);
  if (r1.ec != std::errc{} || r1.ptr + 2 > end || r1.ptr[0] != '_' || r1.ptr[1] != 'd')
    return std::nullopt;
  auto r2 = std::from_chars(r1.ptr + 2, end, dst);
  if (r2.ec != std::errc{} || r2.ptr + 2 > end || r2.ptr[0] != '_' || r2.ptr[1] != 't')
    return std::nullopt;
  auto r3 = std::from_chars(r2.ptr + 2, end, tag);
  if (r3.ec != std::errc{} || r3.ptr != end)
    return std::nullopt;
  return std::tuple{src, dst, tag};
}

} // namespace

CommConfig config_from_env(const EnvLookup& lookup) {
  auto required = [&](const std::string& name) {
    auto v = lookup(name);
    if (!v || v->empty())
      throw InitError("environment variable " + name + " is not set");
    return *v;
  };
  CommConfig cfg;
  cfg.rank = parse_int<int>("DGRID_RANK", required("DGRID_RANK"));
  cfg.size = parse_int<int>("DGRID_SIZE", required("DGRID_SIZE"));
  cfg.comm_dir = required("DGRID_COMMDIR");
  cfg.job_id = required("DGRID_JOBID");
  if (cfg.size < 1)
    throw InitError("DGRID_SIZE must be >= 1, got " + std::to_string(cfg.size));
  if (cfg.rank < 0 || cfg.rank >= cfg.size)
    throw InitError("DGRID_RANK " + std::to_string(cfg.rank) + " out of range for DGRID_SIZE " +
                    std::to_string(cfg.size));
  if (auto t = lookup("DGRID_RECV_TIMEOUT_MS"); t && !t->empty()) {
    const auto ms = parse_int<long long>("DGRID_RECV_TIMEOUT_MS", *t);
    if (ms > 0)
      cfg.recv_timeout = std::chrono::milliseconds(ms);
  }
  if (auto k = lookup("DGRID_KEEP_MSGS"); k && *k == "1")
    cfg.keep_msgs = true;
  return cfg;
}

CommConfig config_from_env() {
  return config_from_env([](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str()))
      return std::string(v);
    return std::nullopt;
  });
}

Comm::Comm(CommConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.size < 1)
    throw InitError("communicator size must be >= 1");
  if (cfg_.rank < 0 || cfg_.rank >= cfg_.size)
    throw InitError("rank " + std::to_string(cfg_.rank) + " out of range for size " +
                    std::to_string(cfg_.size));
  if (cfg_.job_id.empty() || cfg_.job_id.find('/') != std::string::npos)
    throw InitError("invalid job id '" + cfg_.job_id + "'");
  std::error_code ec;
  if (!fs::is_directory(cfg_.comm_dir, ec))
    throw IoError("comm directory " + cfg_.comm_dir.string() + " is not reachable" +
                  (ec ? ": " + ec.message() : std::string{}));
  fs::create_directories(scratch_dir(), ec);
  if (ec)
    throw IoError("cannot create " + scratch_dir().string() + ": " + ec.message());
}

Comm& Comm::world() {
  static Comm instance(config_from_env());
  return instance;
}

fs::path Comm::scratch_dir() const {
  return job_dir() / ("scratch_r" + std::to_string(cfg_.rank));
}

std::string Comm::message_stem(int src, int dst, Tag tag) {
  return "msg_s" + std::to_string(src) + "_d" + std::to_string(dst) + "_t" + std::to_string(tag);
}

fs::path Comm::stem_path(int src, int dst, Tag tag) const {
  return job_dir() / message_stem(src, dst, tag);
}

void Comm::check_rank(int r, const char* what) const {
  if (r < 0 || r >= cfg_.size)
    throw ProtocolError(std::string(what) + " rank " + std::to_string(r) + " out of range [0, " +
                        std::to_string(cfg_.size) + ")");
}

void Comm::send(int dst, Tag tag, const TypedPayload& payload) {
  check_rank(dst, "destination");
  const auto stem = stem_path(cfg_.rank, dst, tag).string();
  const fs::path bin = stem + ".bin";
  const fs::path ready = stem + ".ready";
  if (exists_noexcept(ready) || exists_noexcept(bin))
    throw ProtocolError("message " + Comm::message_stem(cfg_.rank, dst, tag) +
                        " is still in flight; duplicate send");
  const auto bytes = encode(payload);
  write_then_rename(stem + ".bin.tmp", bin, bytes);
  write_then_rename(stem + ".ready.tmp", ready, {});
  ++counters_.sends;
  counters_.bytes_sent += bytes.size();
}

TypedPayload Comm::recv(int src, Tag tag) {
  check_rank(src, "source");
  const auto stem = stem_path(src, cfg_.rank, tag).string();
  const fs::path bin = stem + ".bin";
  const fs::path ready = stem + ".ready";

  const auto start = std::chrono::steady_clock::now();
  auto delay = kPollFloor;
  while (!exists_noexcept(ready)) {
    if (cfg_.recv_timeout && std::chrono::steady_clock::now() - start > *cfg_.recv_timeout)
      throw TimeoutError("timed out after " + std::to_string(cfg_.recv_timeout->count()) +
                         " ms waiting for " + Comm::message_stem(src, cfg_.rank, tag));
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, std::chrono::duration_cast<std::chrono::milliseconds>(kPollCap));
  }

  const auto bytes = read_file(bin);
  TypedPayload p;
  try {
    p = decode(bytes);
  } catch (const FormatError& e) {
    throw FormatError(bin.string() + ": " + e.what());
  }

  std::error_code ec;
  if (cfg_.keep_msgs) {
    fs::rename(bin, bin.string() + "." + std::to_string(kept_seq_++) + ".kept", ec);
    fs::remove(ready, ec);
  } else {
    fs::remove(ready, ec);
    fs::remove(bin, ec);
  }
  if (ec)
    throw IoError("cannot retire " + bin.string() + ": " + ec.message());
  ++counters_.recvs;
  counters_.bytes_received += bytes.size();
  return p;
}

std::vector<MessageId> Comm::probe(std::optional<int> src, std::optional<Tag> tag) const {
  std::vector<MessageId> out;
  std::error_code ec;
  fs::directory_iterator it(job_dir(), ec);
  if (ec)
    throw IoError("cannot scan " + job_dir().string() + ": " + ec.message());
  for (const auto& entry : it) {
    auto parsed = parse_marker(entry.path().filename().string());
    if (!parsed)
      continue;
    auto [s, d, t] = *parsed;
    if (d != cfg_.rank || (src && *src != s) || (tag && *tag != t))
      continue;
    out.push_back({s, t});
  }
  std::sort(out.begin(), out.end());
  return out;
}

TypedPayload Comm::bcast(int root, std::optional<TypedPayload> payload) {
  check_rank(root, "root");
  const Tag tag = collective_tag(Collective::bcast);
  if (cfg_.rank == root) {
    if (!payload)
      throw ProtocolError("bcast root must supply a payload");
    for (int r = 0; r < cfg_.size; ++r)
      if (r != root)
        send(r, tag, *payload);
    return std::move(*payload);
  }
  return recv(root, tag);
}

Tag Comm::collective_tag(Collective kind) {
  return kReservedTagBase | (static_cast<Tag>(kind) << 52) | (collective_seq_++ << 20);
}

void Comm::finalize() {
  if (finalized_)
    return;
  finalized_ = true;
  std::error_code ec;
  fs::remove_all(scratch_dir(), ec);
  if (ec)
    std::cerr << "dgrid: rank " << cfg_.rank << ": cannot remove scratch: " << ec.message() << "\n";

  const auto marker = [&](int r) { return job_dir() / ("fin_r" + std::to_string(r)); };
  try {
    write_then_rename(marker(cfg_.rank).string() + ".tmp", marker(cfg_.rank), {});
  } catch (const IoError& e) {
    std::cerr << "dgrid: rank " << cfg_.rank << ": " << e.what() << "\n";
    return;
  }
  if (cfg_.rank != 0)
    return;

  const auto limit = cfg_.recv_timeout ? *cfg_.recv_timeout
                                       : std::chrono::duration_cast<std::chrono::milliseconds>(kFinalizeWait);
  const auto start = std::chrono::steady_clock::now();
  auto delay = kPollFloor;
  for (int r = 0; r < cfg_.size;) {
    if (exists_noexcept(marker(r))) {
      ++r;
      continue;
    }
    if (std::chrono::steady_clock::now() - start > limit) {
      std::cerr << "dgrid: rank 0: rank " << r << " never finalized; comm dir not swept\n";
      return;
    }
    std::this_thread::sleep_for(delay);
    delay = std::min(delay * 2, std::chrono::duration_cast<std::chrono::milliseconds>(kPollCap));
  }

  fs::directory_iterator it(job_dir(), ec);
  if (ec) {
    std::cerr << "dgrid: rank 0: cannot sweep " << job_dir() << ": " << ec.message() << "\n";
    return;
  }
  std::vector<fs::path> doomed;
  for (const auto& entry : it) {
    const auto name = entry.path().filename().string();
    const bool is_msg = name.starts_with("msg_");
    const bool kept = name.ends_with(".kept");
    if (name.starts_with("fin_r") || name.starts_with("scratch_r") || (is_msg && !(cfg_.keep_msgs && kept)))
      doomed.push_back(entry.path());
  }
  for (const auto& p : doomed) {
    fs::remove_all(p, ec);
    if (ec)
      std::cerr << "dgrid: rank 0: cannot remove " << p << ": " << ec.message() << "\n";
  }
}

} // namespace dgrid

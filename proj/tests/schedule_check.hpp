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

// Compares a computed schedule with per-element owner tables.

#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dgrid/pitfalls.hpp"
#include "oracles.hpp"

namespace dgrid::test {

inline oracle::Layout layout_of(const Map& m) {
  oracle::Layout l;
  l.grid = m.grid();
  for (const auto& d : m.dists()) {
    switch (d.kind) {
    case DistKind::block: l.dists.push_back({oracle::Kind::block, 0}); break;
    case DistKind::cyclic: l.dists.push_back({oracle::Kind::cyclic, 1}); break;
    case DistKind::block_cyclic: l.dists.push_back({oracle::Kind::block_cyclic, d.block_size}); break;
    }
  }
  l.procs = m.procs();
  l.col_major = m.order() == Order::col_major;
  l.overlap = m.overlap();
  return l;
}

/// Empty string when the owned part of `sched` moves every element exactly
/// once from its source owner to its destination owner; a description of
/// the first discrepancy otherwise.
inline std::string check_owned_transfers(const RedistSchedule& sched, const std::vector<Index>& shape, const Map& src,
                                         const Map& dst) {
  const auto ls = layout_of(src), ld = layout_of(dst);
  std::map<std::vector<Index>, std::pair<int, int>> seen;
  std::ostringstream err;
  for (const auto& t : sched.transfers) {
    if (t.ghost)
      continue;
    bool bad = false;
    for_each_index(t.block, [&](std::span<const Index> g) {
      std::vector<Index> key(g.begin(), g.end());
      if (!seen.emplace(key, std::pair(t.sender, t.receiver)).second && !bad) {
        err << "element moved twice";
        bad = true;
      }
    });
    if (bad)
      return err.str();
  }
  std::size_t total = 0;
  std::string msg;
  oracle::each_index(shape, [&](const std::vector<std::int64_t>& g) {
    ++total;
    if (!msg.empty())
      return;
    const auto want = std::pair(oracle::owner_rank(ls, shape, g), oracle::owner_rank(ld, shape, g));
    auto it = seen.find(g);
    if (it == seen.end() || it->second != want) {
      std::ostringstream os;
      os << "element (";
      for (auto v : g)
        os << v << ' ';
      os << ") expected " << want.first << "->" << want.second;
      if (it != seen.end())
        os << " got " << it->second.first << "->" << it->second.second;
      else
        os << " missing";
      msg = os.str();
    }
  });
  if (!msg.empty())
    return msg;
  if (seen.size() != total)
    return "schedule moves elements outside the array";
  return {};
}

/// Same for ghost fills: every ghost element of every destination rank is
/// filled once, by the element's source owner.
inline std::string check_ghost_transfers(const RedistSchedule& sched, const std::vector<Index>& shape, const Map& src,
                                         const Map& dst) {
  const auto ls = layout_of(src), ld = layout_of(dst);
  std::map<std::pair<int, std::vector<Index>>, int> got;
  for (const auto& t : sched.transfers) {
    if (!t.ghost)
      continue;
    std::string dup;
    for_each_index(t.block, [&](std::span<const Index> g) {
      if (!got.emplace(std::pair(t.receiver, std::vector<Index>(g.begin(), g.end())), t.sender).second)
        dup = "ghost element filled twice";
    });
    if (!dup.empty())
      return dup;
  }
  std::map<std::pair<int, std::vector<Index>>, int> want;
  const auto nd = shape.size();
  for (std::size_t pos = 0; pos < ld.procs.size(); ++pos) {
    const int rank = ld.procs[pos];
    const auto coord = dst.position_to_coord(pos);
    oracle::each_index(shape, [&](const std::vector<std::int64_t>& g) {
      bool any_ghost = false, all_local = true;
      for (std::size_t d = 0; d < nd; ++d) {
        const bool own = oracle::owner(g[d], shape[d], ld.dists[d], ld.grid[d]) == coord[d];
        const bool gh = !own && oracle::is_ghost(g[d], shape[d], ld.dists[d], ld.grid[d], coord[d], ld.overlap[d]);
        any_ghost = any_ghost || gh;
        all_local = all_local && (own || gh);
      }
      if (all_local && any_ghost)
        want[{rank, g}] = oracle::owner_rank(ls, shape, g);
    });
  }
  if (got != want)
    return "ghost fills differ: expected " + std::to_string(want.size()) + " got " + std::to_string(got.size());
  return {};
}

} // namespace dgrid::test

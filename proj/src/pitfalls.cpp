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

#include "dgrid/pitfalls.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dgrid/error.hpp"

namespace dgrid {

namespace {

Index floor_div(Index a, Index b) {
  Index q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
    --q;
  return q;
}

Index ceil_div(Index a, Index b) { return -floor_div(-a, b); }

/// Per-dimension, per-grid-index ownership of one map over one shape.
struct Layout {
  std::vector<std::vector<FallsSet>> owned;     // [dim][grid index]
  std::vector<std::vector<IntervalList>> ghost; // [dim][grid index]
};

Layout layout_of(std::span<const Index> shape, const Map& m) {
  Layout lay;
  lay.owned.resize(shape.size());
  lay.ghost.resize(shape.size());
  for (std::size_t d = 0; d < shape.size(); ++d) {
    const int p = m.grid()[d];
    lay.owned[d] = dist_to_pitfalls(shape[d], m.dists()[d], p).per_proc;
    lay.ghost[d].resize(static_cast<std::size_t>(p));
    if (m.overlap()[d] > 0)
      for (int q = 0; q < p; ++q)
        lay.ghost[d][static_cast<std::size_t>(q)] =
            local_extent(shape[d], m.dists()[d], p, q, m.overlap()[d]).ghost;
  }
  return lay;
}

FallsSet as_falls(const IntervalList& list) {
  FallsSet out;
  out.reserve(list.size());
  for (const auto& iv : list)
    out.push_back({iv.lo, iv.hi - 1, iv.size(), 1});
  return out;
}

IntervalList merge_lists(const IntervalList& a, const IntervalList& b) {
  IntervalList all = a;
  all.insert(all.end(), b.begin(), b.end());
  return normalize(std::move(all));
}

Index origin_key(const std::vector<IntervalList>& block, std::size_t d) {
  return block[d].empty() ? 0 : block[d].front().lo;
}

} // namespace

IntervalList Falls::intervals() const {
  IntervalList out;
  if (empty())
    return out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k)
    out.push_back({l + k * s, r + k * s + 1});
  return normalize(std::move(out));
}

IntervalList expand(const FallsSet& set) {
  IntervalList out;
  for (const auto& f : set) {
    auto iv = f.intervals();
    out.insert(out.end(), iv.begin(), iv.end());
  }
  return normalize(std::move(out));
}

DimFalls dist_to_pitfalls(Index dim_size, const DistSpec& dist, int nprocs) {
  if (nprocs < 1)
    throw MapError("need at least one processor per dimension");
  DimFalls out;
  out.per_proc.resize(static_cast<std::size_t>(nprocs));
  if (dim_size <= 0)
    return out;

  if (dist.kind == DistKind::block) {
    const auto sizes = fair_share_sizes(dim_size, nprocs);
    Index start = 0;
    for (int q = 0; q < nprocs; ++q) {
      const Index n = sizes[static_cast<std::size_t>(q)];
      if (n > 0)
        out.per_proc[static_cast<std::size_t>(q)].push_back({start, start + n - 1, n, 1});
      start += n;
    }
    if (dim_size % nprocs == 0)
      out.uniform = Pitfalls{{0, sizes[0] - 1, sizes[0], 1}, sizes[0], nprocs};
    return out;
  }

  const Index b = dist.cyclic_block();
  const Index stride = b * nprocs;
  bool uniform = true;
  Index full0 = -1;
  for (int q = 0; q < nprocs; ++q) {
    auto& set = out.per_proc[static_cast<std::size_t>(q)];
    const Index first = q * b;
    if (first >= dim_size) {
      uniform = false;
      continue;
    }
    const Index total = ceil_div(dim_size - first, stride);
    const Index full = dim_size - first - b >= 0 ? floor_div(dim_size - first - b, stride) + 1 : 0;
    if (full > 0)
      set.push_back({first, first + b - 1, stride, full});
    if (total > full) {
      const Index last = first + full * stride;
      set.push_back({last, dim_size - 1, stride, 1});
      uniform = false;
    }
    if (q == 0)
      full0 = full;
    else if (full != full0)
      uniform = false;
  }
  if (uniform && full0 > 0)
    out.uniform = Pitfalls{{0, b - 1, stride, full0}, b, nprocs};
  return out;
}

IntervalList falls_intersect(const Falls& a, const Falls& b) {
  if (a.empty() || b.empty())
    return {};
  IntervalList out;
  for (Index i = 0; i < a.n; ++i) {
    const Index x0 = a.l + i * a.s;
    const Index x1 = a.r + i * a.s;
    Index jlo = 0, jhi = 0;
    if (b.n > 1 && b.s > 0) {
      // b's segment j overlaps [x0, x1] iff b.l + j*s <= x1 and b.r + j*s >= x0
      jlo = std::max<Index>(0, ceil_div(x0 - b.r, b.s));
      jhi = std::min<Index>(b.n - 1, floor_div(x1 - b.l, b.s));
    }
    for (Index j = jlo; j <= jhi; ++j) {
      const Index lo = std::max(x0, b.l + j * b.s);
      const Index hi = std::min(x1, b.r + j * b.s);
      if (lo <= hi)
        out.push_back({lo, hi + 1});
    }
  }
  return normalize(std::move(out));
}

IntervalList falls_intersect(const FallsSet& a, const FallsSet& b) {
  IntervalList out;
  for (const auto& fa : a)
    for (const auto& fb : b) {
      auto part = falls_intersect(fa, fb);
      out.insert(out.end(), part.begin(), part.end());
    }
  return normalize(std::move(out));
}

Index Transfer::count() const {
  Index n = 1;
  for (const auto& list : block)
    n *= total_size(list);
  return n;
}

RedistSchedule compute_schedule(std::span<const Index> shape, const Map& src, const Map& dst) {
  const std::size_t nd = shape.size();
  if (src.ndims() != nd || dst.ndims() != nd)
    throw ShapeError("array has " + std::to_string(nd) + " dims but maps have " +
                     std::to_string(src.ndims()) + " and " + std::to_string(dst.ndims()));
  for (auto e : shape)
    if (e < 0)
      throw ShapeError("negative extent");

  const Layout from = layout_of(shape, src);
  const Layout to = layout_of(shape, dst);

  // Pairwise per-dimension intersections, indexed [dim][src grid idx][dst grid idx].
  using Table = std::vector<std::vector<std::vector<IntervalList>>>;
  Table own(nd), ghost(nd), whole(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    const auto ps = static_cast<std::size_t>(src.grid()[d]);
    const auto pd = static_cast<std::size_t>(dst.grid()[d]);
    own[d].assign(ps, std::vector<IntervalList>(pd));
    ghost[d].assign(ps, std::vector<IntervalList>(pd));
    whole[d].assign(ps, std::vector<IntervalList>(pd));
    for (std::size_t i = 0; i < ps; ++i)
      for (std::size_t j = 0; j < pd; ++j) {
        own[d][i][j] = falls_intersect(from.owned[d][i], to.owned[d][j]);
        if (!to.ghost[d][j].empty())
          ghost[d][i][j] = falls_intersect(from.owned[d][i], as_falls(to.ghost[d][j]));
        whole[d][i][j] = merge_lists(own[d][i][j], ghost[d][i][j]);
      }
  }

  RedistSchedule sched;
  for (std::size_t sp = 0; sp < src.procs().size(); ++sp) {
    const auto sc = src.position_to_coord(sp);
    for (std::size_t dp = 0; dp < dst.procs().size(); ++dp) {
      const auto dc = dst.position_to_coord(dp);
      auto cell = [&](const Table& t, std::size_t d) -> const IntervalList& {
        return t[d][static_cast<std::size_t>(sc[d])][static_cast<std::size_t>(dc[d])];
      };

      Transfer t{src.procs()[sp], dst.procs()[dp], {}, false};
      bool nonempty = true;
      for (std::size_t d = 0; d < nd && nonempty; ++d) {
        t.block.push_back(cell(own, d));
        nonempty = !t.block.back().empty();
      }
      if (nonempty)
        sched.transfers.push_back(std::move(t));

      // The receiver's ghost region is (owned u ghost)^nd minus owned^nd,
      // split into disjoint slabs: owned in dims < k, ghost in dim k, anything after.
      for (std::size_t k = 0; k < nd; ++k) {
        if (cell(ghost, k).empty())
          continue;
        Transfer g{src.procs()[sp], dst.procs()[dp], {}, true};
        bool ok = true;
        for (std::size_t d = 0; d < nd && ok; ++d) {
          const auto& part = d < k ? cell(own, d) : d == k ? cell(ghost, d) : cell(whole, d);
          g.block.push_back(part);
          ok = !part.empty();
        }
        if (ok)
          sched.transfers.push_back(std::move(g));
      }
    }
  }

  std::stable_sort(sched.transfers.begin(), sched.transfers.end(),
                   [nd](const Transfer& a, const Transfer& b) {
                     if (a.sender != b.sender)
                       return a.sender < b.sender;
                     if (a.receiver != b.receiver)
                       return a.receiver < b.receiver;
                     if (a.ghost != b.ghost)
                       return !a.ghost;
                     for (std::size_t d = 0; d < nd; ++d) {
                       const auto ka = origin_key(a.block, d), kb = origin_key(b.block, d);
                       if (ka != kb)
                         return ka < kb;
                     }
                     return false;
                   });
  return sched;
}

std::size_t schedule_message_count(const RedistSchedule& sched) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& t : sched.transfers)
    if (!t.local())
      pairs.emplace(t.sender, t.receiver);
  return pairs.size();
}

std::size_t schedule_pair_count(const RedistSchedule& sched) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& t : sched.transfers)
    pairs.emplace(t.sender, t.receiver);
  return pairs.size();
}

std::string schedule_to_csv(const RedistSchedule& sched) {
  std::ostringstream os;
  os << "sender,receiver,kind,block,elements\n";
  for (const auto& t : sched.transfers) {
    os << t.sender << ',' << t.receiver << ',' << (t.ghost ? "ghost" : "owned") << ',';
    for (std::size_t d = 0; d < t.block.size(); ++d)
      os << (d ? "x" : "") << to_string(t.block[d]);
    os << ',' << t.count() << '\n';
  }
  return os.str();
}

void for_each_index(const std::vector<IntervalList>& block,
                    const std::function<void(std::span<const Index>)>& fn) {
  const std::size_t nd = block.size();
  for (const auto& list : block)
    if (list.empty())
      return;
  std::vector<std::size_t> iv(nd, 0);
  std::vector<Index> idx(nd);
  for (std::size_t d = 0; d < nd; ++d)
    idx[d] = block[d][0].lo;
  for (;;) {
    fn(idx);
    std::size_t d = nd;
    while (d-- > 0) {
      if (++idx[d] < block[d][iv[d]].hi)
        break;
      if (++iv[d] < block[d].size()) {
        idx[d] = block[d][iv[d]].lo;
        break;
      }
      iv[d] = 0;
      idx[d] = block[d][0].lo;
      if (d == 0)
        return;
    }
    if (nd == 0)
      return;
  }
}

} // namespace dgrid

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

#include "dgrid/map.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>
#include <sstream>

#include "dgrid/error.hpp"

namespace dgrid {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

template <class Int>
Int to_int(std::string_view s, std::string_view what) {
  s = trim(s);
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw MapError("bad " + std::string(what) + " value '" + std::string(s) + "'");
  return v;
}

std::vector<int> parse_procs(std::string_view s) {
  std::vector<int> out;
  for (auto part : split(s, ',')) {
    part = trim(part);
    if (part.empty())
      continue;
    const auto dash = part.find('-');
    if (dash == std::string_view::npos) {
      out.push_back(to_int<int>(part, "procs"));
      continue;
    }
    const int a = to_int<int>(part.substr(0, dash), "procs");
    const int b = to_int<int>(part.substr(dash + 1), "procs");
    if (b < a)
      throw MapError("descending proc range '" + std::string(part) + "'");
    for (int r = a; r <= b; ++r)
      out.push_back(r);
  }
  return out;
}

std::string format_procs(const std::vector<int>& procs) {
  std::string out;
  for (std::size_t i = 0; i < procs.size();) {
    std::size_t j = i;
    while (j + 1 < procs.size() && procs[j + 1] == procs[j] + 1)
      ++j;
    if (!out.empty())
      out += ',';
    out += std::to_string(procs[i]);
    if (j > i)
      out += '-' + std::to_string(procs[j]);
    i = j + 1;
  }
  return out;
}

} // namespace

Index total_size(const IntervalList& list) {
  Index n = 0;
  for (const auto& iv : list)
    n += iv.size();
  return n;
}

IntervalList normalize(IntervalList list) {
  std::erase_if(list, [](const Interval& iv) { return iv.empty(); });
  std::sort(list.begin(), list.end());
  IntervalList out;
  for (const auto& iv : list) {
    if (!out.empty() && iv.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

IntervalList intersect(const IntervalList& a, const IntervalList& b) {
  IntervalList out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const Index lo = std::max(a[i].lo, b[j].lo);
    const Index hi = std::min(a[i].hi, b[j].hi);
    if (lo < hi)
      out.push_back({lo, hi});
    if (a[i].hi < b[j].hi)
      ++i;
    else
      ++j;
  }
  return out;
}

IntervalList subtract(const IntervalList& a, const IntervalList& b) {
  IntervalList out;
  std::size_t j = 0;
  for (auto iv : a) {
    while (j < b.size() && b[j].hi <= iv.lo)
      ++j;
    std::size_t k = j;
    while (k < b.size() && b[k].lo < iv.hi) {
      if (b[k].lo > iv.lo)
        out.push_back({iv.lo, b[k].lo});
      iv.lo = std::max(iv.lo, b[k].hi);
      ++k;
    }
    if (iv.lo < iv.hi)
      out.push_back(iv);
  }
  return out;
}

std::string to_string(const IntervalList& list) {
  if (list.empty())
    return "{}";
  std::string out;
  for (const auto& iv : list) {
    if (!out.empty())
      out += '+';
    out += '[' + std::to_string(iv.lo) + ',' + std::to_string(iv.hi) + ')';
  }
  return out;
}

DistSpec DistSpec::block_cyclic(Index b) {
  if (b < 1)
    throw MapError("block-cyclic block size must be >= 1, got " + std::to_string(b));
  return {DistKind::block_cyclic, b};
}

DistSpec DistSpec::parse(std::string_view token) {
  token = trim(token);
  if (token == "b" || token == "block")
    return block();
  if (token == "c" || token == "cyclic")
    return cyclic();
  if (token.starts_with("bc")) {
    if (token.size() == 2)
      throw MapError("block-cyclic distribution needs a block size, e.g. 'bc2'");
    return block_cyclic(to_int<Index>(token.substr(2), "block size"));
  }
  throw MapError("unknown distribution '" + std::string(token) + "'");
}

std::string DistSpec::to_string() const {
  switch (kind) {
  case DistKind::block: return "b";
  case DistKind::cyclic: return "c";
  case DistKind::block_cyclic: return "bc" + std::to_string(block_size);
  }
  return "?";
}

Map::Map(std::vector<int> grid, std::vector<DistSpec> dists, std::vector<int> procs,
         std::vector<Index> overlap, Order order)
    : grid_(std::move(grid)), dists_(std::move(dists)), overlap_(std::move(overlap)),
      procs_(std::move(procs)), order_(order) {
  if (grid_.empty() || grid_.size() > max_dims)
    throw MapError("grid must have 1 to 4 dimensions, got " + std::to_string(grid_.size()));
  for (int g : grid_)
    if (g < 1)
      throw MapError("grid extents must be positive");
  if (dists_.empty())
    dists_.assign(grid_.size(), DistSpec::block());
  else if (dists_.size() == 1)
    dists_.assign(grid_.size(), dists_.front());
  if (dists_.size() != grid_.size())
    throw MapError("got " + std::to_string(dists_.size()) + " distributions for a " +
                   std::to_string(grid_.size()) + "-d grid");
  for (const auto& d : dists_)
    if (d.kind == DistKind::block_cyclic && d.block_size < 1)
      throw MapError("block-cyclic distribution is missing its block size");
  if (overlap_.empty())
    overlap_.assign(grid_.size(), 0);
  if (overlap_.size() != grid_.size())
    throw MapError("overlap has " + std::to_string(overlap_.size()) + " entries for a " +
                   std::to_string(grid_.size()) + "-d grid");
  for (Index o : overlap_)
    if (o < 0)
      throw MapError("overlap must be non-negative");
  const auto cells = std::accumulate(grid_.begin(), grid_.end(), std::size_t{1},
                                     [](std::size_t a, int g) { return a * static_cast<std::size_t>(g); });
  if (procs_.size() != cells)
    throw MapError("processor list has " + std::to_string(procs_.size()) + " ranks, grid needs " +
                   std::to_string(cells));
  std::set<int> seen;
  for (int r : procs_) {
    if (r < 0)
      throw MapError("negative rank " + std::to_string(r) + " in processor list");
    if (!seen.insert(r).second)
      throw MapError("rank " + std::to_string(r) + " appears twice in processor list");
  }
}

Map Map::parse(std::string_view literal) {
  std::optional<std::vector<int>> grid;
  std::vector<DistSpec> dists;
  std::optional<std::vector<int>> procs;
  std::vector<Index> overlap;
  Order order = Order::row_major;
  for (auto field : split(literal, ';')) {
    field = trim(field);
    if (field.empty())
      continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos)
      throw MapError("map field '" + std::string(field) + "' has no '='");
    const auto key = trim(field.substr(0, eq));
    const auto value = trim(field.substr(eq + 1));
    if (key == "grid") {
      grid.emplace();
      for (auto g : split(value, 'x'))
        grid->push_back(to_int<int>(g, "grid"));
    } else if (key == "dist") {
      dists.clear();
      if (!value.empty())
        for (auto d : split(value, ','))
          dists.push_back(DistSpec::parse(d));
    } else if (key == "procs") {
      procs = parse_procs(value);
    } else if (key == "overlap") {
      overlap.clear();
      for (auto o : split(value, ','))
        overlap.push_back(to_int<Index>(o, "overlap"));
    } else if (key == "order") {
      if (value == "row")
        order = Order::row_major;
      else if (value == "col")
        order = Order::col_major;
      else
        throw MapError("order must be 'row' or 'col', got '" + std::string(value) + "'");
    } else {
      throw MapError("unknown map field '" + std::string(key) + "'");
    }
  }
  if (!grid)
    throw MapError("map literal has no grid");
  if (!procs) {
    const int cells = std::accumulate(grid->begin(), grid->end(), 1, std::multiplies<>());
    procs.emplace(static_cast<std::size_t>(std::max(cells, 0)));
    std::iota(procs->begin(), procs->end(), 0);
  }
  return Map(*grid, std::move(dists), *procs, std::move(overlap), order);
}

std::string Map::to_string() const {
  std::ostringstream os;
  os << "grid=";
  for (std::size_t d = 0; d < grid_.size(); ++d)
    os << (d ? "x" : "") << grid_[d];
  os << ";dist=";
  for (std::size_t d = 0; d < dists_.size(); ++d)
    os << (d ? "," : "") << dists_[d].to_string();
  os << ";procs=" << format_procs(procs_) << ";overlap=";
  for (std::size_t d = 0; d < overlap_.size(); ++d)
    os << (d ? "," : "") << overlap_[d];
  os << ";order=" << (order_ == Order::row_major ? "row" : "col");
  return os.str();
}

int Map::leader() const { return *std::min_element(procs_.begin(), procs_.end()); }

std::optional<std::size_t> Map::position(int rank) const {
  auto it = std::find(procs_.begin(), procs_.end(), rank);
  if (it == procs_.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - procs_.begin());
}

GridCoord Map::position_to_coord(std::size_t pos) const {
  GridCoord c(grid_.size());
  if (order_ == Order::row_major) {
    for (std::size_t d = grid_.size(); d-- > 0;) {
      c[d] = static_cast<int>(pos % grid_[d]);
      pos /= grid_[d];
    }
  } else {
    for (std::size_t d = 0; d < grid_.size(); ++d) {
      c[d] = static_cast<int>(pos % grid_[d]);
      pos /= grid_[d];
    }
  }
  return c;
}

std::size_t Map::coord_to_position(const GridCoord& coord) const {
  if (coord.size() != grid_.size())
    throw MapError("coordinate has " + std::to_string(coord.size()) + " dims, grid has " +
                   std::to_string(grid_.size()));
  for (std::size_t d = 0; d < grid_.size(); ++d)
    if (coord[d] < 0 || coord[d] >= grid_[d])
      throw MapError("coordinate out of grid bounds in dimension " + std::to_string(d));
  std::size_t pos = 0;
  if (order_ == Order::row_major) {
    for (std::size_t d = 0; d < grid_.size(); ++d)
      pos = pos * grid_[d] + coord[d];
  } else {
    for (std::size_t d = grid_.size(); d-- > 0;)
      pos = pos * grid_[d] + coord[d];
  }
  return pos;
}

GridCoord Map::rank_to_coord(int rank) const {
  auto pos = position(rank);
  if (!pos)
    throw MapError("rank " + std::to_string(rank) + " is not in the processor list");
  return position_to_coord(*pos);
}

int Map::coord_to_rank(const GridCoord& coord) const { return procs_[coord_to_position(coord)]; }

IntervalList Extent::local() const {
  IntervalList all = owned;
  all.insert(all.end(), ghost.begin(), ghost.end());
  return normalize(std::move(all));
}

std::vector<Index> fair_share_sizes(Index dim_size, int nprocs) {
  std::vector<Index> sizes(static_cast<std::size_t>(nprocs), dim_size / nprocs);
  for (Index q = 0; q < dim_size % nprocs; ++q)
    ++sizes[static_cast<std::size_t>(q)];
  return sizes;
}

Extent local_extent(Index dim_size, const DistSpec& dist, int nprocs, int proc, Index overlap) {
  if (nprocs < 1 || proc < 0 || proc >= nprocs)
    throw MapError("processor index " + std::to_string(proc) + " out of range for " +
                   std::to_string(nprocs) + " processors");
  Extent e;
  if (dim_size <= 0)
    return e;
  if (dist.kind == DistKind::block) {
    const Index base = dim_size / nprocs;
    const Index rem = dim_size % nprocs;
    const Index lo = proc < rem ? proc * (base + 1) : rem * (base + 1) + (proc - rem) * base;
    const Index n = proc < rem ? base + 1 : base;
    if (n > 0)
      e.owned.push_back({lo, lo + n});
  } else {
    const Index b = dist.cyclic_block();
    const Index stride = b * nprocs;
    for (Index start = proc * b; start < dim_size; start += stride)
      e.owned.push_back({start, std::min(dim_size, start + b)});
    e.owned = normalize(std::move(e.owned));
  }
  if (overlap > 0) {
    IntervalList ghost;
    for (const auto& iv : e.owned)
      ghost.push_back({iv.hi, std::min(dim_size, iv.hi + overlap)});
    e.ghost = subtract(normalize(std::move(ghost)), e.owned);
  }
  return e;
}

bool is_serial_map(int scalar) {
  if (scalar != 1)
    throw MapError("only the scalar 1 may stand in for a map, got " + std::to_string(scalar));
  return true;
}

} // namespace dgrid

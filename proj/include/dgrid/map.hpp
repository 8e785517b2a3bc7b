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

// Maps: how a global array of up to four dimensions is laid out over a
// processor grid. A map names the grid shape, one distribution per
// dimension, the overlap (ghost width) per dimension, the ordered list of
// ranks that occupy the grid, and whether ranks fill the grid in row- or
// column-major order.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dgrid {

using Index = std::int64_t;

/// Half-open global index interval [lo, hi).
struct Interval {
  Index lo = 0;
  Index hi = 0;

  Index size() const { return hi > lo ? hi - lo : 0; }
  bool empty() const { return hi <= lo; }
  bool contains(Index i) const { return lo <= i && i < hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
  friend auto operator<=>(const Interval&, const Interval&) = default;
};

using IntervalList = std::vector<Interval>;

Index total_size(const IntervalList& list);

/// Sorts, drops empties and merges touching intervals.
IntervalList normalize(IntervalList list);

/// Set difference a \ b of two normalized lists.
IntervalList subtract(const IntervalList& a, const IntervalList& b);

/// Set intersection of two normalized lists.
IntervalList intersect(const IntervalList& a, const IntervalList& b);

std::string to_string(const IntervalList& list);

enum class DistKind { block, cyclic, block_cyclic };

struct DistSpec {
  DistKind kind = DistKind::block;
  Index block_size = 0; // only meaningful for block_cyclic

  static DistSpec block() { return {DistKind::block, 0}; }
  static DistSpec cyclic() { return {DistKind::cyclic, 1}; }
  static DistSpec block_cyclic(Index b);

  /// "b", "c" or "bc<k>".
  static DistSpec parse(std::string_view token);
  std::string to_string() const;

  /// Segment length for the cyclic family; 1 for cyclic.
  Index cyclic_block() const { return kind == DistKind::cyclic ? 1 : block_size; }

  friend bool operator==(const DistSpec&, const DistSpec&) = default;
};

enum class Order { row_major, col_major };

using GridCoord = std::vector<int>;

class Map {
public:
  static constexpr std::size_t max_dims = 4;

  /// An empty `dists` means block in every dimension; a single entry is
  /// applied to every dimension. An empty `overlap` means no overlap.
  Map(std::vector<int> grid, std::vector<DistSpec> dists, std::vector<int> procs,
      std::vector<Index> overlap = {}, Order order = Order::row_major);

  /// Parses `grid=2x2;dist=b,c;procs=0-3;overlap=0,1;order=row`.
  /// Only `grid` is required; procs defaults to 0..N-1.
  static Map parse(std::string_view literal);
  std::string to_string() const;

  std::size_t ndims() const { return grid_.size(); }
  const std::vector<int>& grid() const { return grid_; }
  const std::vector<DistSpec>& dists() const { return dists_; }
  const std::vector<Index>& overlap() const { return overlap_; }
  const std::vector<int>& procs() const { return procs_; }
  Order order() const { return order_; }
  int nprocs() const { return static_cast<int>(procs_.size()); }

  /// Lowest rank in the processor list.
  int leader() const;

  bool contains(int rank) const { return position(rank).has_value(); }
  std::optional<std::size_t> position(int rank) const;

  GridCoord rank_to_coord(int rank) const;
  int coord_to_rank(const GridCoord& coord) const;

  GridCoord position_to_coord(std::size_t pos) const;
  std::size_t coord_to_position(const GridCoord& coord) const;

  friend bool operator==(const Map&, const Map&) = default;

private:
  std::vector<int> grid_;
  std::vector<DistSpec> dists_;
  std::vector<Index> overlap_;
  std::vector<int> procs_;
  Order order_;
};

inline Map make_map(std::vector<int> grid, std::vector<DistSpec> dists, std::vector<int> procs,
                    std::vector<Index> overlap = {}, Order order = Order::row_major) {
  return Map(std::move(grid), std::move(dists), std::move(procs), std::move(overlap), order);
}

/// Ownership of one dimension for one processor index.
struct Extent {
  IntervalList owned;
  IntervalList ghost; // disjoint from owned

  /// owned and ghost merged, sorted.
  IntervalList local() const;
};

/// Global intervals of `dim_size` owned by processor `proc` of `nprocs`.
/// Block uses the fair-share rule: the first dim_size % nprocs processors get
/// one extra element. Ghosts extend each owned interval by `overlap` indices
/// toward the higher-index neighbor.
Extent local_extent(Index dim_size, const DistSpec& dist, int nprocs, int proc, Index overlap = 0);

/// Per-processor element counts for a block dimension.
std::vector<Index> fair_share_sizes(Index dim_size, int nprocs);

/// The scalar 1 turns distribution off; any other scalar is an error.
bool is_serial_map(int scalar);
inline bool is_serial_map(const Map&) { return false; }
inline bool is_serial_map(const std::optional<Map>& m) { return !m.has_value(); }

} // namespace dgrid

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

// Interval-family descriptions of distributions and the redistribution
// schedules computed from them.
//
// A Falls (family of line segments) is the set
//     union_{k=0..n-1} [l + k*s, r + k*s]        (inclusive bounds)
// and describes one processor's ownership along one axis. A Pitfalls adds
// the displacement d between consecutive processors and the processor count
// p, so processor q owns the Falls shifted by q*d.
//
// Block dimensions whose size is not a multiple of the processor count, and
// block-cyclic dimensions with a truncated final segment, do not have a
// uniform displacement; those are kept as a per-processor list of Falls.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgrid/map.hpp"

namespace dgrid {

struct Falls {
  Index l = 0; // first index of the first segment
  Index r = 0; // last index of the first segment, inclusive
  Index s = 0; // stride between segment starts
  Index n = 0; // segment count

  bool empty() const { return n <= 0 || r < l; }
  Index segment_length() const { return r - l + 1; }
  Index count() const { return empty() ? 0 : n * segment_length(); }
  IntervalList intervals() const;
  Falls shifted(Index by) const { return {l + by, r + by, s, n}; }

  friend bool operator==(const Falls&, const Falls&) = default;
};

/// One processor's ownership along one axis: a union of disjoint Falls.
using FallsSet = std::vector<Falls>;

IntervalList expand(const FallsSet& set);

struct Pitfalls {
  Falls falls; // processor 0
  Index d = 0;
  int p = 1;

  Falls instance(int q) const { return falls.shifted(q * d); }
  friend bool operator==(const Pitfalls&, const Pitfalls&) = default;
};

struct DimFalls {
  std::vector<FallsSet> per_proc;
  std::optional<Pitfalls> uniform; // set when every processor is a shift of processor 0
};

/// Per-processor Falls for one dimension; generated sets equal local_extent's owned intervals.
DimFalls dist_to_pitfalls(Index dim_size, const DistSpec& dist, int nprocs);

/// Exact intersection of two families as maximal disjoint intervals.
IntervalList falls_intersect(const Falls& a, const Falls& b);
IntervalList falls_intersect(const FallsSet& a, const FallsSet& b);

struct Transfer {
  int sender = 0;
  int receiver = 0;
  std::vector<IntervalList> block; // per dimension; the block is their Cartesian product
  bool ghost = false;              // fills receiver ghost cells rather than owned cells

  Index count() const;
  bool local() const { return sender == receiver; }
};

struct RedistSchedule {
  std::vector<Transfer> transfers;
};

/// Every (sender, receiver, block) move needed to turn an array laid out by
/// `src` into one laid out by `dst`, including refills of dst's ghost cells.
/// Sorted by (sender, receiver, ghost, block origin).
RedistSchedule compute_schedule(std::span<const Index> shape, const Map& src, const Map& dst);

/// Distinct (sender, receiver) pairs with sender != receiver: the number of
/// messages a redistribution sends.
std::size_t schedule_message_count(const RedistSchedule& sched);

/// Distinct (sender, receiver) pairs including local self-deliveries.
std::size_t schedule_pair_count(const RedistSchedule& sched);

/// CSV with header `sender,receiver,kind,block,elements`.
std::string schedule_to_csv(const RedistSchedule& sched);

/// Visits every global multi-index of a block in row-major order.
void for_each_index(const std::vector<IntervalList>& block,
                    const std::function<void(std::span<const Index>)>& fn);

} // namespace dgrid

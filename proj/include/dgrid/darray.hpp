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

// Distributed arrays. A DArray holds the global shape, its map, and this
// rank's local buffer: the Cartesian product over dimensions of the owned and
// ghost global indices, stored row-major. Every collective here (assign,
// agg, agg_all, sync_overlap, synch) must be called by every rank of the
// communicator in the same order.
//
// The free functions local/put_local/agg/global_block_range also accept plain
// Arrays and then act as serial identities, so a program written against them
// runs unchanged with distribution turned off.

#include <complex>
#include <cstdio>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dgrid/error.hpp"
#include "dgrid/fsmpi.hpp"
#include "dgrid/map.hpp"
#include "dgrid/ndarray.hpp"
#include "dgrid/payload.hpp"
#include "dgrid/pitfalls.hpp"

namespace dgrid {

/// Global intervals owned by one rank, per dimension.
struct GlobalRange {
  std::vector<IntervalList> dims;
  Index count() const;
  friend bool operator==(const GlobalRange&, const GlobalRange&) = default;
};

/// Maps global multi-indices that fall in a rank's local region to flat
/// offsets in its local buffer.
class LocalIndex {
public:
  LocalIndex() = default;
  explicit LocalIndex(std::vector<IntervalList> per_dim);

  const Shape& shape() const { return shape_; }
  const std::vector<IntervalList>& dims() const { return dims_; }

  bool contains(std::span<const Index> global) const;
  std::size_t offset(std::span<const Index> global) const;

  /// Local offsets of every element of `block`, in the block's row-major order.
  std::vector<std::size_t> flat_offsets(const std::vector<IntervalList>& block) const;

private:
  Index position(std::size_t d, Index g) const;

  std::vector<IntervalList> dims_;
  std::vector<std::vector<Index>> starts_; // local position of each interval's lo
  Shape shape_;
};

struct RedistStats {
  std::size_t messages_sent = 0;
  std::size_t messages_received = 0;
  std::size_t local_copies = 0; // self-delivered (sender == receiver) pairs
};

namespace detail {

/// Rethrows the in-flight dgrid::Error with `context` prefixed, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& context);

std::uint64_t rank_seed(std::uint64_t user_seed, int rank);
double unit_double(std::uint64_t bits);

} // namespace detail

template <class T>
class DArray {
public:
  using value_type = T;

  DArray(Shape shape, Map map, Comm& comm, const T& fill = T{})
      : shape_(std::move(shape)), map_(std::move(map)), comm_(&comm) {
    check_shape(shape_);
    if (map_.ndims() != shape_.size())
      throw ShapeError("shape " + shape_string(shape_) + " has " + std::to_string(shape_.size()) +
                       " dims but the map grid has " + std::to_string(map_.ndims()));
    for (int r : map_.procs())
      if (r >= comm.size())
        throw MapError("map uses rank " + std::to_string(r) + " but the communicator has " +
                       std::to_string(comm.size()) + " ranks");
    std::vector<IntervalList> local_dims(shape_.size());
    if (auto pos = map_.position(comm.rank())) {
      const auto coord = map_.position_to_coord(*pos);
      for (std::size_t d = 0; d < shape_.size(); ++d) {
        extents_.push_back(
            local_extent(shape_[d], map_.dists()[d], map_.grid()[d], coord[d], map_.overlap()[d]));
        falls_.push_back(dist_to_pitfalls(shape_[d], map_.dists()[d], map_.grid()[d])
                             .per_proc[static_cast<std::size_t>(coord[d])]);
        local_dims[d] = extents_.back().local();
      }
    }
    index_ = LocalIndex(std::move(local_dims));
    local_ = Array<T>(index_.shape(), fill);
  }

  const Shape& shape() const { return shape_; }
  const Map& map() const { return map_; }
  Comm& comm() const { return *comm_; }
  bool in_map() const { return !extents_.empty(); }

  /// Owned intervals of dimension d on this rank (empty off-map).
  IntervalList owned(std::size_t d) const { return in_map() ? extents_[d].owned : IntervalList{}; }
  IntervalList ghost(std::size_t d) const { return in_map() ? extents_[d].ghost : IntervalList{}; }
  GlobalRange owned_range() const {
    GlobalRange g;
    for (std::size_t d = 0; d < shape_.size(); ++d)
      g.dims.push_back(owned(d));
    return g;
  }

  /// Cached per-dimension Falls of this rank's owned indices.
  const std::vector<FallsSet>& falls() const { return falls_; }
  const LocalIndex& local_index() const { return index_; }

  const Array<T>& local_array() const { return local_; }
  Array<T>& local_array() { return local_; }
  std::span<T> local_data() { return local_.data(); }
  std::span<const T> local_data() const { return local_.data(); }

  /// Value at a global index that is local to this rank.
  const T& at_global(std::span<const Index> g) const { return local_[index_.offset(g)]; }
  T& at_global(std::span<const Index> g) { return local_[index_.offset(g)]; }

  /// Subscripted assignment `this[:, ..., :] = src`: redistributes src into
  /// this array's layout and refreshes ghost cells from their owners.
  RedistStats assign(const DArray& src);

  /// Every rank holds the whole of `src`; each copies its local region.
  void assign(const Array<T>& src);

  /// Refreshes ghost cells from the ranks that own them.
  RedistStats sync_overlap();

  /// One-line record: rank, owned ranges, ghost ranges, CRC32 of the local buffer.
  std::string describe() const;

private:
  RedistStats run_schedule(const RedistSchedule& sched, const DArray& src, bool ghosts_only);

  Shape shape_;
  Map map_;
  Comm* comm_;
  std::vector<Extent> extents_;
  std::vector<FallsSet> falls_;
  LocalIndex index_;
  Array<T> local_;
};

template <class T>
RedistStats DArray<T>::assign(const DArray& src) {
  if (src.shape_ != shape_)
    throw ShapeError("cannot assign " + shape_string(src.shape_) + " into " + shape_string(shape_));
  if (src.comm_ != comm_)
    throw MapMismatchError("arrays belong to different communicators");
  if (&src == this)
    return {};
  if (src.map_ == map_) {
    local_ = src.local_;
    return {0, 0, in_map() ? 1u : 0u};
  }
  return run_schedule(compute_schedule(shape_, src.map_, map_), src, false);
}

template <class T>
void DArray<T>::assign(const Array<T>& src) {
  if (src.shape() != shape_)
    throw ShapeError("cannot assign " + shape_string(src.shape()) + " into " + shape_string(shape_));
  std::size_t k = 0;
  for_each_index(index_.dims(), [&](std::span<const Index> g) { local_[k++] = src.at(g); });
}

template <class T>
RedistStats DArray<T>::sync_overlap() {
  bool any = false;
  for (auto o : map_.overlap())
    any = any || o > 0;
  if (!any)
    return {};
  return run_schedule(compute_schedule(shape_, map_, map_), *this, true);
}

template <class T>
RedistStats DArray<T>::run_schedule(const RedistSchedule& sched, const DArray& src, bool ghosts_only) {
  const int me = comm_->rank();
  const Tag tag = comm_->collective_tag(Collective::redistribute);
  RedistStats stats;

  std::map<int, std::vector<T>> outgoing;
  bool self = false;
  for (const auto& t : sched.transfers) {
    if (t.sender != me || (ghosts_only && !t.ghost))
      continue;
    const auto from = src.index_.flat_offsets(t.block);
    if (t.receiver == me) {
      const auto to = index_.flat_offsets(t.block);
      for (std::size_t i = 0; i < from.size(); ++i)
        local_[to[i]] = src.local_[from[i]];
      self = true;
    } else {
      auto& buf = outgoing[t.receiver];
      for (auto o : from)
        buf.push_back(src.local_[o]);
    }
  }
  stats.local_copies = self ? 1 : 0;

  for (auto& [receiver, buf] : outgoing) {
    try {
      comm_->send(receiver, tag, TypedPayload::array<T>(std::span<const T>(buf)));
    } catch (const Error&) {
      detail::rethrow_with_context("redistribute send " + std::to_string(me) + "->" +
                                   std::to_string(receiver) + ": ");
    }
    ++stats.messages_sent;
  }

  std::map<int, std::vector<const Transfer*>> incoming;
  for (const auto& t : sched.transfers)
    if (t.receiver == me && t.sender != me && (!ghosts_only || t.ghost))
      incoming[t.sender].push_back(&t);

  for (const auto& [sender, list] : incoming) {
    std::vector<T> values;
    try {
      values = comm_->recv(sender, tag).template as_vector<T>();
    } catch (const Error&) {
      std::string blocks;
      for (const auto* t : list) {
        blocks += blocks.empty() ? "" : " ";
        for (std::size_t d = 0; d < t->block.size(); ++d)
          blocks += (d ? "x" : "") + to_string(t->block[d]);
      }
      detail::rethrow_with_context("redistribute recv " + std::to_string(sender) + "->" +
                                   std::to_string(me) + " block " + blocks + ": ");
    }
    std::size_t k = 0;
    for (const auto* t : list) {
      const auto to = index_.flat_offsets(t->block);
      if (k + to.size() > values.size())
        throw FormatError("redistribute message from rank " + std::to_string(sender) +
                          " is shorter than its schedule");
      for (auto o : to)
        local_[o] = values[k++];
    }
    if (k != values.size())
      throw FormatError("redistribute message from rank " + std::to_string(sender) +
                        " is longer than its schedule");
    ++stats.messages_received;
  }
  return stats;
}

template <class T>
std::string DArray<T>::describe() const {
  std::string s = "rank=" + std::to_string(comm_->rank()) + " owned=";
  for (std::size_t d = 0; d < shape_.size(); ++d)
    s += (d ? "x" : "") + to_string(owned(d));
  s += " ghost=";
  for (std::size_t d = 0; d < shape_.size(); ++d)
    s += (d ? "x" : "") + to_string(ghost(d));
  const auto bytes = std::as_bytes(local_.data());
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc32_of(bytes));
  return s + " crc32=" + hex;
}

// ---- factories -------------------------------------------------------------

template <class T = double>
DArray<T> constant(Shape shape, const Map& map, Comm& comm, const T& value) {
  return DArray<T>(std::move(shape), map, comm, value);
}
template <class T = double>
Array<T> constant(Shape shape, int serial, const T& value) {
  is_serial_map(serial);
  return Array<T>(std::move(shape), value);
}

template <class T = double>
DArray<T> zeros(Shape shape, const Map& map, Comm& comm) { return constant<T>(std::move(shape), map, comm, T(0)); }
template <class T = double>
Array<T> zeros(Shape shape, int serial) { return constant<T>(std::move(shape), serial, T(0)); }

template <class T = double>
DArray<T> ones(Shape shape, const Map& map, Comm& comm) { return constant<T>(std::move(shape), map, comm, T(1)); }
template <class T = double>
Array<T> ones(Shape shape, int serial) { return constant<T>(std::move(shape), serial, T(1)); }

/// Uniform [0, 1) values. Each rank draws from its own stream, seeded by
/// mixing `seed` with the rank, so ranks never see the same numbers.
DArray<double> rand(Shape shape, const Map& map, Comm& comm, std::uint64_t seed = 0);
Array<double> rand(Shape shape, int serial, std::uint64_t seed = 0);

/// Fills every local element (owned and ghost) with fn(global index).
template <class T, class Fn>
DArray<T> generate(Shape shape, const Map& map, Comm& comm, Fn&& fn) {
  DArray<T> a(std::move(shape), map, comm);
  std::size_t k = 0;
  auto data = a.local_data();
  for_each_index(a.local_index().dims(), [&](std::span<const Index> g) { data[k++] = fn(g); });
  return a;
}
template <class T, class Fn>
Array<T> generate(Shape shape, int serial, Fn&& fn) {
  is_serial_map(serial);
  Array<T> a(std::move(shape));
  for_each_element(a.shape(), [&](std::span<const Index> g, std::size_t flat) { a[flat] = fn(g); });
  return a;
}

// ---- element-wise ----------------------------------------------------------

namespace detail {

template <class T, class Op>
DArray<T> zip(const DArray<T>& a, const DArray<T>& b, Op op) {
  if (a.shape() != b.shape())
    throw ShapeError("shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  if (a.map() != b.map() || &a.comm() != &b.comm())
    throw MapMismatchError("element-wise operands have different maps (" + a.map().to_string() +
                           " vs " + b.map().to_string() + "); redistribute one first");
  DArray<T> out = a;
  auto od = out.local_data();
  auto bd = b.local_data();
  for (std::size_t i = 0; i < od.size(); ++i)
    od[i] = op(od[i], bd[i]);
  return out;
}

template <class T, class Op>
DArray<T> map_values(const DArray<T>& a, Op op) {
  DArray<T> out = a;
  for (auto& x : out.local_data())
    x = op(x);
  return out;
}

} // namespace detail

template <class T>
DArray<T> operator+(const DArray<T>& a, const DArray<T>& b) { return detail::zip(a, b, std::plus<>()); }
template <class T>
DArray<T> operator-(const DArray<T>& a, const DArray<T>& b) { return detail::zip(a, b, std::minus<>()); }
template <class T>
DArray<T> operator*(const DArray<T>& a, const DArray<T>& b) { return detail::zip(a, b, std::multiplies<>()); }
template <class T>
DArray<T> operator/(const DArray<T>& a, const DArray<T>& b) { return detail::zip(a, b, std::divides<>()); }

template <class T>
DArray<T> operator+(const DArray<T>& a, const std::type_identity_t<T>& s) {
  return detail::map_values(a, [&](const T& x) { return x + s; });
}
template <class T>
DArray<T> operator+(const std::type_identity_t<T>& s, const DArray<T>& a) {
  return detail::map_values(a, [&](const T& x) { return s + x; });
}
template <class T>
DArray<T> operator-(const DArray<T>& a, const std::type_identity_t<T>& s) {
  return detail::map_values(a, [&](const T& x) { return x - s; });
}
template <class T>
DArray<T> operator*(const DArray<T>& a, const std::type_identity_t<T>& s) {
  return detail::map_values(a, [&](const T& x) { return x * s; });
}
template <class T>
DArray<T> operator*(const std::type_identity_t<T>& s, const DArray<T>& a) {
  return detail::map_values(a, [&](const T& x) { return s * x; });
}
template <class T>
DArray<T> operator/(const DArray<T>& a, const std::type_identity_t<T>& s) {
  return detail::map_values(a, [&](const T& x) { return x / s; });
}

// ---- redistribution and support functions ----------------------------------

template <class T>
RedistStats assign_redistribute(DArray<T>& dst, const DArray<T>& src) { return dst.assign(src); }
template <class T>
RedistStats assign_redistribute(DArray<T>& dst, const Array<T>& src) {
  dst.assign(src);
  return {};
}
template <class T>
RedistStats assign_redistribute(Array<T>& dst, const Array<T>& src) {
  if (dst.shape() != src.shape())
    throw ShapeError("cannot assign " + shape_string(src.shape()) + " into " + shape_string(dst.shape()));
  dst = src;
  return {};
}

template <class T>
Array<T> local(const DArray<T>& a) { return a.local_array(); }
template <class T>
Array<T> local(const Array<T>& a) { return a; }

template <class T>
void put_local(DArray<T>& a, Array<T> data) {
  if (data.shape() != a.local_array().shape())
    throw ShapeError("put_local: data shape " + shape_string(data.shape()) + " does not match local shape " +
                     shape_string(a.local_array().shape()));
  a.local_array() = std::move(data);
}
template <class T>
void put_local(Array<T>& a, Array<T> data) {
  if (data.shape() != a.shape())
    throw ShapeError("put_local: data shape " + shape_string(data.shape()) + " does not match " +
                     shape_string(a.shape()));
  a = std::move(data);
}

/// Owned intervals of `rank` under the array's map.
GlobalRange global_block_range(const Shape& shape, const Map& map, int rank);

template <class T>
GlobalRange global_block_range(const DArray<T>& a, int rank) { return global_block_range(a.shape(), a.map(), rank); }
template <class T>
GlobalRange global_block_range(const Array<T>& a, int /*rank*/) {
  GlobalRange g;
  for (auto e : a.shape())
    g.dims.push_back(e > 0 ? IntervalList{{0, e}} : IntervalList{});
  return g;
}

template <class T>
std::vector<GlobalRange> global_block_ranges(const DArray<T>& a) {
  std::vector<GlobalRange> out;
  for (int r : a.map().procs())
    out.push_back(global_block_range(a, r));
  return out;
}
template <class T>
std::vector<GlobalRange> global_block_ranges(const Array<T>& a) { return {global_block_range(a, 0)}; }

/// Collects every owned block on the map's leader (lowest rank in its
/// processor list), which returns the whole array. Other ranks return their
/// local part; ranks outside the map return an empty array.
template <class T>
Array<T> agg(const DArray<T>& a) {
  Comm& comm = a.comm();
  const Tag tag = comm.collective_tag(Collective::aggregate);
  const Map& m = a.map();
  const int me = comm.rank();
  if (!a.in_map())
    return a.local_array();
  const int leader = m.leader();
  if (me != leader) {
    const auto range = a.owned_range();
    if (range.count() > 0) {
      const auto offs = a.local_index().flat_offsets(range.dims);
      std::vector<T> buf;
      buf.reserve(offs.size());
      for (auto o : offs)
        buf.push_back(a.local_data()[o]);
      try {
        comm.send(leader, tag, TypedPayload::array<T>(std::span<const T>(buf)));
      } catch (const Error&) {
        detail::rethrow_with_context("agg send " + std::to_string(me) + "->" + std::to_string(leader) + ": ");
      }
    }
    return a.local_array();
  }
  Array<T> full(a.shape());
  for (int r : m.procs()) {
    const auto range = global_block_range(a, r);
    if (range.count() == 0)
      continue;
    std::vector<T> values;
    if (r == me) {
      for (auto o : a.local_index().flat_offsets(range.dims))
        values.push_back(a.local_data()[o]);
    } else {
      try {
        values = comm.recv(r, tag).template as_vector<T>();
      } catch (const Error&) {
        detail::rethrow_with_context("agg recv " + std::to_string(r) + "->" + std::to_string(me) + ": ");
      }
    }
    if (static_cast<Index>(values.size()) != range.count())
      throw FormatError("agg: rank " + std::to_string(r) + " sent " + std::to_string(values.size()) +
                        " elements, expected " + std::to_string(range.count()));
    std::size_t k = 0;
    for_each_index(range.dims, [&](std::span<const Index> g) { full.at(g) = values[k++]; });
  }
  return full;
}
template <class T>
Array<T> agg(const Array<T>& a) { return a; }

/// agg followed by a broadcast: every rank returns the whole array.
template <class T>
Array<T> agg_all(const DArray<T>& a) {
  auto full = agg(a);
  Comm& comm = a.comm();
  const int leader = a.map().leader();
  std::optional<TypedPayload> p;
  if (comm.rank() == leader)
    p = TypedPayload::array<T>(full.data(), std::vector<std::uint64_t>(a.shape().begin(), a.shape().end()));
  auto got = comm.bcast(leader, std::move(p));
  return Array<T>(a.shape(), got.template as_vector<T>());
}
template <class T>
Array<T> agg_all(const Array<T>& a) { return a; }

/// The processor list laid out on the grid in the map's order.
Array<int> grid(const Map& map);
template <class T>
Array<int> grid(const DArray<T>& a) { return grid(a.map()); }

inline bool inmap(const Map& map, int rank) { return map.contains(rank); }

/// Barrier over the whole communicator: gather to rank 0, then release.
void synch(Comm& comm);

} // namespace dgrid

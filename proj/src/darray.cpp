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

#include "dgrid/darray.hpp"

#include <algorithm>
#include <exception>

namespace dgrid {

Index GlobalRange::count() const {
  if (dims.empty())
    return 0;
  Index n = 1;
  for (const auto& d : dims)
    n *= total_size(d);
  return n;
}

LocalIndex::LocalIndex(std::vector<IntervalList> per_dim) : dims_(std::move(per_dim)) {
  for (const auto& list : dims_) {
    std::vector<Index> starts;
    Index pos = 0;
    for (const auto& iv : list) {
      starts.push_back(pos);
      pos += iv.size();
    }
    starts_.push_back(std::move(starts));
    shape_.push_back(pos);
  }
}

Index LocalIndex::position(std::size_t d, Index g) const {
  const auto& list = dims_[d];
  auto it = std::upper_bound(list.begin(), list.end(), g,
                             [](Index v, const Interval& iv) { return v < iv.lo; });
  if (it == list.begin() || !(it - 1)->contains(g))
    return -1;
  const auto k = static_cast<std::size_t>(it - list.begin() - 1);
  return starts_[d][k] + (g - list[k].lo);
}

bool LocalIndex::contains(std::span<const Index> global) const {
  if (global.size() != dims_.size())
    return false;
  for (std::size_t d = 0; d < dims_.size(); ++d)
    if (position(d, global[d]) < 0)
      return false;
  return true;
}

std::size_t LocalIndex::offset(std::span<const Index> global) const {
  if (global.size() != dims_.size())
    throw ShapeError("index has " + std::to_string(global.size()) + " dims, array has " +
                     std::to_string(dims_.size()));
  std::size_t flat = 0;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    const Index p = position(d, global[d]);
    if (p < 0)
      throw ShapeError("global index " + std::to_string(global[d]) + " in dimension " + std::to_string(d) +
                       " is not local to this rank");
    flat = flat * static_cast<std::size_t>(shape_[d]) + static_cast<std::size_t>(p);
  }
  return flat;
}

std::vector<std::size_t> LocalIndex::flat_offsets(const std::vector<IntervalList>& block) const {
  const std::size_t nd = dims_.size();
  if (block.size() != nd)
    throw ShapeError("block has " + std::to_string(block.size()) + " dims, array has " + std::to_string(nd));
  // Per-dimension local positions, then an odometer over their product.
  std::vector<std::vector<std::size_t>> pos(nd);
  std::size_t total = 1;
  for (std::size_t d = 0; d < nd; ++d) {
    for (const auto& iv : block[d])
      for (Index g = iv.lo; g < iv.hi; ++g) {
        const Index p = position(d, g);
        if (p < 0)
          throw ShapeError("block index " + std::to_string(g) + " in dimension " + std::to_string(d) +
                           " is not local to this rank");
        pos[d].push_back(static_cast<std::size_t>(p));
      }
    total *= pos[d].size();
  }
  std::vector<std::size_t> out;
  if (total == 0)
    return out;
  out.reserve(total);
  std::vector<std::size_t> stride(nd, 1);
  for (std::size_t d = nd; d-- > 1;)
    stride[d - 1] = stride[d] * static_cast<std::size_t>(shape_[d]);
  std::vector<std::size_t> k(nd, 0);
  for (;;) {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < nd; ++d)
      flat += pos[d][k[d]] * stride[d];
    out.push_back(flat);
    std::size_t d = nd;
    while (d-- > 0) {
      if (++k[d] < pos[d].size())
        break;
      k[d] = 0;
      if (d == 0)
        return out;
    }
  }
}

namespace detail {

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const TimeoutError& e) {
    throw TimeoutError(context + e.what());
  } catch (const FormatError& e) {
    throw FormatError(context + e.what());
  } catch (const ProtocolError& e) {
    throw ProtocolError(context + e.what());
  } catch (const IoError& e) {
    throw IoError(context + e.what());
  } catch (const Error& e) {
    throw Error(context + e.what());
  }
}

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
} // namespace

std::uint64_t rank_seed(std::uint64_t user_seed, int rank) {
  std::uint64_t s = user_seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t r = static_cast<std::uint64_t>(rank) ^ a;
  return splitmix64(r);
}

double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

} // namespace detail

DArray<double> rand(Shape shape, const Map& map, Comm& comm, std::uint64_t seed) {
  DArray<double> a(std::move(shape), map, comm);
  std::mt19937_64 gen(detail::rank_seed(seed, comm.rank()));
  for (auto& x : a.local_data())
    x = detail::unit_double(gen());
  return a;
}

Array<double> rand(Shape shape, int serial, std::uint64_t seed) {
  is_serial_map(serial);
  Array<double> a(std::move(shape));
  std::mt19937_64 gen(detail::rank_seed(seed, 0));
  for (auto& x : a.data())
    x = detail::unit_double(gen());
  return a;
}

GlobalRange global_block_range(const Shape& shape, const Map& map, int rank) {
  if (map.ndims() != shape.size())
    throw ShapeError("map has " + std::to_string(map.ndims()) + " dims, array has " +
                     std::to_string(shape.size()));
  const auto coord = map.rank_to_coord(rank);
  GlobalRange g;
  for (std::size_t d = 0; d < shape.size(); ++d)
    g.dims.push_back(local_extent(shape[d], map.dists()[d], map.grid()[d], coord[d]).owned);
  return g;
}

Array<int> grid(const Map& map) {
  Shape shape(map.grid().begin(), map.grid().end());
  Array<int> out(shape);
  for_each_element(shape, [&](std::span<const Index> idx, std::size_t flat) {
    GridCoord c(idx.begin(), idx.end());
    out[flat] = map.coord_to_rank(c);
  });
  return out;
}

void synch(Comm& comm) {
  const Tag tag = comm.collective_tag(Collective::synch);
  if (comm.size() == 1)
    return;
  const auto token = TypedPayload::empty();
  if (comm.rank() == 0) {
    for (int r = 1; r < comm.size(); ++r)
      comm.recv(r, tag);
    for (int r = 1; r < comm.size(); ++r)
      comm.send(r, tag, token);
  } else {
    comm.send(0, tag, token);
    comm.recv(0, tag);
  }
}

} // namespace dgrid

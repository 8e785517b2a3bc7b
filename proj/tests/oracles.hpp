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

// Reference computations used only by tests. They follow the written rules
// element by element and share no code with the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

enum class Kind { block, cyclic, block_cyclic };

struct Dist {
  Kind kind = Kind::block;
  std::int64_t b = 1;
};

/// Per-processor counts: the base share, then the remainder handed out one
/// by one from processor 0.
inline std::vector<std::int64_t> fair_share(std::int64_t n, int p) {
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(p), n / p);
  std::int64_t left = n - (n / p) * p;
  for (int q = 0; left > 0; ++q, --left)
    ++sizes[static_cast<std::size_t>(q)];
  return sizes;
}

/// Processor index owning element i of a dimension.
inline int owner(std::int64_t i, std::int64_t n, Dist d, int p) {
  switch (d.kind) {
  case Kind::block: {
    const auto sizes = fair_share(n, p);
    std::int64_t start = 0;
    for (int q = 0; q < p; ++q) {
      start += sizes[static_cast<std::size_t>(q)];
      if (i < start)
        return q;
    }
    return -1;
  }
  case Kind::cyclic:
    return static_cast<int>(i % p);
  case Kind::block_cyclic:
    return static_cast<int>((i / d.b) % p);
  }
  return -1;
}

/// Element i is a ghost of processor q when q does not own it but owns one
/// of the `overlap` elements just below it.
inline bool is_ghost(std::int64_t i, std::int64_t n, Dist d, int p, int q, std::int64_t overlap) {
  if (owner(i, n, d, p) == q)
    return false;
  for (std::int64_t j = i - 1; j >= 0 && j >= i - overlap; --j)
    if (owner(j, n, d, p) == q)
      return true;
  return false;
}

struct Layout {
  std::vector<int> grid;
  std::vector<Dist> dists;
  std::vector<int> procs;
  bool col_major = false;
  std::vector<std::int64_t> overlap;
};

/// Global rank at a grid coordinate.
inline int rank_at(const Layout& m, const std::vector<int>& coord) {
  std::size_t pos = 0, stride = 1;
  const std::size_t nd = m.grid.size();
  for (std::size_t k = 0; k < nd; ++k) {
    const std::size_t d = m.col_major ? k : nd - 1 - k;
    pos += static_cast<std::size_t>(coord[d]) * stride;
    stride *= static_cast<std::size_t>(m.grid[d]);
  }
  return m.procs[pos];
}

inline int owner_rank(const Layout& m, const std::vector<std::int64_t>& shape, const std::vector<std::int64_t>& g) {
  std::vector<int> coord(shape.size());
  for (std::size_t d = 0; d < shape.size(); ++d)
    coord[d] = owner(g[d], shape[d], m.dists[d], m.grid[d]);
  return rank_at(m, coord);
}

/// Calls fn(g) for every index of the shape, last dimension fastest.
template <class Fn>
void each_index(const std::vector<std::int64_t>& shape, Fn fn) {
  for (auto e : shape)
    if (e == 0)
      return;
  std::vector<std::int64_t> g(shape.size(), 0);
  while (true) {
    fn(g);
    std::size_t d = shape.size();
    while (d > 0) {
      --d;
      if (++g[d] < shape[d])
        break;
      g[d] = 0;
      if (d == 0)
        return;
    }
    if (shape.empty())
      return;
  }
}

using cplx = std::complex<double>;

inline std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * cplx(std::cos(a), std::sin(a));
    }
    y[k] = acc;
  }
  return y;
}

inline double rel_l2(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

/// T[i] = i, then T[r & mask] ^= r over r_1 = step(seed), r_{k+1} = step(r_k),
/// with step the 13/7/17 xorshift.
inline std::vector<std::uint64_t> xor_replay(int bits, std::uint64_t updates, std::uint64_t seed) {
  const std::uint64_t size = std::uint64_t{1} << bits;
  std::vector<std::uint64_t> t(size);
  for (std::uint64_t i = 0; i < size; ++i)
    t[i] = i;
  std::uint64_t r = seed;
  for (std::uint64_t k = 0; k < updates; ++k) {
    r ^= r << 13;
    r ^= r >> 7;
    r ^= r << 17;
    t[r % size] ^= r;
  }
  return t;
}

} // namespace oracle

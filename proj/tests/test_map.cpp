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

#include <doctest.h>

#include "dgrid/error.hpp"
#include "dgrid/map.hpp"
#include "oracles.hpp"

using namespace dgrid;

namespace {

std::vector<Index> owned_sizes(Index n, const DistSpec& d, int p) {
  std::vector<Index> out;
  for (int q = 0; q < p; ++q)
    out.push_back(total_size(local_extent(n, d, p, q).owned));
  return out;
}

oracle::Dist to_oracle(const DistSpec& d) {
  switch (d.kind) {
  case DistKind::block: return {oracle::Kind::block, 0};
  case DistKind::cyclic: return {oracle::Kind::cyclic, 1};
  case DistKind::block_cyclic: return {oracle::Kind::block_cyclic, d.block_size};
  }
  return {};
}

IntervalList set_to_intervals(const std::vector<Index>& members) {
  IntervalList out;
  for (Index i : members) {
    if (!out.empty() && out.back().hi == i)
      ++out.back().hi;
    else
      out.push_back({i, i + 1});
  }
  return out;
}

} // namespace

TEST_SUITE("mapdist") {

TEST_CASE("make_map examples") {
  const Map m = make_map({1, 4}, {}, {0, 1, 2, 3});
  CHECK(m.dists() == std::vector<DistSpec>{DistSpec::block(), DistSpec::block()});
  CHECK(m.nprocs() == 4);

  const Map c({2, 2}, {DistSpec::cyclic()}, {0, 1, 2, 3});
  CHECK(c.dists() == std::vector<DistSpec>{DistSpec::cyclic(), DistSpec::cyclic()});

  CHECK_THROWS_AS(make_map({2, 2}, {}, {0, 1, 2}), MapError);
  CHECK_THROWS_AS(make_map({2, 2}, {}, {0, 1, 1, 2}), MapError);
  CHECK_THROWS_AS(make_map({1, 1, 1, 1, 1}, {}, {0}), MapError);
  CHECK_THROWS_AS(make_map({2}, {}, {0, -1}), MapError);
  CHECK_THROWS_AS(make_map({2}, {DistSpec::block(), DistSpec::block()}, {0, 1}), MapError);
  CHECK_THROWS_AS(DistSpec::block_cyclic(0), MapError);
  CHECK_THROWS_AS(make_map({0}, {}, {}), MapError);
}

TEST_CASE("rank and coordinate") {
  const Map row({2, 2}, {}, {0, 1, 2, 3});
  const Map col({2, 2}, {}, {0, 1, 2, 3}, {}, Order::col_major);
  CHECK(row.rank_to_coord(1) == GridCoord{0, 1});
  CHECK(col.rank_to_coord(1) == GridCoord{1, 0});
  CHECK_THROWS_AS(row.rank_to_coord(4), MapError);
  CHECK_THROWS_AS(row.coord_to_rank({2, 0}), MapError);

  const Map odd({2, 3}, {}, {9, 4, 7, 1, 0, 5});
  for (int r : odd.procs())
    CHECK(odd.coord_to_rank(odd.rank_to_coord(r)) == r);
}

TEST_CASE("order duality") {
  const std::vector<int> procs{5, 3, 8, 1, 0, 2};
  const Map col({2, 3}, {}, procs, {}, Order::col_major);
  const Map rev({3, 2}, {}, procs, {}, Order::row_major);
  for (int r : procs) {
    auto c = col.rank_to_coord(r);
    std::reverse(c.begin(), c.end());
    CHECK(c == rev.rank_to_coord(r));
  }
}

TEST_CASE("leader and membership") {
  const Map m({3}, {}, {4, 2, 6});
  CHECK(m.leader() == 2);
  CHECK(m.contains(6));
  CHECK_FALSE(m.contains(0));
}

TEST_CASE("local_extent examples") {
  CHECK(owned_sizes(16, DistSpec::block(), 5) == std::vector<Index>{4, 3, 3, 3, 3});
  CHECK(local_extent(16, DistSpec::block(), 5, 1).owned == IntervalList{{4, 7}});
  for (int q = 0; q < 4; ++q)
    CHECK(local_extent(32, DistSpec::block(), 4, q).owned == IntervalList{{8 * q, 8 * q + 8}});

  CHECK(local_extent(7, DistSpec::cyclic(), 3, 0).owned == IntervalList{{0, 1}, {3, 4}, {6, 7}});
  CHECK(local_extent(7, DistSpec::cyclic(), 3, 1).owned == IntervalList{{1, 2}, {4, 5}});
  CHECK(local_extent(7, DistSpec::cyclic(), 3, 2).owned == IntervalList{{2, 3}, {5, 6}});

  const auto e = local_extent(10, DistSpec::block_cyclic(2), 2, 0, 1);
  CHECK(e.owned == IntervalList{{0, 2}, {4, 6}, {8, 10}});
  CHECK(e.ghost == IntervalList{{2, 3}, {6, 7}});
  CHECK(e.local() == IntervalList{{0, 3}, {4, 7}, {8, 10}});

  CHECK(local_extent(2, DistSpec::cyclic(), 4, 3).owned.empty());
  CHECK(local_extent(0, DistSpec::block(), 3, 0).owned.empty());
}

TEST_CASE("block ghost is clipped at the end") {
  CHECK(local_extent(8, DistSpec::block(), 2, 0, 2).ghost == IntervalList{{4, 6}});
  CHECK(local_extent(8, DistSpec::block(), 2, 1, 2).ghost.empty());
}

TEST_CASE("fair-share and partition properties") {
  for (Index n = 0; n <= 64; ++n)
    for (int p = 1; p <= 8; ++p) {
      const auto sizes = owned_sizes(n, DistSpec::block(), p);
      CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
      CHECK(fair_share_sizes(n, p) == sizes);
      CHECK(sizes == oracle::fair_share(n, p));
    }
}

TEST_CASE("every rule agrees with the element oracle") {
  const std::vector<DistSpec> dists{DistSpec::block(), DistSpec::cyclic(), DistSpec::block_cyclic(1),
                                    DistSpec::block_cyclic(2), DistSpec::block_cyclic(3), DistSpec::block_cyclic(5)};
  for (const auto& d : dists)
    for (Index n = 0; n <= 20; ++n)
      for (int p = 1; p <= 6; ++p) {
        IntervalList all;
        for (int q = 0; q < p; ++q)
          for (Index ov = 0; ov <= 3; ++ov) {
            std::vector<Index> own, ghost;
            for (Index i = 0; i < n; ++i) {
              if (oracle::owner(i, n, to_oracle(d), p) == q)
                own.push_back(i);
              else if (oracle::is_ghost(i, n, to_oracle(d), p, q, ov))
                ghost.push_back(i);
            }
            const auto e = local_extent(n, d, p, q, ov);
            INFO(d.to_string(), " n=", n, " p=", p, " q=", q, " ov=", ov);
            CHECK(e.owned == set_to_intervals(own));
            CHECK(e.ghost == set_to_intervals(ghost));
            if (ov == 0)
              all.insert(all.end(), e.owned.begin(), e.owned.end());
          }
        CHECK(total_size(all) == n);
        CHECK(total_size(normalize(all)) == n);
      }
}

TEST_CASE("cyclic is block-cyclic with b = 1") {
  for (Index n = 0; n <= 30; ++n)
    for (int p = 1; p <= 5; ++p)
      for (int q = 0; q < p; ++q)
        for (Index ov = 0; ov < 3; ++ov) {
          const auto a = local_extent(n, DistSpec::cyclic(), p, q, ov);
          const auto b = local_extent(n, DistSpec::block_cyclic(1), p, q, ov);
          CHECK(a.owned == b.owned);
          CHECK(a.ghost == b.ghost);
        }
}

TEST_CASE("interval helpers") {
  CHECK(normalize({{5, 7}, {0, 2}, {2, 3}, {4, 4}}) == IntervalList{{0, 3}, {5, 7}});
  CHECK(intersect({{0, 5}, {8, 10}}, {{3, 9}}) == IntervalList{{3, 5}, {8, 9}});
  CHECK(subtract({{0, 10}}, {{2, 4}, {6, 7}}) == IntervalList{{0, 2}, {4, 6}, {7, 10}});
  CHECK(to_string({{0, 2}, {4, 5}}) == "[0,2)+[4,5)");
  CHECK(to_string({}) == "{}");
}

TEST_CASE("map literal") {
  const Map m = Map::parse("grid=2x2;dist=b,c;procs=0-3;overlap=0,1;order=row");
  CHECK(m.grid() == std::vector<int>{2, 2});
  CHECK(m.dists() == std::vector<DistSpec>{DistSpec::block(), DistSpec::cyclic()});
  CHECK(m.procs() == std::vector<int>{0, 1, 2, 3});
  CHECK(m.overlap() == std::vector<Index>{0, 1});
  CHECK(m.order() == Order::row_major);
  CHECK(Map::parse(m.to_string()) == m);

  const Map n = Map::parse("grid=3;dist=bc2;procs=4,1,7;order=col");
  CHECK(n.dists()[0] == DistSpec::block_cyclic(2));
  CHECK(n.procs() == std::vector<int>{4, 1, 7});
  CHECK(Map::parse(n.to_string()) == n);

  CHECK(Map::parse("grid=1x4").procs() == std::vector<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(Map::parse("dist=b"), MapError);
  CHECK_THROWS_AS(Map::parse("grid=2x;"), MapError);
  CHECK_THROWS_AS(Map::parse("grid=2;dist=q"), MapError);
  CHECK_THROWS_AS(Map::parse("grid=2;colour=red"), MapError);
  CHECK_THROWS_AS(Map::parse("grid=2;order=diagonal"), MapError);
}

TEST_CASE("serial map switch") {
  CHECK(is_serial_map(1));
  CHECK_FALSE(is_serial_map(make_map({1, 4}, {}, {0, 1, 2, 3})));
  CHECK_THROWS_AS(is_serial_map(2), MapError);
  CHECK(is_serial_map(std::optional<Map>{}));
}

}

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

#include <complex>
#include <cstring>
#include <random>

#include <doctest.h>

#include "dgrid/payload.hpp"

using namespace dgrid;

namespace {

void put_u32(std::vector<std::byte>& b, std::size_t at, std::uint32_t v) { std::memcpy(b.data() + at, &v, 4); }

} // namespace

TEST_SUITE("payload") {

TEST_CASE("header layout") {
  const double v[3] = {1, 2, 3};
  const auto bytes = encode(TypedPayload::array<double>(std::span<const double>(v, 3)));
  REQUIRE(bytes.size() == 4 + 2 + 1 + 1 + 1 + 3 + 8 + 24 + 4);
  CHECK(std::memcmp(bytes.data(), "DGRD", 4) == 0);
  CHECK(std::to_integer<int>(bytes[4]) == 1);
  CHECK(std::to_integer<int>(bytes[5]) == 0);
  CHECK(std::to_integer<int>(bytes[6]) == static_cast<int>(PayloadKind::dense_array));
  CHECK(std::to_integer<int>(bytes[7]) == static_cast<int>(ElemType::f64));
  CHECK(std::to_integer<int>(bytes[8]) == 1);
  std::uint64_t dim = 0;
  std::memcpy(&dim, bytes.data() + 12, 8);
  CHECK(dim == 3);
  std::uint32_t crc = 0;
  std::memcpy(&crc, bytes.data() + bytes.size() - 4, 4);
  CHECK(crc == crc32_of(std::span<const std::byte>(bytes.data() + 20, 24)));
}

TEST_CASE("crc32 check value") {
  const char* s = "123456789";
  CHECK(crc32_of(std::as_bytes(std::span<const char>(s, 9))) == 0xCBF43926u);
}

TEST_CASE("every element type round trips") {
  std::mt19937_64 gen(7);
  auto check = [&]<class T>(T sample) {
    std::vector<T> v(6);
    for (auto& x : v)
      x = sample;
    const auto p = TypedPayload::array<T>(std::span<const T>(v), {2, 3});
    const auto q = decode(encode(p));
    CHECK(q == p);
    CHECK(q.template as_vector<T>() == v);
    CHECK(q.shape == std::vector<std::uint64_t>{2, 3});
  };
  check(3.25);
  check(1.5f);
  check(std::int64_t{-9});
  check(std::int32_t{-7});
  check(std::uint64_t{1} << 63);
  check(std::complex<double>(1.0 / 3.0, -2.5e-300));
  check(std::byte{0xab});
}

TEST_CASE("complex values are bit exact") {
  std::vector<std::complex<double>> v{{0.1, 0.2}, {-0.0, 1e308}, {std::numeric_limits<double>::denorm_min(), -3}};
  const auto q = decode(encode(TypedPayload::array<std::complex<double>>(std::span<const std::complex<double>>(v))));
  const auto back = q.as_vector<std::complex<double>>();
  REQUIRE(back.size() == v.size());
  CHECK(std::memcmp(back.data(), v.data(), v.size() * sizeof(v[0])) == 0);
}

TEST_CASE("empty arrays and blobs") {
  const auto e = TypedPayload::empty();
  CHECK(decode(encode(e)) == e);
  const auto z = TypedPayload::array<double>(std::span<const double>(), {0, 5});
  CHECK(decode(encode(z)) == z);
  CHECK(z.element_count() == 0);
}

TEST_CASE("four dimensions allowed, five rejected") {
  std::vector<double> v(16, 1.0);
  CHECK_NOTHROW(TypedPayload::array<double>(std::span<const double>(v), {2, 2, 2, 2}));
  CHECK_THROWS_AS(TypedPayload::array<double>(std::span<const double>(v), {2, 2, 2, 2, 1}), FormatError);
}

TEST_CASE("shape must match byte length") {
  std::vector<double> v(5, 1.0);
  CHECK_THROWS_AS(TypedPayload::array<double>(std::span<const double>(v), {2, 3}), FormatError);
}

TEST_CASE("records nest") {
  const double a[2] = {1, 2};
  auto inner = TypedPayload::record({{"x", TypedPayload::array<double>(std::span<const double>(a, 2))}});
  std::vector<std::byte> blob{std::byte{1}, std::byte{2}};
  auto rec = TypedPayload::record({{"inner", inner}, {"blob", TypedPayload::blob(blob)}, {"", TypedPayload::empty()}});
  const auto back = decode(encode(rec));
  CHECK(back == rec);
  CHECK(back.at("inner").at("x").as_vector<double>() == std::vector<double>{1, 2});
  CHECK_THROWS_AS(back.at("missing"), FormatError);
}

TEST_CASE("corruption is detected") {
  const double v[4] = {1, 2, 3, 4};
  const auto good = encode(TypedPayload::array<double>(std::span<const double>(v, 4)));

  SUBCASE("bad magic") {
    auto b = good;
    b[0] = std::byte{'X'};
    CHECK_THROWS_AS(decode(b), FormatError);
  }
  SUBCASE("bad version") {
    auto b = good;
    b[4] = std::byte{2};
    CHECK_THROWS_AS(decode(b), FormatError);
  }
  SUBCASE("flipped data bit") {
    auto b = good;
    b[24] ^= std::byte{1};
    CHECK_THROWS_AS(decode(b), FormatError);
  }
  SUBCASE("bad crc") {
    auto b = good;
    put_u32(b, b.size() - 4, 0);
    CHECK_THROWS_AS(decode(b), FormatError);
  }
  SUBCASE("truncated") {
    for (std::size_t n = 0; n < good.size(); ++n)
      CHECK_THROWS_AS(decode(std::span<const std::byte>(good.data(), n)), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto b = good;
    b.push_back(std::byte{0});
    CHECK_THROWS_AS(decode(b), FormatError);
  }
  SUBCASE("unknown element type") {
    auto b = good;
    b[7] = std::byte{42};
    CHECK_THROWS_AS(decode(b), FormatError);
  }
}

TEST_CASE("type mismatch on read") {
  const double v[1] = {1};
  const auto p = TypedPayload::array<double>(std::span<const double>(v, 1));
  CHECK_THROWS_AS(p.as_vector<float>(), FormatError);
}

}

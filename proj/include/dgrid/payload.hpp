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

// Self-describing binary payload used for every message file.
//
// Layout (little-endian):
//   "DGRD" | u16 version=1 | u8 kind | u8 elemType | u8 ndim | 3 reserved
//   | ndim x u64 dims | data | u32 CRC32(data)
//
// For key-value records ndim is 0 and the data section is
//   u32 count, then per entry: u16 key length, key bytes, nested payload.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgrid/error.hpp"

namespace dgrid {

enum class PayloadKind : std::uint8_t { dense_array = 0, byte_blob = 1, record = 2 };

enum class ElemType : std::uint8_t { f64 = 0, f32 = 1, i64 = 2, i32 = 3, u64 = 4, c128 = 5, byte = 6 };

std::size_t elem_size(ElemType t);
std::string_view elem_name(ElemType t);

template <class T>
struct elem_traits;
template <>
struct elem_traits<double> {
  static constexpr ElemType type = ElemType::f64;
};
template <>
struct elem_traits<float> {
  static constexpr ElemType type = ElemType::f32;
};
template <>
struct elem_traits<std::int64_t> {
  static constexpr ElemType type = ElemType::i64;
};
template <>
struct elem_traits<std::int32_t> {
  static constexpr ElemType type = ElemType::i32;
};
template <>
struct elem_traits<std::uint64_t> {
  static constexpr ElemType type = ElemType::u64;
};
template <>
struct elem_traits<std::complex<double>> {
  static constexpr ElemType type = ElemType::c128;
};
template <>
struct elem_traits<std::byte> {
  static constexpr ElemType type = ElemType::byte;
};

template <class T>
concept Element = requires { elem_traits<T>::type; };

struct RecordEntry;

/// One message body. `shape` holds at most four extents.
struct TypedPayload {
  static constexpr std::size_t max_dims = 4;

  PayloadKind kind = PayloadKind::byte_blob;
  ElemType elem = ElemType::byte;
  std::vector<std::uint64_t> shape{0};
  std::vector<std::byte> data;
  std::vector<RecordEntry> entries;

  static TypedPayload blob(std::span<const std::byte> bytes);
  static TypedPayload empty() { return blob({}); }

  template <Element T>
  static TypedPayload array(std::span<const T> values, std::vector<std::uint64_t> shape);

  template <Element T>
  static TypedPayload array(std::span<const T> values) {
    return array(values, {static_cast<std::uint64_t>(values.size())});
  }

  static TypedPayload record(std::vector<RecordEntry> entries);

  std::uint64_t element_count() const;

  /// Copy the data section out as typed elements; throws FormatError on type mismatch.
  template <Element T>
  std::vector<T> as_vector() const;

  /// Value of a record entry; throws FormatError if absent.
  const TypedPayload& at(std::string_view key) const;

  /// Checks the product(shape) x sizeof(elem) == data.size() invariant.
  void validate() const;

  friend bool operator==(const TypedPayload& a, const TypedPayload& b);
};

struct RecordEntry {
  std::string key;
  TypedPayload value;
  friend bool operator==(const RecordEntry&, const RecordEntry&) = default;
};

std::vector<std::byte> encode(const TypedPayload& p);

/// Decodes a complete buffer; trailing bytes are a format error.
TypedPayload decode(std::span<const std::byte> bytes);

std::uint32_t crc32_of(std::span<const std::byte> bytes);

template <Element T>
TypedPayload TypedPayload::array(std::span<const T> values, std::vector<std::uint64_t> shape) {
  TypedPayload p;
  p.kind = PayloadKind::dense_array;
  p.elem = elem_traits<T>::type;
  p.shape = std::move(shape);
  p.data.resize(values.size_bytes());
  if (!values.empty())
    std::memcpy(p.data.data(), values.data(), values.size_bytes());
  p.validate();
  return p;
}

template <Element T>
std::vector<T> TypedPayload::as_vector() const {
  if (kind == PayloadKind::record)
    throw FormatError("payload is a record, not an array");
  if (elem != elem_traits<T>::type)
    throw FormatError("payload element type is " + std::string(elem_name(elem)) + ", expected " +
                      std::string(elem_name(elem_traits<T>::type)));
  std::vector<T> out(data.size() / sizeof(T));
  if (!out.empty())
    std::memcpy(out.data(), data.data(), out.size() * sizeof(T));
  return out;
}

} // namespace dgrid

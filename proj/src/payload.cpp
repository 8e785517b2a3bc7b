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

#include "dgrid/payload.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <limits>

namespace dgrid {

static_assert(std::endian::native == std::endian::little,
              "element data is written in native order; big-endian hosts need byte swapping");

namespace {

constexpr char kMagic[4] = {'D', 'G', 'R', 'D'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 1 + 1 + 3;

template <class U>
void put_le(std::vector<std::byte>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

class Reader {
public:
  explicit Reader(std::span<const std::byte> b) : buf_(b) {}

  template <class U>
  U get() {
    need(sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }

  std::span<const std::byte> take(std::size_t n) {
    need(n);
    auto s = buf_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::span<const std::byte> since(std::size_t start) const { return buf_.subspan(start, pos_ - start); }
  std::size_t remaining() const { return buf_.size() - pos_; }

private:
  void need(std::size_t n) const {
    if (n > buf_.size() - pos_)
      throw FormatError("truncated payload: need " + std::to_string(n) + " bytes at offset " +
                        std::to_string(pos_) + ", have " + std::to_string(buf_.size() - pos_));
  }

  std::span<const std::byte> buf_;
  std::size_t pos_ = 0;
};

bool valid_elem(std::uint8_t e) { return e <= static_cast<std::uint8_t>(ElemType::byte); }

std::uint64_t checked_product(const std::vector<std::uint64_t>& shape, std::size_t esize) {
  std::uint64_t n = esize;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d)
      throw FormatError("payload shape overflows");
    n *= d;
  }
  return n;
}

void encode_into(const TypedPayload& p, std::vector<std::byte>& out);

std::vector<std::byte> encode_entries(const TypedPayload& p) {
  std::vector<std::byte> body;
  put_le<std::uint32_t>(body, static_cast<std::uint32_t>(p.entries.size()));
  for (const auto& e : p.entries) {
    if (e.key.size() > std::numeric_limits<std::uint16_t>::max())
      throw FormatError("record key longer than 65535 bytes");
    put_le<std::uint16_t>(body, static_cast<std::uint16_t>(e.key.size()));
    const auto* k = reinterpret_cast<const std::byte*>(e.key.data());
    body.insert(body.end(), k, k + e.key.size());
    encode_into(e.value, body);
  }
  return body;
}

void encode_into(const TypedPayload& p, std::vector<std::byte>& out) {
  p.validate();
  const bool is_record = p.kind == PayloadKind::record;
  out.insert(out.end(), reinterpret_cast<const std::byte*>(kMagic),
             reinterpret_cast<const std::byte*>(kMagic) + 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(p.kind));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(is_record ? ElemType::byte : p.elem));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(is_record ? 0 : p.shape.size()));
  out.insert(out.end(), 3, std::byte{0});
  if (is_record) {
    auto body = encode_entries(p);
    out.insert(out.end(), body.begin(), body.end());
    put_le<std::uint32_t>(out, crc32_of(body));
    return;
  }
  for (auto d : p.shape)
    put_le<std::uint64_t>(out, d);
  out.insert(out.end(), p.data.begin(), p.data.end());
  put_le<std::uint32_t>(out, crc32_of(p.data));
}

TypedPayload decode_from(Reader& r, int depth) {
  if (depth > 16)
    throw FormatError("record nesting deeper than 16");
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    throw FormatError("bad magic, not a DGRD payload");
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion)
    throw FormatError("unsupported payload version " + std::to_string(version));
  const auto kind = r.get<std::uint8_t>();
  const auto elem = r.get<std::uint8_t>();
  const auto ndim = r.get<std::uint8_t>();
  r.take(3);
  if (kind > static_cast<std::uint8_t>(PayloadKind::record))
    throw FormatError("unknown payload kind " + std::to_string(kind));
  if (!valid_elem(elem))
    throw FormatError("unknown element type " + std::to_string(elem));
  if (ndim > TypedPayload::max_dims)
    throw FormatError("payload has " + std::to_string(ndim) + " dims, max 4");

  TypedPayload p;
  p.kind = static_cast<PayloadKind>(kind);
  p.elem = static_cast<ElemType>(elem);

  if (p.kind == PayloadKind::record) {
    if (ndim != 0)
      throw FormatError("record payload must have ndim 0");
    p.shape.clear();
    const std::size_t body_start = r.pos();
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto klen = r.get<std::uint16_t>();
      auto kb = r.take(klen);
      RecordEntry e;
      e.key.assign(reinterpret_cast<const char*>(kb.data()), kb.size());
      e.value = decode_from(r, depth + 1);
      p.entries.push_back(std::move(e));
    }
    const auto body_crc = crc32_of(r.since(body_start));
    if (r.get<std::uint32_t>() != body_crc)
      throw FormatError("record CRC mismatch");
    return p;
  }

  p.shape.resize(ndim);
  for (auto& d : p.shape)
    d = r.get<std::uint64_t>();
  const auto nbytes = checked_product(p.shape, elem_size(p.elem));
  if (nbytes > r.remaining())
    throw FormatError("payload claims " + std::to_string(nbytes) + " data bytes, only " +
                      std::to_string(r.remaining()) + " present");
  auto d = r.take(static_cast<std::size_t>(nbytes));
  p.data.assign(d.begin(), d.end());
  const auto stored = r.get<std::uint32_t>();
  if (stored != crc32_of(p.data))
    throw FormatError("payload CRC mismatch");
  return p;
}

} // namespace

std::size_t elem_size(ElemType t) {
  switch (t) {
  case ElemType::f64: return 8;
  case ElemType::f32: return 4;
  case ElemType::i64: return 8;
  case ElemType::i32: return 4;
  case ElemType::u64: return 8;
  case ElemType::c128: return 16;
  case ElemType::byte: return 1;
  }
  throw FormatError("unknown element type");
}

std::string_view elem_name(ElemType t) {
  switch (t) {
  case ElemType::f64: return "f64";
  case ElemType::f32: return "f32";
  case ElemType::i64: return "i64";
  case ElemType::i32: return "i32";
  case ElemType::u64: return "u64";
  case ElemType::c128: return "complex-f64";
  case ElemType::byte: return "byte";
  }
  return "?";
}

std::uint32_t crc32_of(std::span<const std::byte> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = ::crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

TypedPayload TypedPayload::blob(std::span<const std::byte> bytes) {
  TypedPayload p;
  p.kind = PayloadKind::byte_blob;
  p.elem = ElemType::byte;
  p.shape = {bytes.size()};
  p.data.assign(bytes.begin(), bytes.end());
  return p;
}

TypedPayload TypedPayload::record(std::vector<RecordEntry> entries) {
  TypedPayload p;
  p.kind = PayloadKind::record;
  p.elem = ElemType::byte;
  p.shape.clear();
  p.entries = std::move(entries);
  return p;
}

std::uint64_t TypedPayload::element_count() const {
  std::uint64_t n = 1;
  for (auto d : shape)
    n *= d;
  return n;
}

const TypedPayload& TypedPayload::at(std::string_view key) const {
  for (const auto& e : entries)
    if (e.key == key)
      return e.value;
  throw FormatError("record has no entry '" + std::string(key) + "'");
}

void TypedPayload::validate() const {
  if (kind == PayloadKind::record) {
    if (!data.empty())
      throw FormatError("record payload must not carry a data section");
    return;
  }
  if (shape.size() > max_dims)
    throw FormatError("payload has " + std::to_string(shape.size()) + " dims, max 4");
  if (kind == PayloadKind::byte_blob && elem != ElemType::byte)
    throw FormatError("byte blob must have element type byte");
  if (checked_product(shape, elem_size(elem)) != data.size())
    throw FormatError("payload shape does not match data length " + std::to_string(data.size()));
}

bool operator==(const TypedPayload& a, const TypedPayload& b) {
  return a.kind == b.kind && a.elem == b.elem && a.shape == b.shape && a.data == b.data &&
         a.entries == b.entries;
}

std::vector<std::byte> encode(const TypedPayload& p) {
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + 8 * p.shape.size() + p.data.size() + 4);
  encode_into(p, out);
  return out;
}

TypedPayload decode(std::span<const std::byte> bytes) {
  Reader r(bytes);
  auto p = decode_from(r, 0);
  if (r.remaining() != 0)
    throw FormatError(std::to_string(r.remaining()) + " trailing bytes after payload");
  return p;
}

} // namespace dgrid

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

// Plain dense row-major array of up to four dimensions. This is what the
// array factories return when distribution is turned off, and what local()
// and agg() hand back.

#include <algorithm>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dgrid/error.hpp"
#include "dgrid/map.hpp"

namespace dgrid {

using Shape = std::vector<Index>;

inline Index shape_count(const Shape& shape) {
  Index n = 1;
  for (auto e : shape)
    n *= e;
  return n;
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t d = 0; d < shape.size(); ++d)
    s += (d ? "," : "") + std::to_string(shape[d]);
  return s + ")";
}

inline void check_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > Map::max_dims)
    throw ShapeError("arrays have 1 to 4 dimensions, got " + std::to_string(shape.size()));
  for (auto e : shape)
    if (e < 0)
      throw ShapeError("negative extent in shape " + shape_string(shape));
}

template <class T>
class Array {
public:
  using value_type = T;

  Array() : shape_{0} {}

  explicit Array(Shape shape, const T& fill = T{}) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(static_cast<std::size_t>(shape_count(shape_)), fill);
  }

  Array(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (static_cast<Index>(data_.size()) != shape_count(shape_))
      throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                       shape_string(shape_));
  }

  const Shape& shape() const { return shape_; }
  std::size_t ndims() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& vector() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t flat_index(std::span<const Index> idx) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < shape_.size(); ++d)
      flat = flat * static_cast<std::size_t>(shape_[d]) + static_cast<std::size_t>(idx[d]);
    return flat;
  }

  T& at(std::span<const Index> idx) { return data_[flat_index(idx)]; }
  const T& at(std::span<const Index> idx) const { return data_[flat_index(idx)]; }
  T& at(std::initializer_list<Index> idx) { return at(std::span<const Index>(idx.begin(), idx.size())); }
  const T& at(std::initializer_list<Index> idx) const {
    return at(std::span<const Index>(idx.begin(), idx.size()));
  }

  friend bool operator==(const Array&, const Array&) = default;

private:
  Shape shape_;
  std::vector<T> data_;
};

/// Calls fn(multi-index, flat offset) for every element in row-major order.
inline void for_each_element(const Shape& shape,
                             const std::function<void(std::span<const Index>, std::size_t)>& fn) {
  const Index total = shape_count(shape);
  std::vector<Index> idx(shape.size(), 0);
  for (Index flat = 0; flat < total; ++flat) {
    fn(idx, static_cast<std::size_t>(flat));
    for (std::size_t d = shape.size(); d-- > 0;) {
      if (++idx[d] < shape[d])
        break;
      idx[d] = 0;
    }
  }
}

namespace detail {

template <class T, class Op>
Array<T> zip(const Array<T>& a, const Array<T>& b, Op op) {
  if (a.shape() != b.shape())
    throw ShapeError("shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  Array<T> out(a.shape());
  std::transform(a.data().begin(), a.data().end(), b.data().begin(), out.data().begin(), op);
  return out;
}

template <class T, class Op>
Array<T> map_values(const Array<T>& a, Op op) {
  Array<T> out(a.shape());
  std::transform(a.data().begin(), a.data().end(), out.data().begin(), op);
  return out;
}

} // namespace detail

template <class T>
Array<T> operator+(const Array<T>& a, const Array<T>& b) { return detail::zip(a, b, std::plus<>()); }
template <class T>
Array<T> operator-(const Array<T>& a, const Array<T>& b) { return detail::zip(a, b, std::minus<>()); }
template <class T>
Array<T> operator*(const Array<T>& a, const Array<T>& b) { return detail::zip(a, b, std::multiplies<>()); }
template <class T>
Array<T> operator/(const Array<T>& a, const Array<T>& b) { return detail::zip(a, b, std::divides<>()); }

template <class T>
Array<T> operator+(const Array<T>& a, const std::type_identity_t<T>& s) { return detail::map_values(a, [&](const T& x) { return x + s; }); }
template <class T>
Array<T> operator+(const std::type_identity_t<T>& s, const Array<T>& a) { return detail::map_values(a, [&](const T& x) { return s + x; }); }
template <class T>
Array<T> operator-(const Array<T>& a, const std::type_identity_t<T>& s) { return detail::map_values(a, [&](const T& x) { return x - s; }); }
template <class T>
Array<T> operator*(const Array<T>& a, const std::type_identity_t<T>& s) { return detail::map_values(a, [&](const T& x) { return x * s; }); }
template <class T>
Array<T> operator*(const std::type_identity_t<T>& s, const Array<T>& a) { return detail::map_values(a, [&](const T& x) { return s * x; }); }
template <class T>
Array<T> operator/(const Array<T>& a, const std::type_identity_t<T>& s) { return detail::map_values(a, [&](const T& x) { return x / s; }); }

} // namespace dgrid

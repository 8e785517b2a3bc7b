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

#include "dgrid/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace dgrid {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::span<cplx> x, bool inverse) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n))
    throw std::invalid_argument("FFT length " + std::to_string(n) + " is not a power of two");
  if (n == 1)
    return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1)
      j ^= bit;
    j ^= bit;
    if (i < j)
      std::swap(x[i], x[j]);
  }

  // Roots taken directly from cos/sin; no recurrence drift.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> roots(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    roots[k] = {std::cos(angle), std::sin(angle)};
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len)
      for (std::size_t k = 0; k < half; ++k) {
        const cplx t = roots[k * step] * x[start + k + half];
        const cplx u = x[start + k];
        x[start + k] = u + t;
        x[start + k + half] = u - t;
      }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : x)
      v *= scale;
  }
}

std::vector<cplx> local_fft(std::span<const cplx> x, bool inverse) {
  std::vector<cplx> out(x.begin(), x.end());
  fft_inplace(out, inverse);
  return out;
}

} // namespace dgrid

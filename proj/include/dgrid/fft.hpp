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

#include <complex>
#include <span>
#include <vector>

namespace dgrid {

using cplx = std::complex<double>;

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 FFT with the e^{-2 pi i / N} convention.
/// The inverse conjugates the kernel and scales by 1/N. Throws
/// std::invalid_argument for lengths that are not powers of two.
void fft_inplace(std::span<cplx> x, bool inverse = false);

std::vector<cplx> local_fft(std::span<const cplx> x, bool inverse = false);

} // namespace dgrid

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

// Desk-scale HPC Challenge kernels written against the distributed array
// API: STREAM triad, 1-D FFT by corner turn, RandomAccess, plus a ping-pong
// harness for the messaging layer. Every kernel checks its result against an
// independent serial computation before setting `correct`.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "dgrid/darray.hpp"
#include "dgrid/fft.hpp"
#include "dgrid/fsmpi.hpp"

namespace dgrid {

struct BenchResult {
  std::string kernel;
  int np = 1;
  std::int64_t size = 0;
  double seconds = 0.0;
  double metric = 0.0; // bytes/s (stream, pingpong), Gflop/s (fft), updates/s (ra)
  bool correct = false;
};

std::string csv_header();
std::string to_csv_row(const BenchResult& r);

// ---- STREAM triad ----------------------------------------------------------

struct StreamOptions {
  Index n = 32;
  double scalar = 3.14;
  int iters = 10;
};

/// Deterministic inputs shared by the parallel kernel and its oracle.
double stream_b(Index i);
double stream_c(Index i);

/// A[:] = B + s*C. Works for plain and distributed arrays alike.
template <class A>
void triad(A& a, const A& b, const A& c, double s) {
  assign_redistribute(a, b + s * c);
}

struct StreamOutcome {
  BenchResult result;
  Array<double> a; // whole array on the leader (or serial run)
};

/// 1 x Np block map over the whole communicator. metric = 3*8*N*iters / seconds.
StreamOutcome stream_triad(Comm& comm, const StreamOptions& opt);
/// Same kernel with distribution turned off.
StreamOutcome stream_triad_serial(const StreamOptions& opt);

// ---- FFT -------------------------------------------------------------------

struct FftOptions {
  Index rows = 4; // P
  Index cols = 4; // Q
  bool twiddle = true;
};

/// Deterministic input vector element.
cplx fft_input(Index k);

/// W[p][q] = exp(-2 pi i p q / (P Q)).
cplx twiddle(Index p, Index q, Index rows, Index cols);

struct FftOutcome {
  BenchResult result;
  std::vector<cplx> spectrum; // natural order; leader or serial run only
  RedistStats corner_turn;
  std::uint64_t corner_turn_sends = 0; // fsmpi sends issued by this rank during the turn
};

/// Four-step FFT of length n = P*Q: input element k = p + P*q sits at X[p][q]
/// on an Np x 1 grid; rows are transformed locally, multiplied by the
/// twiddles, corner-turned onto a 1 x Np grid and the columns transformed.
/// The output Z[k1][k2] holds y[k1*Q + k2], so the row-major flattening of Z
/// is the spectrum. metric = 5 n log2(n) 1e-9 / seconds.
FftOutcome parallel_fft_1d(Comm& comm, const FftOptions& opt);
FftOutcome parallel_fft_1d_serial(const FftOptions& opt);

/// Relative L2 error ||a - b|| / ||b||.
double relative_error(std::span<const cplx> a, std::span<const cplx> b);

inline constexpr double kFftTolerance = 1e-6;

// ---- RandomAccess ----------------------------------------------------------

struct RandomAccessOptions {
  int table_bits = 8;
  std::uint64_t updates = 1024;
  std::size_t batch = 1024;
  std::uint64_t seed = 1;
};

std::uint64_t xorshift64(std::uint64_t x);

/// r_0 = xorshift64(seed), r_{i+1} = xorshift64(r_i).
std::uint64_t stream_value(std::uint64_t seed, std::uint64_t i);

/// T[i] = i, then T[r & (2^m - 1)] ^= r for every r in the stream.
std::vector<std::uint64_t> random_access_replay(const RandomAccessOptions& opt);

struct RandomAccessOutcome {
  BenchResult result;
  std::vector<std::uint64_t> table; // leader or serial run only
  std::uint64_t messages = 0;       // update batches sent by this rank, tokens included
};

RandomAccessOutcome random_access(Comm& comm, const RandomAccessOptions& opt);

// ---- ping-pong -------------------------------------------------------------

struct PingPongOptions {
  std::size_t min_bytes = 8;
  std::size_t max_bytes = 1 << 20;
  int trials = 7;
};

/// Rank 0 sends, rank 1 echoes. One result per size (8 B doubling to
/// max_bytes); seconds = median round trip / 2, metric = size / seconds.
/// Results are returned on rank 0; rank 1 returns an empty list.
std::vector<BenchResult> pingpong(Comm& comm, const PingPongOptions& opt);

} // namespace dgrid

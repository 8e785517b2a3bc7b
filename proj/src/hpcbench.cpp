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

#include "dgrid/hpcbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dgrid {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> all_ranks(const Comm& comm) {
  std::vector<int> procs(static_cast<std::size_t>(comm.size()));
  std::iota(procs.begin(), procs.end(), 0);
  return procs;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Reduce { sum, max, all };

/// Combines one double per rank on rank 0 and broadcasts the result.
double reduce(Comm& comm, double value, Reduce op) {
  const Tag tag = comm.collective_tag(Collective::user);
  double acc = value;
  if (comm.rank() == 0) {
    for (int r = 1; r < comm.size(); ++r) {
      const double v = comm.recv(r, tag).as_vector<double>().at(0);
      switch (op) {
      case Reduce::sum: acc += v; break;
      case Reduce::max: acc = std::max(acc, v); break;
      case Reduce::all: acc = (acc != 0.0 && v != 0.0) ? 1.0 : 0.0; break;
      }
    }
  } else {
    comm.send(0, tag, TypedPayload::array<double>(std::span<const double>(&value, 1)));
  }
  std::optional<TypedPayload> p;
  if (comm.rank() == 0)
    p = TypedPayload::array<double>(std::span<const double>(&acc, 1));
  return comm.bcast(0, std::move(p)).as_vector<double>().at(0);
}

template <class T>
std::span<T> span_of(DArray<T>& a) { return a.local_data(); }
template <class T>
std::span<T> span_of(Array<T>& a) { return a.data(); }

template <class T>
IntervalList owned_of(const DArray<T>& a, std::size_t d) { return a.owned(d); }
template <class T>
IntervalList owned_of(const Array<T>& a, std::size_t d) {
  return a.shape()[d] > 0 ? IntervalList{{0, a.shape()[d]}} : IntervalList{};
}

/// Row FFTs, twiddles, corner turn X -> Z, column FFTs.
template <class Arr>
RedistStats four_step(Arr& x, Arr& z, const FftOptions& opt) {
  const Index rows = opt.rows, cols = opt.cols;
  auto xs = span_of(x);
  const std::size_t qcols = static_cast<std::size_t>(cols);
  std::size_t r = 0;
  for (const auto& iv : owned_of(x, 0))
    for (Index p = iv.lo; p < iv.hi; ++p, ++r) {
      auto row = xs.subspan(r * qcols, qcols);
      fft_inplace(row);
      if (opt.twiddle)
        for (Index q = 0; q < cols; ++q)
          row[static_cast<std::size_t>(q)] *= twiddle(p, q, rows, cols);
    }

  const RedistStats turn = assign_redistribute(z, x);

  auto zs = span_of(z);
  const std::size_t prow = static_cast<std::size_t>(rows);
  const std::size_t local_cols = prow == 0 ? 0 : zs.size() / prow;
  std::vector<cplx> column(prow);
  for (std::size_t c = 0; c < local_cols; ++c) {
    for (std::size_t p = 0; p < prow; ++p)
      column[p] = zs[p * local_cols + c];
    fft_inplace(column);
    for (std::size_t p = 0; p < prow; ++p)
      zs[p * local_cols + c] = column[p];
  }
  return turn;
}

void check_fft_options(const FftOptions& opt) {
  if (opt.rows < 1 || opt.cols < 1 || !is_power_of_two(static_cast<std::size_t>(opt.rows)) ||
      !is_power_of_two(static_cast<std::size_t>(opt.cols)))
    throw std::invalid_argument("FFT factors P=" + std::to_string(opt.rows) + ", Q=" +
                                std::to_string(opt.cols) + " must be powers of two");
}

double fft_gflops(Index n, double seconds) {
  if (seconds <= 0.0 || n < 2)
    return 0.0;
  return 5.0 * static_cast<double>(n) * std::log2(static_cast<double>(n)) * 1e-9 / seconds;
}

bool check_spectrum(const std::vector<cplx>& spectrum, Index n) {
  std::vector<cplx> input(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k)
    input[static_cast<std::size_t>(k)] = fft_input(k);
  const auto reference = local_fft(input);
  return relative_error(spectrum, reference) <= kFftTolerance;
}

} // namespace

std::string csv_header() { return "kernel,np,size,seconds,metric,correct"; }

std::string to_csv_row(const BenchResult& r) {
  std::ostringstream os;
  os.precision(9);
  os << r.kernel << ',' << r.np << ',' << r.size << ',' << r.seconds << ',' << r.metric << ','
     << (r.correct ? 1 : 0);
  return os.str();
}

// ---- STREAM ----------------------------------------------------------------

double stream_b(Index i) { return detail::unit_double(mix(static_cast<std::uint64_t>(i) * 2 + 1)); }
double stream_c(Index i) { return detail::unit_double(mix(static_cast<std::uint64_t>(i) * 2 + 2)); }

StreamOutcome stream_triad(Comm& comm, const StreamOptions& opt) {
  const int np = comm.size();
  if (opt.n < np)
    throw ShapeError("STREAM length " + std::to_string(opt.n) + " is smaller than Np=" + std::to_string(np));
  const Map map({1, np}, {}, all_ranks(comm));
  const Shape shape{1, opt.n};
  auto a = zeros<double>(shape, map, comm);
  const auto b = generate<double>(shape, map, comm, [](std::span<const Index> g) { return stream_b(g[1]); });
  const auto c = generate<double>(shape, map, comm, [](std::span<const Index> g) { return stream_c(g[1]); });

  synch(comm);
  const auto t0 = Clock::now();
  for (int it = 0; it < opt.iters; ++it)
    triad(a, b, c, opt.scalar);
  const double mine = seconds_since(t0);

  // Aggregate bandwidth is the sum of each rank's own bandwidth.
  const double bytes = 3.0 * 8.0 * static_cast<double>(a.local_data().size()) * opt.iters;
  const double bandwidth = reduce(comm, mine > 0 ? bytes / mine : 0.0, Reduce::sum);
  const double seconds = reduce(comm, mine, Reduce::max);

  StreamOutcome out;
  out.a = agg(a);
  double ok = 1.0;
  if (comm.rank() == map.leader()) {
    for (Index i = 0; i < opt.n; ++i)
      if (out.a[static_cast<std::size_t>(i)] != stream_b(i) + opt.scalar * stream_c(i)) {
        ok = 0.0;
        break;
      }
  }
  ok = reduce(comm, ok, Reduce::all);
  out.result = {"stream", np, opt.n, seconds, bandwidth, ok != 0.0};
  return out;
}

StreamOutcome stream_triad_serial(const StreamOptions& opt) {
  const Shape shape{1, opt.n};
  auto a = zeros<double>(shape, 1);
  const auto b = generate<double>(shape, 1, [](std::span<const Index> g) { return stream_b(g[1]); });
  const auto c = generate<double>(shape, 1, [](std::span<const Index> g) { return stream_c(g[1]); });
  const auto t0 = Clock::now();
  for (int it = 0; it < opt.iters; ++it)
    triad(a, b, c, opt.scalar);
  const double seconds = seconds_since(t0);
  StreamOutcome out;
  out.a = agg(a);
  bool ok = true;
  for (Index i = 0; i < opt.n && ok; ++i)
    ok = out.a[static_cast<std::size_t>(i)] == stream_b(i) + opt.scalar * stream_c(i);
  const double bytes = 3.0 * 8.0 * static_cast<double>(opt.n) * opt.iters;
  out.result = {"stream", 1, opt.n, seconds, seconds > 0 ? bytes / seconds : 0.0, ok};
  return out;
}

// ---- FFT -------------------------------------------------------------------

cplx fft_input(Index k) {
  const auto h = mix(static_cast<std::uint64_t>(k) + 0x5eed);
  return {detail::unit_double(h) - 0.5, detail::unit_double(mix(h)) - 0.5};
}

cplx twiddle(Index p, Index q, Index rows, Index cols) {
  const Index n = rows * cols;
  // Reduce the exponent first so the angle stays small and exact.
  const Index e = (p * q) % n;
  const double angle = -2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

double relative_error(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size())
    return std::numeric_limits<double>::infinity();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  if (den == 0.0)
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

FftOutcome parallel_fft_1d(Comm& comm, const FftOptions& opt) {
  check_fft_options(opt);
  const int np = comm.size();
  const Index n = opt.rows * opt.cols;
  const Map xmap({np, 1}, {}, all_ranks(comm));
  const Map zmap({1, np}, {}, all_ranks(comm));
  const Shape shape{opt.rows, opt.cols};
  auto x = generate<cplx>(shape, xmap, comm,
                          [&](std::span<const Index> g) { return fft_input(g[0] + opt.rows * g[1]); });
  auto z = zeros<cplx>(shape, zmap, comm);

  synch(comm);
  const auto sends_before = comm.counters().sends;
  const auto t0 = Clock::now();
  FftOutcome out;
  out.corner_turn = four_step(x, z, opt);
  const double mine = seconds_since(t0);
  out.corner_turn_sends = comm.counters().sends - sends_before;
  const double seconds = reduce(comm, mine, Reduce::max);

  const auto full = agg(z);
  double ok = 1.0;
  if (comm.rank() == zmap.leader()) {
    out.spectrum.assign(full.data().begin(), full.data().end());
    ok = check_spectrum(out.spectrum, n) ? 1.0 : 0.0;
  }
  ok = reduce(comm, ok, Reduce::all);
  out.result = {"fft", np, n, seconds, fft_gflops(n, seconds), ok != 0.0};
  return out;
}

FftOutcome parallel_fft_1d_serial(const FftOptions& opt) {
  check_fft_options(opt);
  const Index n = opt.rows * opt.cols;
  const Shape shape{opt.rows, opt.cols};
  auto x = generate<cplx>(shape, 1, [&](std::span<const Index> g) { return fft_input(g[0] + opt.rows * g[1]); });
  auto z = zeros<cplx>(shape, 1);
  const auto t0 = Clock::now();
  FftOutcome out;
  out.corner_turn = four_step(x, z, opt);
  const double seconds = seconds_since(t0);
  const auto full = agg(z);
  out.spectrum.assign(full.data().begin(), full.data().end());
  out.result = {"fft", 1, n, seconds, fft_gflops(n, seconds), check_spectrum(out.spectrum, n)};
  return out;
}

// ---- RandomAccess ----------------------------------------------------------

std::uint64_t xorshift64(std::uint64_t x) {
  x ^= x << 13;
  x ^= x >> 7;
  x ^= x << 17;
  return x;
}

std::uint64_t stream_value(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t r = seed == 0 ? 0x9e3779b97f4a7c15ULL : seed;
  for (std::uint64_t k = 0; k <= i; ++k)
    r = xorshift64(r);
  return r;
}

std::vector<std::uint64_t> random_access_replay(const RandomAccessOptions& opt) {
  const std::uint64_t size = std::uint64_t{1} << opt.table_bits;
  std::vector<std::uint64_t> table(size);
  std::iota(table.begin(), table.end(), std::uint64_t{0});
  std::uint64_t r = opt.seed == 0 ? 0x9e3779b97f4a7c15ULL : opt.seed;
  for (std::uint64_t i = 0; i < opt.updates; ++i) {
    r = xorshift64(r);
    table[r & (size - 1)] ^= r;
  }
  return table;
}

RandomAccessOutcome random_access(Comm& comm, const RandomAccessOptions& opt) {
  if (opt.table_bits < 0 || opt.table_bits > 40)
    throw std::invalid_argument("table bits must be in [0, 40]");
  if (opt.batch < 1)
    throw std::invalid_argument("batch size must be >= 1");
  const int np = comm.size();
  const int me = comm.rank();
  const Index size = Index{1} << opt.table_bits;
  const std::uint64_t mask = static_cast<std::uint64_t>(size) - 1;
  const Map map({np}, {}, all_ranks(comm));
  auto table = generate<std::uint64_t>({size}, map, comm,
                                       [](std::span<const Index> g) { return static_cast<std::uint64_t>(g[0]); });
  const auto owned = table.owned(0);
  const Index lo = owned.empty() ? 0 : owned.front().lo;
  const Index hi = owned.empty() ? 0 : owned.front().hi;
  auto local = table.local_data();

  const auto sizes = fair_share_sizes(size, np);
  std::vector<Index> starts(static_cast<std::size_t>(np) + 1, 0);
  for (int r = 0; r < np; ++r)
    starts[static_cast<std::size_t>(r) + 1] = starts[static_cast<std::size_t>(r)] + sizes[static_cast<std::size_t>(r)];
  auto owner = [&](Index g) {
    return static_cast<int>(std::upper_bound(starts.begin(), starts.end(), g) - starts.begin() - 1);
  };

  // This rank's slice of the update stream.
  const auto slice = local_extent(static_cast<Index>(opt.updates), DistSpec::block(), np, me).owned;
  const std::uint64_t first = slice.empty() ? 0 : static_cast<std::uint64_t>(slice.front().lo);
  const std::uint64_t count = slice.empty() ? 0 : static_cast<std::uint64_t>(slice.front().size());

  // Message layout: [final flag, messages sent on this pair including this one, updates...]
  const Tag base = comm.collective_tag(Collective::random_access);
  constexpr std::uint64_t kMaxPerPair = std::uint64_t{1} << 20;
  std::vector<std::vector<std::uint64_t>> outbox(static_cast<std::size_t>(np));
  std::vector<std::uint64_t> sent(static_cast<std::size_t>(np), 0);
  std::vector<std::vector<bool>> seen(static_cast<std::size_t>(np));
  std::vector<std::uint64_t> expected(static_cast<std::size_t>(np), 0); // 0 until the final message arrives
  std::vector<std::uint64_t> received(static_cast<std::size_t>(np), 0);
  RandomAccessOutcome out;

  auto apply = [&](std::uint64_t v) { local[static_cast<std::size_t>(static_cast<Index>(v & mask) - lo)] ^= v; };

  auto flush = [&](int dst, bool final) {
    auto& box = outbox[static_cast<std::size_t>(dst)];
    auto& n = sent[static_cast<std::size_t>(dst)];
    if (n + 1 >= kMaxPerPair)
      throw std::runtime_error("RandomAccess: too many batches for one rank pair; raise the batch size");
    box[0] = final ? 1 : 0;
    box[1] = n + 1;
    comm.send(dst, base + n, TypedPayload::array<std::uint64_t>(std::span<const std::uint64_t>(box)));
    ++n;
    ++out.messages;
    box.assign(2, 0);
  };

  auto consume = [&](int src, const TypedPayload& p) {
    const auto v = p.as_vector<std::uint64_t>();
    for (std::size_t i = 2; i < v.size(); ++i)
      apply(v[i]);
    ++received[static_cast<std::size_t>(src)];
    if (v.at(0) == 1)
      expected[static_cast<std::size_t>(src)] = v.at(1);
  };

  auto take = [&](int src, std::uint64_t seq) {
    auto& s = seen[static_cast<std::size_t>(src)];
    if (s.size() <= seq)
      s.resize(seq + 1, false);
    s[seq] = true;
    consume(src, comm.recv(src, base + seq));
  };

  auto drain = [&] {
    for (const auto& id : comm.probe()) {
      if (id.tag < base || id.tag >= base + kMaxPerPair)
        continue;
      const auto seq = id.tag - base;
      auto& s = seen[static_cast<std::size_t>(id.src)];
      if (seq < s.size() && s[seq])
        continue;
      take(id.src, seq);
    }
  };

  for (auto& box : outbox)
    box.assign(2, 0);

  synch(comm);
  const auto t0 = Clock::now();
  std::uint64_t r = stream_value(opt.seed, first == 0 ? 0 : first - 1);
  if (first == 0)
    r = opt.seed == 0 ? 0x9e3779b97f4a7c15ULL : opt.seed;
  for (std::uint64_t i = 0; i < count; ++i) {
    r = xorshift64(r);
    const Index g = static_cast<Index>(r & mask);
    if (g >= lo && g < hi) {
      apply(r);
      continue;
    }
    const int dst = owner(g);
    auto& box = outbox[static_cast<std::size_t>(dst)];
    box.push_back(r);
    if (box.size() - 2 >= opt.batch) {
      flush(dst, false);
      drain();
    }
  }
  for (int dst = 0; dst < np; ++dst)
    if (dst != me)
      flush(dst, true);

  for (int src = 0; src < np; ++src) {
    if (src == me)
      continue;
    const auto s = static_cast<std::size_t>(src);
    for (std::uint64_t seq = 0; expected[s] == 0 || received[s] < expected[s]; ++seq) {
      if (seq < seen[s].size() && seen[s][seq])
        continue;
      take(src, seq);
    }
  }
  const double mine = seconds_since(t0);
  const double seconds = reduce(comm, mine, Reduce::max);

  const auto full = agg(table);
  double ok = 1.0;
  if (me == map.leader()) {
    out.table.assign(full.data().begin(), full.data().end());
    ok = out.table == random_access_replay(opt) ? 1.0 : 0.0;
  }
  ok = reduce(comm, ok, Reduce::all);
  const double rate = seconds > 0 ? static_cast<double>(opt.updates) / seconds : 0.0;
  out.result = {"ra", np, static_cast<std::int64_t>(size), seconds, rate, ok != 0.0};
  return out;
}

// ---- ping-pong -------------------------------------------------------------

std::vector<BenchResult> pingpong(Comm& comm, const PingPongOptions& opt) {
  if (comm.size() != 2)
    throw ProtocolError("ping-pong needs exactly 2 ranks, got " + std::to_string(comm.size()));
  if (opt.trials < 1 || opt.min_bytes < 1 || opt.max_bytes < opt.min_bytes)
    throw std::invalid_argument("bad ping-pong options");

  std::vector<BenchResult> results;
  for (std::size_t bytes = opt.min_bytes; bytes <= opt.max_bytes; bytes *= 2) {
    std::vector<std::byte> message(bytes);
    for (std::size_t i = 0; i < bytes; ++i)
      message[i] = static_cast<std::byte>(mix(i ^ (bytes << 20)) & 0xff);
    const auto payload = TypedPayload::blob(message);

    std::vector<double> round_trips;
    bool intact = true;
    for (int t = 0; t < opt.trials; ++t) {
      const Tag tag = comm.collective_tag(Collective::user);
      if (comm.rank() == 0) {
        const auto t0 = Clock::now();
        comm.send(1, tag, payload);
        const auto echo = comm.recv(1, tag);
        round_trips.push_back(seconds_since(t0));
        intact = intact && echo == payload;
      } else {
        comm.send(0, tag, comm.recv(0, tag));
      }
    }
    if (comm.rank() != 0)
      continue;
    std::sort(round_trips.begin(), round_trips.end());
    const std::size_t m = round_trips.size();
    const double median = m % 2 ? round_trips[m / 2] : 0.5 * (round_trips[m / 2 - 1] + round_trips[m / 2]);
    const double latency = median / 2.0;
    results.push_back({"pingpong", 2, static_cast<std::int64_t>(bytes), latency,
                       latency > 0 ? static_cast<double>(bytes) / latency : 0.0, intact});
  }
  return results;
}

} // namespace dgrid

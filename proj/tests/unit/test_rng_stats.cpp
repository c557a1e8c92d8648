#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "generators.hpp"
#include "qfluct/rng.hpp"
#include "qfluct/stats.hpp"

using namespace qfluct;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("trajectory streams are reproducible and distinct") {
  TrajectoryRng a(42, 7), b(42, 7), other_stream(42, 8), other_seed(43, 7);
  std::set<std::uint64_t> seen;
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_stream |= x != other_stream.next_u64();
    differs_seed |= x != other_seed.next_u64();
    seen.insert(x);
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
  CHECK(seen.size() == 1000);
}

TEST_CASE("uniform draws lie in [0,1) and are evenly spread") {
  TrajectoryRng r(1, 0);
  constexpr int kBins = 20;
  constexpr int kDraws = 200000;
  std::vector<int> counts(kBins, 0);
  RunningStats s;
  for (int i = 0; i < kDraws; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    ++counts[static_cast<int>(u * kBins)];
    s.add(u);
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(kDraws) / kBins;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 43.8);  // 99.9% quantile, 19 degrees of freedom
  CHECK(std::abs(s.mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / kDraws));
}

TEST_CASE("running statistics: merge equals sequential accumulation") {
  gen::for_all(30, 41, [](gen::Source& src, int) {
    const int n = src.integer(2, 300);
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(src.normal() * 3.0 + 1.0);
    RunningStats all;
    for (double x : xs) all.add(x);
    const int cut = src.integer(0, n);
    RunningStats left, right;
    for (int i = 0; i < cut; ++i) left.add(xs[static_cast<std::size_t>(i)]);
    for (int i = cut; i < n; ++i) right.add(xs[static_cast<std::size_t>(i)]);
    left.merge(right);
    CHECK(left.n == all.n);
    CHECK(std::abs(left.mean - all.mean) < 1e-12);
    CHECK(std::abs(left.variance() - all.variance()) < 1e-10 * std::max(1.0, all.variance()));
  });
}

TEST_CASE("standard error equals the leave-one-out jackknife estimate") {
  gen::for_all(20, 42, [](gen::Source& src, int) {
    const int n = src.integer(3, 80);
    std::vector<double> xs;
    RunningStats s;
    for (int i = 0; i < n; ++i) {
      xs.push_back(std::exp(src.normal()));
      s.add(xs.back());
    }
    double total = 0.0;
    for (double x : xs) total += x;
    std::vector<double> loo;
    double loo_mean = 0.0;
    for (double x : xs) {
      loo.push_back((total - x) / (n - 1));
      loo_mean += loo.back() / n;
    }
    double acc = 0.0;
    for (double v : loo) acc += (v - loo_mean) * (v - loo_mean);
    const double jackknife = std::sqrt((n - 1.0) / n * acc);
    CHECK(std::abs(jackknife - s.stderr_mean()) < 1e-12 * std::max(1.0, jackknife));
  });
  RunningStats one;
  one.add(3.0);
  CHECK(one.stderr_mean() == 0.0);
}

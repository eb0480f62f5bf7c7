#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "plasmode/rng.hpp"

using plasmode::RngStream;

TEST_CASE("rng_streams_are_pure_functions_of_their_key") {
  RngStream a(42, "source", 0);
  RngStream b(42, "source", 0);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng_keys_separate_streams") {
  // Different master seed, purpose, or index must give unrelated sequences;
  // compare prefixes, which collide with probability ~2^-192 if independent.
  auto prefix = [](RngStream s) {
    std::vector<std::uint64_t> v;
    for (int i = 0; i < 3; ++i) v.push_back(s.next_u64());
    return v;
  };
  const auto base = prefix(RngStream(42, "source", 0));
  CHECK(prefix(RngStream(43, "source", 0)) != base);
  CHECK(prefix(RngStream(42, "replicate-st", 0)) != base);
  CHECK(prefix(RngStream(42, "source", 1)) != base);
  // Purposes that are prefixes of one another must still separate.
  CHECK(prefix(RngStream(42, "replicate-st", 0)) != prefix(RngStream(42, "replicate-s", 0)));
}

TEST_CASE("rng_uniform_doubles_land_in_unit_interval") {
  RngStream s(7, "test", 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = s.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("rng_uniform_moments_and_autocorrelation") {
  // Mean 1/2 (sd of the mean ~ 0.289/sqrt(n)), variance 1/12, lag-1
  // autocorrelation ~ 0; bounds are ~5 sigma so the test is stable.
  const int n = 200000;
  RngStream s(2024, "test", 1);
  std::vector<double> u(n);
  for (auto& x : u) x = s.next_double();
  long double mean = 0;
  for (double x : u) mean += x;
  mean /= n;
  long double var = 0, lag = 0;
  for (int i = 0; i < n; ++i) {
    var += (u[i] - mean) * (u[i] - mean);
    if (i + 1 < n) lag += (u[i] - mean) * (u[i + 1] - mean);
  }
  var /= n - 1;
  const double rho = static_cast<double>(lag / var / (n - 1));
  CHECK(std::abs(static_cast<double>(mean) - 0.5) < 5 * 0.2887 / std::sqrt(1.0 * n));
  CHECK(std::abs(static_cast<double>(var) - 1.0 / 12) < 0.005);
  CHECK(std::abs(rho) < 5.0 / std::sqrt(1.0 * n));
}

TEST_CASE("rng_normal_moments") {
  const int n = 200000;
  RngStream s(9, "test", 2);
  long double mean = 0, m2 = 0;
  std::vector<double> z(n);
  for (auto& x : z) x = s.next_normal();
  for (double x : z) mean += x;
  mean /= n;
  for (double x : z) m2 += (x - mean) * (x - mean);
  const double var = static_cast<double>(m2 / (n - 1));
  CHECK(std::abs(static_cast<double>(mean)) < 5.0 / std::sqrt(1.0 * n));
  CHECK(std::abs(var - 1.0) < 0.02);
  // Location-scale overload.
  RngStream t(9, "test", 3);
  long double m = 0;
  for (int i = 0; i < 50000; ++i) m += t.next_normal(10.0, 2.0);
  CHECK(std::abs(static_cast<double>(m) / 50000 - 10.0) < 0.05);
}

TEST_CASE("rng_bernoulli_frequency") {
  RngStream s(5, "test", 4);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += s.next_bernoulli(0.3) ? 1 : 0;
  CHECK(std::abs(hits / static_cast<double>(n) - 0.3) < 5 * std::sqrt(0.3 * 0.7 / n));
}

TEST_CASE("rng_next_below_is_in_range_and_covers") {
  RngStream s(11, "test", 5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t v = s.next_below(10);
    CHECK(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
  // n = 1 must always give 0.
  for (int i = 0; i < 8; ++i) CHECK(s.next_below(1) == 0);
}

#include <doctest.h>

#include <cmath>
#include <set>

#include "adams/random.hpp"

using namespace adams;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    // Reference vectors from the Random123 distribution (kat_vectors).
    auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto ones = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto pi = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(pi == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    std::uint64_t x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
}

TEST_CASE("uniform lies in the open unit interval") {
    CounterRng r(1, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("normal moments within 4 SE") {
    CounterRng r(2, 0);
    const int n = 1'000'000;
    double s1 = 0, s2 = 0, s4 = 0, tail = 0;
    for (int i = 0; i < n; ++i) {
        double z = r.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
        tail += std::fabs(z) > 3.0;
    }
    CHECK(std::fabs(s1 / n) < 4.0 / std::sqrt(n));
    CHECK(std::fabs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::fabs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
    const double p3 = 0.0026997960632601866;
    CHECK(std::fabs(tail / n - p3) < 4.0 * std::sqrt(p3 / n));
}

TEST_CASE("below is unbiased over a small range") {
    CounterRng r(3, 0);
    int counts[7] = {};
    const int n = 700000;
    for (int i = 0; i < n; ++i) ++counts[r.below(7)];
    for (int c : counts) CHECK(std::fabs(c - n / 7.0) < 4.0 * std::sqrt(n / 7.0));
}

TEST_CASE("derive_seed separates tags") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 1000; ++t) seen.insert(derive_seed(7, t));
    CHECK(seen.size() == 1000);
}

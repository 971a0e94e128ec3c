#include <doctest.h>

#include <cmath>
#include <set>

#include "smclab/rng.hpp"

using namespace smclab;

TEST_CASE("philox known answers") {
    auto a = CounterRng::philox({0, 0, 0, 0}, {0, 0});
    CHECK(a[0] == 0x6627e8d5u);
    CHECK(a[1] == 0xe169c58du);
    CHECK(a[2] == 0xbc57ac4cu);
    CHECK(a[3] == 0x9b00dbd8u);
    auto b = CounterRng::philox({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(b[0] == 0x408f276du);
    CHECK(b[1] == 0x41c83b0eu);
    CHECK(b[2] == 0xa20bc7c6u);
    CHECK(b[3] == 0x6d5451fdu);
    auto c = CounterRng::philox({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(c[0] == 0xd16cfe09u);
    CHECK(c[1] == 0x94fdccebu);
    CHECK(c[2] == 0x5001e420u);
    CHECK(c[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and distinct") {
    CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        CHECK(x != c());
        CHECK(x != d());
    }
}

TEST_CASE("uniform01 lies in [0,1) with the right mean") {
    CounterRng rng(derive_key(1, {purpose::initial}));
    double s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = uniform01(rng);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        s += u;
    }
    CHECK(std::abs(s / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("derived keys separate purposes, steps and seeds") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t seed : {0ull, 1ull, 2ull})
        for (std::uint64_t p : {purpose::initial, purpose::selection, purpose::mutation})
            for (std::uint64_t step = 0; step < 10; ++step) keys.insert(derive_key(seed, {p, step}));
    CHECK(keys.size() == 90);
    CHECK(derive_key(5, {1, 2}) != derive_key(5, {2, 1}));
}

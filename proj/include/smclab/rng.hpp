#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace smclab {

// Philox4x32-10 counter-based generator. A stream is identified by a 64-bit key
// and a 64-bit stream id; draws walk a 64-bit block counter. Each block yields
// two 64-bit words.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t key, std::uint64_t stream = 0) : key_(key), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    std::uint64_t key() const { return key_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t position() const { return block_ * 2 + (have_spare_ ? 1 : 0); }

    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

private:
    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

// Uniform on [0,1) with 53 random bits.
inline double uniform01(CounterRng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0,1].
inline double uniform01_open_left(CounterRng& rng) {
    return 1.0 - uniform01(rng);
}

std::uint64_t splitmix64(std::uint64_t x);

// Derives a stream key from a master seed and a list of tags
// (purpose, step, replicate, ...).
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

namespace purpose {
inline constexpr std::uint64_t initial = 0x696e6974;
inline constexpr std::uint64_t selection = 0x73656c65;
inline constexpr std::uint64_t mutation = 0x6d757461;
inline constexpr std::uint64_t replicate = 0x7265706c;
inline constexpr std::uint64_t tuples = 0x74757070;
inline constexpr std::uint64_t shared_u = 0x73686172;
inline constexpr std::uint64_t population = 0x706f7075;
inline constexpr std::uint64_t resample = 0x72657361;
}  // namespace purpose

}  // namespace smclab

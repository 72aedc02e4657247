#pragma once

// Philox4x32-10 counter-based generator. A (seed, stream) pair selects an
// independent sequence, so trial i of a run always draws the same numbers
// whatever thread executes it.

#include <array>
#include <cstdint>
#include <limits>

namespace wof {

class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ == 4) {
            const std::uint64_t block = block_++;
            buffer_ = bijection({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                key_);
            used_ = 0;
        }
        return buffer_[used_++];
    }

    /// Ten rounds of the Philox4x32 bijection.
    static Counter bijection(Counter c, Key k) {
        constexpr std::uint64_t m0 = 0xD2511F53;
        constexpr std::uint64_t m1 = 0xCD9E8D57;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = m0 * c[0];
            const std::uint64_t p1 = m1 * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9;
            k[1] += 0xBB67AE85;
        }
        return c;
    }

private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Counter buffer_{};
    int used_ = 4;
};

} // namespace wof

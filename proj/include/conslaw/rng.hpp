#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace conslaw {

// Philox4x32-10 (Salmon et al., SC'11). Key = seed, counter = (block, stream).
class Philox {
public:
    using result_type = std::uint32_t;

    Philox(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            out_ = block(block_++);
            pos_ = 0;
        }
        return out_[pos_++];
    }

    // Stateless access to one 128-bit block.
    std::array<std::uint32_t, 4> block(std::uint64_t index) const noexcept {
        std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(index),
                                       static_cast<std::uint32_t>(index >> 32),
                                       static_cast<std::uint32_t>(stream_),
                                       static_cast<std::uint32_t>(stream_ >> 32)};
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return c;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> out_{};
    int pos_ = 4;
};

// Logical stream families. Each sample path of each experiment gets
// make_stream(family, index) so results do not depend on scheduling.
enum class StreamFamily : std::uint32_t {
    TwoSidedBm = 1,
    Excursion,
    BesselBridge,
    LevyJumps,
    Generator,
    DirectArgmax,
    Refinement,
    Bootstrap,
    Census,
};

constexpr std::uint64_t make_stream(StreamFamily family, std::uint64_t index) noexcept {
    return (static_cast<std::uint64_t>(family) << 48) ^ index;
}

class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

    double normal() { return normal_(engine_); }
    // Uniform on (0,1]; safe under log.
    double uniform() { return 1.0 - std::generate_canonical<double, 53>(engine_); }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    std::uint64_t poisson(double mean) {
        std::poisson_distribution<std::uint64_t> d(mean);
        return d(engine_);
    }
    Philox& engine() { return engine_; }

private:
    Philox engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace conslaw

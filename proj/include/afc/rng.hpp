#pragma once

#include <array>
#include <cstdint>

namespace afc {

/// Philox4x32-10 block cipher (Salmon et al., SC'11). Maps a 128-bit counter
/// and 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based random stream. The output sequence depends only on
/// (master_seed, stream_index), so trajectories can be assigned to threads
/// in any order without changing results. Not safe to share between threads.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_index() const { return index_; }

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal();

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

} // namespace afc

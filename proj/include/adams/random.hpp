#pragma once

#include <array>
#include <cstdint>

namespace adams {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key) noexcept;
};

/// Counter-based stream keyed by (seed, stream). Two streams with distinct ids never share
/// blocks, so per-chain / per-seed streams are reproducible regardless of scheduling.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform in the open interval (0, 1).
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Standard normal (ziggurat).
    double normal() noexcept;
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

    std::uint64_t stream() const noexcept { return stream_; }

private:
    void refill() noexcept;

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

/// Derives an independent seed from (seed, tag); used to split one config seed into
/// separate data / init / noise streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

}  // namespace adams

#include "adams/random.hpp"

#include <cmath>
#include <numbers>
#include <array>

namespace adams {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr double kZigR = 3.442619855899;
constexpr double kZigV = 9.91256303526217e-3;

struct ZigguratTables {
    std::array<double, 129> x{};
    std::array<double, 128> ratio{};
};

// Doornik's layout: x[0] = V / f(R) is the base strip's virtual width, x[1] = R, x[128] = 0.
ZigguratTables make_ziggurat() {
    ZigguratTables t;
    double f = std::exp(-0.5 * kZigR * kZigR);
    t.x[0] = kZigV / f;
    t.x[1] = kZigR;
    t.x[128] = 0.0;
    for (std::size_t i = 2; i < 128; ++i) {
        t.x[i] = std::sqrt(-2.0 * std::log(kZigV / t.x[i - 1] + f));
        f = std::exp(-0.5 * t.x[i] * t.x[i]);
    }
    for (std::size_t i = 0; i < 128; ++i) t.ratio[i] = t.x[i + 1] / t.x[i];
    return t;
}

const ZigguratTables& ziggurat() {
    static const ZigguratTables tables = make_ziggurat();
    return tables;
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

void CounterRng::refill() noexcept {
    Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
                            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    auto out = Philox4x32::block(ctr, key_);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
    ++block_index_;
}

std::uint64_t CounterRng::next_u64() noexcept {
    if (buffered_ == 0) refill();
    return buffer_[2 - buffered_--];
}

double CounterRng::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
    // Ziggurat with 128 layers; one 64-bit draw per sample on the fast path.
    const auto& z = ziggurat();
    for (;;) {
        std::uint64_t bits = next_u64();
        const std::size_t i = bits & 0x7f;
        const double u = static_cast<double>(static_cast<std::int64_t>(bits >> 11) - (std::int64_t{1} << 52)) *
                         0x1.0p-52;  // in [-1, 1)
        if (std::fabs(u) < z.ratio[i]) return u * z.x[i];
        if (i == 0) {
            double x, y;
            do {
                x = std::log(uniform()) / kZigR;
                y = std::log(uniform());
            } while (-2.0 * y < x * x);
            return u < 0.0 ? x - kZigR : kZigR - x;
        }
        const double x = u * z.x[i];
        const double f0 = std::exp(-0.5 * (z.x[i] * z.x[i] - x * x));
        const double f1 = std::exp(-0.5 * (z.x[i + 1] * z.x[i + 1] - x * x));
        if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    }
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift; the bias is < n / 2^64 and irrelevant at the sizes used here.
    const std::uint64_t x = next_u64();
    const std::uint64_t x_lo = x & 0xffffffffULL, x_hi = x >> 32;
    const std::uint64_t n_lo = n & 0xffffffffULL, n_hi = n >> 32;
    const std::uint64_t lo_lo = x_lo * n_lo;
    const std::uint64_t hi_lo = x_hi * n_lo;
    const std::uint64_t lo_hi = x_lo * n_hi;
    const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xffffffffULL) + lo_hi;
    return x_hi * n_hi + (hi_lo >> 32) + (cross >> 32);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(tag + 0x632BE59BD9B4E019ull));
}

}  // namespace adams

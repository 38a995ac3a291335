#pragma once

// Counter-based random streams. Each (base_seed, replicate_index) pair keys an
// independent Philox4x32-10 stream, so replicate generation is a pure function
// of the seed spec and can run on any thread in any order. Normal variates go
// through an inverse-CDF map (rational initial guess + Newton polish on the
// erfc tail equation), fixed at build time so outputs are reproducible.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace heatpath::rng {

struct SeedSpec {
    std::uint64_t base_seed = 0;
    std::uint64_t replicate_index = 0;
};

class Philox {
public:
    explicit Philox(const SeedSpec& seed)
        : key0_(static_cast<std::uint32_t>(seed.base_seed)),
          key1_(static_cast<std::uint32_t>(seed.base_seed >> 32)),
          stream_lo_(static_cast<std::uint32_t>(seed.replicate_index)),
          stream_hi_(static_cast<std::uint32_t>(seed.replicate_index >> 32)) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            block_ = make_block(counter_++);
            pos_ = 0;
        }
        return block_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform double strictly inside (0,1) with 2^-54 granularity.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

private:
    std::array<std::uint32_t, 4> make_block(std::uint64_t n) const {
        std::uint32_t x0 = static_cast<std::uint32_t>(n);
        std::uint32_t x1 = static_cast<std::uint32_t>(n >> 32);
        std::uint32_t x2 = stream_lo_;
        std::uint32_t x3 = stream_hi_;
        std::uint32_t k0 = key0_;
        std::uint32_t k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * x0;
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * x2;
            const std::uint32_t y0 = static_cast<std::uint32_t>(p1 >> 32) ^ x1 ^ k0;
            const std::uint32_t y1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t y2 = static_cast<std::uint32_t>(p0 >> 32) ^ x3 ^ k1;
            const std::uint32_t y3 = static_cast<std::uint32_t>(p0);
            x0 = y0; x1 = y1; x2 = y2; x3 = y3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return {x0, x1, x2, x3};
    }

    std::uint32_t key0_, key1_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
};

namespace detail {

// Rational approximation of the standard normal quantile (Beasley-Springer-
// Moro form); only used to seed the Newton iteration below.
inline double quantile_guess(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.42) {
        const double r = q * q;
        const double num = q * (((-25.44106049637 * r + 41.39119773534) * r -
                                 18.61500062529) * r + 2.50662823884);
        const double den = ((((3.13082909833 * r - 21.06224101826) * r +
                              23.08336743743) * r - 8.47351093090) * r + 1.0);
        return num / den;
    }
    const double pu = p < 0.5 ? p : 1.0 - p;
    const double r = std::sqrt(-2.0 * std::log(pu));
    return (p < 0.5 ? -1.0 : 1.0) * (r - (2.515517 + 0.802853 * r + 0.010328 * r * r) /
                                             (1.0 + 1.432788 * r + 0.189269 * r * r + 0.001308 * r * r * r));
}

} // namespace detail

/// Inverse standard normal CDF for p in (0,1), |error| within a few ulps:
/// solves erfc(z/sqrt(2)) = 2 p_tail by Newton from a rational first guess.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("inverse_normal_cdf: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    const double sign = p < 0.5 ? -1.0 : 1.0;
    const double pu = p < 0.5 ? p : 1.0 - p;   // exact for p in [0.5, 1)
    double z = std::fabs(detail::quantile_guess(pu));
    const double inv_sqrt2 = 0.7071067811865475244;
    const double inv_sqrt2pi = 0.3989422804014326779;
    for (int it = 0; it < 4; ++it) {
        const double tail = 0.5 * std::erfc(z * inv_sqrt2);        // P[N > z]
        const double pdf = inv_sqrt2pi * std::exp(-0.5 * z * z);
        z += (tail - pu) / pdf;
        if (z < 0.0) z = 0.0;
    }
    return sign * z;
}

/// One standard normal draw from the stream.
inline double standard_normal(Philox& gen) {
    return inverse_normal_cdf(gen.next_uniform());
}

} // namespace heatpath::rng

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace nonnormal {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
// pure function of (counter, key), so any entry of any sample can be drawn
// independently of the others.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block ctr, Key key)
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }
};

// Stream (master_seed, sample_index); draw k uses counter (k, sample_index).
struct StreamId {
    std::uint64_t master_seed = 0;
    std::uint64_t sample_index = 0;
};

// Uniform in (0, 1] from the top 53 bits.
inline double uniform53(std::uint64_t bits)
{
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// X + iY with X, Y independent N(0, 1), via Box-Muller on one Philox block.
inline std::complex<double> complex_normal(const StreamId& s, std::uint64_t draw)
{
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32),
                                static_cast<std::uint32_t>(s.sample_index),
                                static_cast<std::uint32_t>(s.sample_index >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(s.master_seed),
                              static_cast<std::uint32_t>(s.master_seed >> 32)};
    const auto r = Philox4x32::generate(ctr, key);
    const double u1 = uniform53((std::uint64_t{r[0]} << 32) | r[1]);
    const double u2 = uniform53((std::uint64_t{r[2]} << 32) | r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

} // namespace nonnormal

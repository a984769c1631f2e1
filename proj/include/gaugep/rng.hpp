#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gaugep {

// Philox4x32-10 (Salmon et al., SC'11). Stateless: output is a pure function
// of (counter, key).
using Philox4x32 = std::array<std::uint32_t, 4>;

inline Philox4x32 philox4x32(Philox4x32 ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Standard normals for one (seed, trajectory, step) triple. Block b of a step
// yields normals 2b and 2b+1 via Box-Muller on two 64-bit uniforms.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t trajectory)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          traj_(trajectory) {}

    void fill(std::uint64_t step, double* out, int count) const {
        const int blocks = (count + 1) / 2;
        for (int b = 0; b < blocks; ++b) {
            Philox4x32 r = philox4x32(
                {static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(step),
                 static_cast<std::uint32_t>(step >> 32) ^ static_cast<std::uint32_t>(traj_ >> 32),
                 static_cast<std::uint32_t>(traj_)},
                key_);
            const double u1 = to_unit_open(r[0], r[1]);
            const double u2 = to_unit_open(r[2], r[3]);
            const double rad = std::sqrt(-2.0 * std::log(u1));
            const double ang = 6.283185307179586476925 * u2;
            out[2 * b] = rad * std::cos(ang);
            if (2 * b + 1 < count) out[2 * b + 1] = rad * std::sin(ang);
        }
    }

private:
    // uniform on (0, 1]
    static double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t v = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
        return (static_cast<double>(v) + 1.0) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t traj_;
};

}  // namespace gaugep

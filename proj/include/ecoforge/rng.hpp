#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ecoforge {

// xoshiro256** seeded through splitmix64. Every draw helper below is written
// out explicitly so traces are bit-identical across standard libraries.
class Rng {
public:
    static constexpr std::uint64_t kStreamStride = 0x9E3779B97F4A7C15ULL;

    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    // Substream k of a run seeded with `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t k) { return Rng(seed + k * kStreamStride); }

    void reseed(std::uint64_t seed)
    {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n); n == 0 yields 0 without consuming a draw.
    std::uint64_t uniform_int(std::uint64_t n)
    {
        if (n == 0)
            return 0;
        // Lemire's multiply-shift with rejection
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Knuth's product method below mean 30, rounded normal approximation above.
    std::uint64_t poisson(double mean)
    {
        if (!(mean > 0))
            return 0;
        if (mean < 30) {
            const double limit = std::exp(-mean);
            std::uint64_t k = 0;
            double p = uniform();
            while (p > limit) {
                ++k;
                p *= uniform();
            }
            return k;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0)
            u1 = 0x1.0p-53;
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        double v = std::round(mean + std::sqrt(mean) * z);
        return v <= 0 ? 0 : static_cast<std::uint64_t>(v);
    }

    const std::array<std::uint64_t, 4>& state() const { return s_; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
};

} // namespace ecoforge

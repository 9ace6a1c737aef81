#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace zsplit {

/// Seeded random source with hand-rolled draws. std::mt19937_64's output
/// stream is pinned by the standard, but the standard distributions are
/// not, so bounded draws and shuffles are implemented here to keep results
/// identical across compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n). Rejection sampling, unbiased. n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Fisher-Yates; the standard does not pin std::shuffle's order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    /// Derive an independent sub-stream seed (splitmix64 finalizer over
    /// seed and stream index).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace zsplit

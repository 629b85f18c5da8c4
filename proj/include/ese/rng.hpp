#ifndef ESE_RNG_HPP
#define ESE_RNG_HPP

#include <cstdint>
#include <vector>

namespace ese {

// SplitMix64 generator. Self-contained so that seeded runs produce identical
// streams on every platform; the standard <random> distributions do not
// guarantee that.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform in [lo, hi], inclusive.
    int range(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from [0, n), in random order. k must be <= n.
    std::vector<int> sample_distinct(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        shuffle(pool);
        pool.resize(static_cast<std::size_t>(k));
        return pool;
    }

    // Derive an independent stream (for per-document / per-worker seeding).
    Rng fork(std::uint64_t salt) {
        std::uint64_t s = next();
        return Rng(s ^ (salt * 0xD1B54A32D192ED03ULL));
    }

private:
    std::uint64_t state_;
};

}  // namespace ese

#endif

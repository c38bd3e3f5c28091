#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lfs {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// independent substream per (seed, purpose)
inline uint64_t derive_seed(uint64_t seed, std::string_view tag, uint64_t extra = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a(tag)) + extra);
}

// mt19937_64 output is fixed by the standard but the std distributions are not,
// so the transforms are done here to keep streams identical across toolchains
struct rng {
    std::mt19937_64 eng;
    bool has_spare = false;
    double spare = 0;

    explicit rng(uint64_t seed) : eng(seed) {}

    double uniform() { return double(eng() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    uint64_t below(uint64_t n) {
        uint64_t lim = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do x = eng();
        while (x >= lim);
        return x % n;
    }

    double normal() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        double u1, u2;
        do u1 = uniform();
        while (u1 <= 0);
        u2 = uniform();
        double r = std::sqrt(-2 * std::log(u1));
        spare = r * std::sin(2 * M_PI * u2);
        has_spare = true;
        return r * std::cos(2 * M_PI * u2);
    }

    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) std::swap(p[i], p[below(i + 1)]);
        return p;
    }

    // m distinct elements of pool, in draw order
    template <class T>
    std::vector<T> sample(std::vector<T> pool, int m) {
        if (m > (int)pool.size()) throw error("sample larger than pool");
        for (int i = 0; i < m; ++i) std::swap(pool[i], pool[i + below(pool.size() - i)]);
        pool.resize(m);
        return pool;
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        if (v.empty()) throw error("pick from empty pool");
        return v[below(v.size())];
    }
};

inline bool all_finite(const double* p, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

}  // namespace lfs

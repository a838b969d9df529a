#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lts {

/// External unit identifier. Population files number units 1..N.
using UnitId = std::uint32_t;

// Error taxonomy, mapped to CLI exit codes 2/3/4.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class EstimationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Dense square K-by-K grid, row-major, 0-based.
template <typename T> class Grid {
  public:
    Grid() = default;
    explicit Grid(int dim, T fill = T{})
        : dim_(dim), cells_(static_cast<std::size_t>(dim) * dim, fill) {}

    static Grid constant(int dim, T value) { return Grid(dim, value); }

    int dim() const { return dim_; }
    T &at(int row, int col) { return cells_[index(row, col)]; }
    const T &at(int row, int col) const { return cells_[index(row, col)]; }

    bool operator==(const Grid &) const = default;

  private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * dim_ + col;
    }
    int dim_ = 0;
    std::vector<T> cells_;
};

/// Deterministic RNG. All distribution logic is implemented here so that
/// streams are reproducible independent of the standard library's
/// distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Derives an independent stream from a master seed and up to three
    /// tags (e.g. replication index, phase). Same inputs, same stream.
    static Rng stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
        std::uint64_t s = mix(master + 0x9e3779b97f4a7c15ull);
        s = mix(s ^ mix(a + 0xbf58476d1ce4e5b9ull));
        s = mix(s ^ mix(b + 0x94d049bb133111ebull));
        s = mix(s ^ mix(c + 0xd6e8feb86659fd93ull));
        return Rng(s);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0)
            throw std::logic_error("Rng::next_below: empty range");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return next_double() < p; }

    /// Draws an index with the given probabilities (must sum to ~1).
    int categorical(std::span<const double> probs) {
        const double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc)
                return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }
    std::mt19937_64 engine_;
};

inline double mean_of(std::span<const double> xs) {
    if (xs.empty())
        throw std::invalid_argument("mean_of: empty input");
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

/// Unbiased sample variance (n-1 denominator); requires n >= 2.
inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2)
        throw std::invalid_argument("sample_variance: need at least 2 values");
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs)
        s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

/// Plug-in variance (n denominator).
inline double population_variance(std::span<const double> xs) {
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs)
        s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

inline double median_of(std::vector<double> xs) {
    if (xs.empty())
        throw std::invalid_argument("median_of: empty input");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1)
        return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

/// log of the binomial coefficient C(n, k).
inline double log_choose(int n, int k) {
    if (k < 0 || k > n)
        return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace lts

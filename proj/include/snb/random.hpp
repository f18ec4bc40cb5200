#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace snb {

/// mt19937_64 with hand-rolled distributions: std:: distributions are implementation-defined,
/// and generated artifacts must be byte-identical for a seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto range = static_cast<unsigned __int128>(static_cast<std::uint64_t>(hi - lo) + 1);
        return lo + static_cast<std::int64_t>((static_cast<unsigned __int128>(next()) * range) >> 64);
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1)); }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    /// Number of failures before the first success, with the given mean.
    int geometric(double mean) {
        if (mean <= 0) return 0;
        const double p = 1.0 / (1.0 + mean);
        return static_cast<int>(std::floor(std::log1p(-uniform()) / std::log1p(-p)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    template <typename T>
    const T& pick(std::span<const T> items) { return items[index(items.size())]; }

private:
    std::mt19937_64 engine_;
};

/// Sampler over {0..n-1} from non-negative weights (cumulative table + binary search).
class DiscreteSampler {
public:
    DiscreteSampler() = default;
    explicit DiscreteSampler(std::span<const double> weights);

    std::size_t sample(Rng& rng) const;
    std::size_t size() const { return cumulative_.size(); }

private:
    std::vector<double> cumulative_;
};

/// Zipf-like weights 1/(i+1)^s for i in [0, n).
std::vector<double> zipf_weights(std::size_t n, double s);

} // namespace snb

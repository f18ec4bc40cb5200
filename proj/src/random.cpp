#include "snb/random.hpp"

#include <algorithm>
#include <stdexcept>

namespace snb {

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
    cumulative_.reserve(weights.size());
    double total = 0;
    for (double w : weights) {
        if (w < 0) throw std::invalid_argument("negative sampling weight");
        total += w;
        cumulative_.push_back(total);
    }
    if (!cumulative_.empty() && total <= 0) throw std::invalid_argument("all sampling weights are zero");
}

std::size_t DiscreteSampler::sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

std::vector<double> zipf_weights(std::size_t n, double s) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), s);
    return w;
}

} // namespace snb

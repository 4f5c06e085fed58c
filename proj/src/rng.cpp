#include "iolab/rng.hpp"

#include "iolab/types.hpp"

#include <algorithm>
#include <numeric>

namespace iolab {

std::size_t sample_index(Rng& rng, std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw InvalidArgument("sample_index: weights must have positive mass");
    double u = uniform01(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    // Rounding fallthrough: last index with positive weight.
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return i;
    }
    return 0;
}

std::vector<double> sample_dirichlet(Rng& rng, std::span<const double> alpha) {
    std::vector<double> out(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = std::gamma_distribution<double>(alpha[i], 1.0)(rng);
        total += out[i];
    }
    if (total <= 0.0) {
        // All gammas underflowed (tiny alpha): put the mass on one coordinate.
        std::fill(out.begin(), out.end(), 0.0);
        out[sample_index(rng, alpha)] = 1.0;
        return out;
    }
    for (auto& x : out) x /= total;
    return out;
}

CategoricalSampler::CategoricalSampler(std::span<const double> weights) : cdf_(weights.size()) {
    std::partial_sum(weights.begin(), weights.end(), cdf_.begin());
    if (cdf_.empty() || !(cdf_.back() > 0.0)) {
        throw InvalidArgument("CategoricalSampler: weights must have positive mass");
    }
}

std::size_t CategoricalSampler::operator()(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
}

}  // namespace iolab

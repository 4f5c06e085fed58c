#include "iolab/stats.hpp"

#include "iolab/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace iolab {

double median(std::span<const double> values) {
    if (values.empty()) return 0.0;
    std::vector<double> v(values.begin(), values.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) return 0.0;
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double rank = std::ceil(q * static_cast<double>(v.size()));
    const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(v.size())));
    return v[idx - 1];
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::optional<double> coefficient_of_variation(std::span<const double> values) {
    if (values.empty()) return std::nullopt;
    const double m = mean(values);
    if (m == 0.0) return std::nullopt;
    double ss = 0.0;
    for (double x : values) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(values.size())) / m;
}

double entropy_bits(std::span<const double> counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

namespace {

std::vector<double> normalized(std::span<const double> h) {
    std::vector<double> out(h.begin(), h.end());
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total <= 0.0) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    } else {
        for (auto& x : out) x /= total;
    }
    return out;
}

double kl_to_mixture(const std::vector<double>& p, const std::vector<double>& m) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) d += p[i] * std::log2(p[i] / m[i]);
    }
    return d;
}

}  // namespace

double normalized_js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidArgument("normalized_js_divergence: length mismatch");
    if (p.empty()) return 0.0;
    const auto pn = normalized(p);
    const auto qn = normalized(q);
    std::vector<double> m(pn.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (pn[i] + qn[i]);
    const double js = 0.5 * kl_to_mixture(pn, m) + 0.5 * kl_to_mixture(qn, m);
    return std::clamp(js, 0.0, 1.0);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("cosine_similarity: length mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: length mismatch");
    const auto n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sa = 0.0, sb = 0.0;
    for (const auto& [_, c] : joint) index += c2(c);
    for (const auto& [_, c] : ra) sa += c2(c);
    for (const auto& [_, c] : rb) sb += c2(c);
    const double expected = sa * sb / c2(n);
    const double max_index = 0.5 * (sa + sb);
    if (max_index == expected) return 1.0;  // both labelings trivial
    return (index - expected) / (max_index - expected);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidArgument("total_variation: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

std::vector<double> greedy_matched_tv(const std::vector<std::vector<double>>& estimated,
                                      const std::vector<std::vector<double>>& reference) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t r = 0; r < reference.size(); ++r) {
        for (std::size_t e = 0; e < estimated.size(); ++e) {
            pairs.emplace_back(total_variation(estimated[e], reference[r]), r, e);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<double> out(reference.size(), 1.0);
    std::vector<bool> ref_used(reference.size()), est_used(estimated.size());
    for (const auto& [tv, r, e] : pairs) {
        if (ref_used[r] || est_used[e]) continue;
        ref_used[r] = est_used[e] = true;
        out[r] = tv;
    }
    return out;
}

}  // namespace iolab

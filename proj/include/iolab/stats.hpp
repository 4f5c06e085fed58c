#pragma once

#include <optional>
#include <span>
#include <vector>

namespace iolab {

// Median of a copy of the values; 0 for an empty range.
double median(std::span<const double> values);

// Nearest-rank quantile, q in (0, 1].
double quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);

// Coefficient of variation (population sd / mean); nullopt if mean is 0.
std::optional<double> coefficient_of_variation(std::span<const double> values);

// Shannon entropy in bits of a count histogram.
double entropy_bits(std::span<const double> counts);

// Jensen-Shannon divergence with base-2 logs, bounded in [0, 1].
// Inputs are unnormalized histograms of equal length; an all-zero histogram
// is treated as uniform.
double normalized_js_divergence(std::span<const double> p, std::span<const double> q);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

// Total variation distance between two distributions.
double total_variation(std::span<const double> p, std::span<const double> q);

// Greedily pairs estimated and reference distributions, smallest TV first.
// Returns, for each reference row, the TV to its matched estimate.
std::vector<double> greedy_matched_tv(const std::vector<std::vector<double>>& estimated,
                                      const std::vector<std::vector<double>>& reference);

}  // namespace iolab

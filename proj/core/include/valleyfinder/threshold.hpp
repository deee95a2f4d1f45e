#pragma once

#include "valleyfinder/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace valleyfinder {

struct ComponentGroups {
  std::vector<std::size_t> within;
  std::vector<std::size_t> between;
};

/// Splits a labeled fit into within-session and between-session indices.
/// Throws numerical_error when either side is empty.
ComponentGroups group_components(const MixtureFit& fit);

/// Sum over `group` of lambda_i phi(t; mu_i, sigma_i).
double group_density(const MixtureFit& fit, std::span<const std::size_t> group,
                     double t_log2);

/// Point between the within and between modes where both groups are
/// equally dense, found by bisection on their difference.
ThresholdResult crossover_threshold(const MixtureFit& fit);

struct ValleyReport {
  bool found = false;
  std::optional<double> valley_log2;
  std::optional<double> valley_minutes;
  std::optional<double> peak_lo_log2;
  std::optional<double> peak_hi_log2;
  int smoothing_window_bins = 5;

  friend bool operator==(const ValleyReport&, const ValleyReport&) = default;
};

struct ValleyOptions {
  double lo_log2 = std::log2(60.0);
  double hi_log2 = std::log2(86400.0);
  int smooth_bins = 5;
  /// Peaks whose prominence is below this fraction of the tallest smoothed
  /// bin in range are treated as noise.
  double min_prominence = 0.05;
};

/// Deepest smoothed-density minimum between the two tallest peaks inside
/// [lo, hi]. The range ends count as peaks when the curve rises into them.
ValleyReport find_valley(const Histogram& hist, ValleyOptions options = {});

struct DbiReport {
  double index = 0.0;
  std::vector<double> per_cluster_dispersion;
  std::vector<std::vector<double>> centroid_distances;
  std::vector<std::int64_t> assignment_counts;
  /// Components that received no samples and were left out of the index.
  std::vector<std::size_t> empty_clusters;

  friend bool operator==(const DbiReport&, const DbiReport&) = default;
};

/// Davies-Bouldin index of the hard assignment implied by `fit`, using
/// 1-D distance and mean absolute dispersion.
DbiReport davies_bouldin(std::span<const double> xs, const MixtureFit& fit);

} // namespace valleyfinder

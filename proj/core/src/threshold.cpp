#include "valleyfinder/threshold.hpp"

#include "valleyfinder/error.hpp"
#include "valleyfinder/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace valleyfinder {

ComponentGroups group_components(const MixtureFit& fit) {
  ComponentGroups groups;
  for (std::size_t i = 0; i < fit.components.size(); ++i) {
    const auto label = fit.components[i].label;
    if (label == ComponentLabel::unlabeled)
      throw usage_error("fit components must be labeled before grouping");
    (is_within_label(label) ? groups.within : groups.between).push_back(i);
  }
  if (groups.within.empty())
    throw numerical_error("no within-session component; no threshold derivable");
  if (groups.between.empty())
    throw numerical_error(
        "no between-session component (unimodal data); no threshold derivable");
  return groups;
}

double group_density(const MixtureFit& fit, std::span<const std::size_t> group,
                     double t_log2) {
  double total = 0.0;
  for (auto i : group) {
    const auto& c = fit.components.at(i);
    total += c.lambda * normal_pdf(t_log2, c.mu, c.sigma);
  }
  return total;
}

ThresholdResult crossover_threshold(const MixtureFit& fit) {
  const auto groups = group_components(fit);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (auto i : groups.within)
    lo = std::max(lo, fit.components[i].mu);
  for (auto i : groups.between)
    hi = std::min(hi, fit.components[i].mu);
  if (!(lo < hi))
    throw numerical_error("within-session means do not precede between-session "
                          "means; cannot bracket the crossover");

  auto difference = [&](double t) {
    const double d = group_density(fit, groups.within, t) -
                     group_density(fit, groups.between, t);
    if (!std::isfinite(d))
      throw numerical_error("non-finite group density");
    return d;
  };

  const double g_lo = difference(lo);
  const double g_hi = difference(hi);
  if (!(g_lo > 0.0 && g_hi < 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "crossover not bracketed on [" << lo << ", " << hi
        << "]: within/between densities are "
        << group_density(fit, groups.within, lo) << "/"
        << group_density(fit, groups.between, lo) << " at the low end and "
        << group_density(fit, groups.within, hi) << "/"
        << group_density(fit, groups.between, hi) << " at the high end";
    throw numerical_error(msg.str());
  }

  double a = lo;
  double b = hi;
  double t = 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    t = 0.5 * (a + b);
    if (t <= a || t >= b)
      break;
    const double g = difference(t);
    if (g == 0.0)
      break;
    (g > 0.0 ? a : b) = t;
  }

  ThresholdResult result;
  result.t_log2 = t;
  result.threshold_s = std::exp2(t);
  result.threshold_min = result.threshold_s / 60.0;
  result.within_group = groups.within;
  result.between_group = groups.between;
  result.bracket = {lo, hi};
  return result;
}

namespace {

std::vector<double> moving_average(const std::vector<double>& values,
                                   int window) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t left = (window - 1) / 2;
  const std::ptrdiff_t right = window - 1 - left;
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto from = std::max<std::ptrdiff_t>(0, i - left);
    const auto to = std::min<std::ptrdiff_t>(n - 1, i + right);
    double sum = 0.0;
    for (auto j = from; j <= to; ++j)
      sum += values[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(to - from + 1);
  }
  return out;
}

/// Height of a peak above its key col: on each side, the lowest point
/// before taller terrain. A side that reaches the range end without meeting
/// taller terrain does not bound the peak; a peak bounded on neither side
/// is measured from the lowest point of the whole curve.
double prominence(const std::vector<double>& s, std::size_t peak) {
  const double h = s[peak];
  std::optional<double> base;
  auto side = [&](auto first, auto last, auto step) {
    double lowest = h;
    for (auto j = first; j != last; j = step(j)) {
      lowest = std::min(lowest, s[static_cast<std::size_t>(j)]);
      if (s[static_cast<std::size_t>(j)] > h) {
        base = std::max(base.value_or(lowest), lowest);
        return;
      }
    }
  };
  if (peak > 0)
    side(static_cast<std::ptrdiff_t>(peak) - 1, std::ptrdiff_t{-1},
         [](std::ptrdiff_t j) { return j - 1; });
  side(static_cast<std::ptrdiff_t>(peak) + 1, static_cast<std::ptrdiff_t>(s.size()),
       [](std::ptrdiff_t j) { return j + 1; });
  if (!base)
    base = *std::min_element(s.begin(), s.end());
  return h - *base;
}

} // namespace

ValleyReport find_valley(const Histogram& hist, ValleyOptions options) {
  if (options.smooth_bins < 1)
    throw usage_error("smoothing window must be at least one bin");
  ValleyReport report;
  report.smoothing_window_bins = options.smooth_bins;
  if (hist.bins.empty())
    return report;

  std::vector<double> density;
  density.reserve(hist.bins.size());
  for (const auto& bin : hist.bins)
    density.push_back(bin.density);
  const auto smooth = moving_average(density, options.smooth_bins);

  std::vector<double> centers;
  std::vector<double> curve;
  for (std::size_t i = 0; i < hist.bins.size(); ++i) {
    const double c = 0.5 * (hist.bins[i].lo_log2 + hist.bins[i].hi_log2);
    if (c >= options.lo_log2 && c <= options.hi_log2) {
      centers.push_back(c);
      curve.push_back(smooth[i]);
    }
  }
  if (curve.size() < 3)
    return report;

  const double tallest = *std::max_element(curve.begin(), curve.end());
  if (!(tallest > 0.0))
    return report;

  std::vector<std::size_t> peaks;
  const std::size_t last = curve.size() - 1;
  if (curve[0] > curve[1])
    peaks.push_back(0);
  for (std::size_t j = 1; j < last; ++j)
    if (curve[j] > curve[j - 1] && curve[j] >= curve[j + 1])
      peaks.push_back(j);
  if (curve[last] > curve[last - 1])
    peaks.push_back(last);

  std::erase_if(peaks, [&](std::size_t p) {
    return prominence(curve, p) < options.min_prominence * tallest;
  });
  if (peaks.size() < 2)
    return report;

  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) {
    return curve[a] > curve[b];
  });
  const auto first = std::min(peaks[0], peaks[1]);
  const auto second = std::max(peaks[0], peaks[1]);
  if (second - first < 2)
    return report;

  auto valley = first + 1;
  for (auto j = first + 1; j < second; ++j)
    if (curve[j] < curve[valley])
      valley = j;

  report.found = true;
  report.valley_log2 = centers[valley];
  report.valley_minutes = std::exp2(centers[valley]) / 60.0;
  report.peak_lo_log2 = centers[first];
  report.peak_hi_log2 = centers[second];
  return report;
}

DbiReport davies_bouldin(std::span<const double> xs, const MixtureFit& fit) {
  const std::size_t k = fit.components.size();
  if (k < 2)
    throw usage_error("Davies-Bouldin index needs at least two components");
  if (xs.empty())
    throw usage_error("Davies-Bouldin index needs samples");

  std::vector<std::size_t> assignment(xs.size());
  std::vector<double> log_lambda(k);
  for (std::size_t i = 0; i < k; ++i)
    log_lambda[i] = std::log(fit.components[i].lambda);

  DbiReport report;
  report.assignment_counts.assign(k, 0);
  std::vector<double> sums(k, 0.0);
  for (std::size_t s = 0; s < xs.size(); ++s) {
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      const auto& c = fit.components[i];
      const double score = log_lambda[i] + normal_log_pdf(xs[s], c.mu, c.sigma);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    assignment[s] = best;
    ++report.assignment_counts[best];
    sums[best] += xs[s];
  }

  std::vector<double> centroid(k, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < k; ++i) {
    if (report.assignment_counts[i] == 0) {
      report.empty_clusters.push_back(i);
      continue;
    }
    active.push_back(i);
    centroid[i] = sums[i] / static_cast<double>(report.assignment_counts[i]);
  }
  if (active.size() < 2)
    throw numerical_error("all samples fall in one cluster; index undefined");

  report.per_cluster_dispersion.assign(k, 0.0);
  for (std::size_t s = 0; s < xs.size(); ++s)
    report.per_cluster_dispersion[assignment[s]] +=
        std::abs(xs[s] - centroid[assignment[s]]);
  for (auto i : active)
    report.per_cluster_dispersion[i] /=
        static_cast<double>(report.assignment_counts[i]);

  report.centroid_distances.assign(k, std::vector<double>(k, 0.0));
  for (auto i : active)
    for (auto j : active)
      report.centroid_distances[i][j] = std::abs(centroid[i] - centroid[j]);

  double total = 0.0;
  for (auto i : active) {
    double worst = 0.0;
    for (auto j : active) {
      if (i == j)
        continue;
      const double m = report.centroid_distances[i][j];
      if (!(m > 0.0))
        throw numerical_error("two clusters share a centroid; index undefined");
      worst = std::max(worst, (report.per_cluster_dispersion[i] +
                               report.per_cluster_dispersion[j]) / m);
    }
    total += worst;
  }
  report.index = total / static_cast<double>(active.size());
  return report;
}

} // namespace valleyfinder

#include "valleyfinder/histogram.hpp"

#include "valleyfinder/error.hpp"

#include <algorithm>
#include <cmath>

namespace valleyfinder {

Histogram make_histogram(std::span<const double> xs, double bin_width_log2) {
  if (!(bin_width_log2 > 0.0) || !std::isfinite(bin_width_log2))
    throw usage_error("histogram bin width must be positive");
  Histogram hist;
  hist.bin_width_log2 = bin_width_log2;
  hist.n_total = static_cast<std::int64_t>(xs.size());
  if (xs.empty())
    return hist;

  const auto [min_it, max_it] = std::minmax_element(xs.begin(), xs.end());
  if (!std::isfinite(*min_it) || !std::isfinite(*max_it))
    throw data_error("histogram input contains non-finite values");
  const auto first = static_cast<std::int64_t>(std::floor(*min_it / bin_width_log2));
  const auto last = static_cast<std::int64_t>(std::floor(*max_it / bin_width_log2));
  const auto n_bins = static_cast<std::size_t>(last - first + 1);

  std::vector<std::int64_t> counts(n_bins, 0);
  for (double x : xs) {
    auto idx = static_cast<std::int64_t>(std::floor(x / bin_width_log2)) - first;
    idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(n_bins) - 1);
    ++counts[static_cast<std::size_t>(idx)];
  }

  const double norm = static_cast<double>(xs.size()) * bin_width_log2;
  hist.bins.reserve(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    // Edges come from integer multiples so neighbouring bins share them
    // exactly.
    const double lo = static_cast<double>(first + static_cast<std::int64_t>(i)) *
                      bin_width_log2;
    const double hi =
        static_cast<double>(first + static_cast<std::int64_t>(i) + 1) *
        bin_width_log2;
    hist.bins.push_back({lo, hi, counts[i], static_cast<double>(counts[i]) / norm});
  }
  return hist;
}

} // namespace valleyfinder

#pragma once

#include "valleyfinder/types.hpp"

#include <span>

namespace valleyfinder {

/// Fixed-width density histogram over log2 seconds. Bin edges are aligned
/// to integer multiples of `bin_width_log2`.
Histogram make_histogram(std::span<const double> xs,
                         double bin_width_log2 = 0.25);

} // namespace valleyfinder

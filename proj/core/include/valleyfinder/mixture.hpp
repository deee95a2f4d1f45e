#pragma once

#include "valleyfinder/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace valleyfinder {

/// log2(3600): component means below this are within-session.
inline constexpr double within_mean_limit_log2 = 11.813781191217037;
/// Roughly one month in log2 seconds; means at or above are breaks.
inline constexpr double break_mean_limit_log2 = 21.3;

/// Starting parameters for one EM run. Requires at least 10*k samples.
std::vector<MixtureComponent> init_params(std::span<const double> xs, int k,
                                          std::uint64_t seed,
                                          InitStrategy strategy,
                                          double sigma_floor = 1e-3);

/// Posterior component probabilities for one sample.
std::vector<double> responsibilities(std::span<const MixtureComponent> components,
                                     double x);

/// Sum over xs of ln(sum_i lambda_i phi(x; mu_i, sigma_i)), log-sum-exp
/// stabilised. Zero for empty input.
double log_likelihood(std::span<const MixtureComponent> components,
                      std::span<const double> xs);

/// Outcome of a single EM run from fixed starting parameters.
struct EmRun {
  std::vector<MixtureComponent> components;
  /// Log-likelihood of the starting parameters followed by one entry per
  /// completed iteration.
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  /// A weight collapsed below 1e-6 or a deviation hit the floor.
  bool degenerate = false;

  double final_log_likelihood() const {
    return log_likelihood_trace.back();
  }
};

EmRun run_em(std::span<const double> xs,
             std::vector<MixtureComponent> initial, const FitConfig& config);

/// Seed used for restart `index` of a fit seeded with `seed`.
std::uint64_t restart_seed(std::uint64_t seed, int index);

/// Best of `config.restarts` EM runs by final log-likelihood. Restart 0
/// starts from `config.init_strategy`; later restarts use seeded random
/// quantile starts. Degenerate runs are skipped; if every run is
/// degenerate the fit fails with numerical_error.
MixtureFit em_fit(std::span<const double> xs, const FitConfig& config);

/// (3k - 1) ln(n) - 2 LL.
double bic(const MixtureFit& fit);

/// Assigns SHORT_WITHIN / WITHIN / BETWEEN / BREAK by component mean.
MixtureFit label_components(MixtureFit fit);

/// Mixture density of all components at x.
double mixture_density(std::span<const MixtureComponent> components, double x);

} // namespace valleyfinder

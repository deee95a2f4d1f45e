#include "valleyfinder/mixture.hpp"

#include "valleyfinder/error.hpp"
#include "valleyfinder/normal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <exception>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

namespace valleyfinder {

namespace {

constexpr double collapsed_weight = 1e-6;

void check_samples(std::span<const double> xs, int k) {
  if (k < 2 || k > 4)
    throw usage_error("k must be in [2, 4], got " + std::to_string(k));
  const auto needed = static_cast<std::size_t>(10 * k);
  if (xs.size() < needed)
    throw data_error("too few samples: need at least " + std::to_string(needed) +
                     " for k=" + std::to_string(k) + ", got " +
                     std::to_string(xs.size()));
  for (double x : xs)
    if (!std::isfinite(x))
      throw data_error("samples contain non-finite values");
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

Stats block_stats(std::span<const double> block) {
  const double n = static_cast<double>(block.size());
  const double mean = std::accumulate(block.begin(), block.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : block)
    ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
      carry_ += (sum_ - t) + value;
    else
      carry_ += (value - t) + sum_;
    sum_ = t;
  }

  double value() const {
    return sum_ + carry_;
  }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct Params {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> lambda;
};

/// Sufficient statistics from one E-step, with moments taken about the
/// current means to limit cancellation.
struct EStep {
  double log_likelihood = 0.0;
  std::vector<double> weight;
  std::vector<double> first;
  std::vector<double> second;
};

EStep expectation(std::span<const double> xs, const Params& p) {
  const std::size_t k = p.mu.size();
  EStep e;
  e.weight.assign(k, 0.0);
  e.first.assign(k, 0.0);
  e.second.assign(k, 0.0);
  std::vector<double> log_lambda(k), log_norm(k), inv_sigma(k), logp(k);
  for (std::size_t i = 0; i < k; ++i) {
    log_lambda[i] = std::log(p.lambda[i]);
    log_norm[i] = -std::log(p.sigma[i]) - 0.5 * std::log(2.0 * std::numbers::pi);
    inv_sigma[i] = 1.0 / p.sigma[i];
  }
  CompensatedSum ll;
  for (double x : xs) {
    std::size_t arg_top = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double z = (x - p.mu[i]) * inv_sigma[i];
      logp[i] = log_lambda[i] + log_norm[i] - 0.5 * z * z;
      if (logp[i] > logp[arg_top])
        arg_top = i;
    }
    const double top = logp[arg_top];
    double total = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == arg_top)
        continue;
      logp[i] = std::exp(logp[i] - top);
      total += logp[i];
    }
    logp[arg_top] = 1.0;
    ll.add(top + std::log(total));
    for (std::size_t i = 0; i < k; ++i) {
      const double r = logp[i] / total;
      const double d = x - p.mu[i];
      e.weight[i] += r;
      e.first[i] += r * d;
      e.second[i] += r * d * d;
    }
  }
  e.log_likelihood = ll.value();
  return e;
}

Params maximization(const EStep& e, const Params& prev, std::size_t n,
                    double sigma_floor) {
  const std::size_t k = prev.mu.size();
  Params next = prev;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = e.weight[i];
    next.lambda[i] = w / static_cast<double>(n);
    if (!(w > 0.0))
      continue;
    const double shift = e.first[i] / w;
    next.mu[i] = prev.mu[i] + shift;
    const double var = std::max(e.second[i] / w - shift * shift, 0.0);
    next.sigma[i] = std::max(std::sqrt(var), sigma_floor);
  }
  return next;
}

Params to_params(std::span<const MixtureComponent> components) {
  Params p;
  for (const auto& c : components) {
    p.mu.push_back(c.mu);
    p.sigma.push_back(c.sigma);
    p.lambda.push_back(c.lambda);
  }
  return p;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

std::vector<MixtureComponent> init_params(std::span<const double> xs, int k,
                                          std::uint64_t seed,
                                          InitStrategy strategy,
                                          double sigma_floor) {
  check_samples(xs, k);
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto uk = static_cast<std::size_t>(k);
  const double weight = 1.0 / static_cast<double>(k);

  std::vector<MixtureComponent> out;
  out.reserve(uk);
  if (strategy == InitStrategy::quantile) {
    for (std::size_t i = 0; i < uk; ++i) {
      const std::size_t lo = i * n / uk;
      const std::size_t hi = (i + 1) * n / uk;
      const auto s = block_stats(std::span{sorted}.subspan(lo, hi - lo));
      out.emplace_back(s.mean, std::max(s.stddev, sigma_floor), weight);
    }
  } else {
    // One mean per equal-probability stratum, at a seeded position inside it.
    std::mt19937_64 rng{seed};
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    const auto spread = block_stats(sorted).stddev / static_cast<double>(k);
    for (std::size_t i = 0; i < uk; ++i) {
      const double u = (static_cast<double>(i) + unit(rng)) / static_cast<double>(k);
      const auto idx = std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
      out.emplace_back(sorted[idx], std::max(spread, sigma_floor), weight);
    }
  }
  return out;
}

std::vector<double> responsibilities(std::span<const MixtureComponent> components,
                                     double x) {
  std::vector<double> r(components.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    r[i] = std::log(c.lambda) + normal_log_pdf(x, c.mu, c.sigma);
    top = std::max(top, r[i]);
  }
  double total = 0.0;
  for (double& v : r) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : r)
    v /= total;
  return r;
}

double log_likelihood(std::span<const MixtureComponent> components,
                      std::span<const double> xs) {
  if (xs.empty())
    return 0.0;
  return expectation(xs, to_params(components)).log_likelihood;
}

EmRun run_em(std::span<const double> xs, std::vector<MixtureComponent> initial,
             const FitConfig& config) {
  const std::size_t n = xs.size();
  Params params = to_params(initial);
  EmRun run;
  EStep e = expectation(xs, params);
  run.log_likelihood_trace.push_back(e.log_likelihood);
  double previous = e.log_likelihood;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    params = maximization(e, params, n, config.sigma_floor);
    e = expectation(xs, params);
    run.log_likelihood_trace.push_back(e.log_likelihood);
    run.iterations = iter;
    if (!std::isfinite(e.log_likelihood))
      break;
    if (std::abs(e.log_likelihood - previous) <=
        config.rel_tol * std::abs(previous)) {
      run.converged = true;
      break;
    }
    previous = e.log_likelihood;
  }

  for (std::size_t i = 0; i < params.mu.size(); ++i) {
    if (params.lambda[i] < collapsed_weight ||
        params.sigma[i] <= config.sigma_floor)
      run.degenerate = true;
  }
  if (!std::isfinite(run.final_log_likelihood()))
    run.degenerate = true;
  for (std::size_t i = 0; i < params.mu.size(); ++i)
    run.components.emplace_back(
        params.mu[i], params.sigma[i],
        std::clamp(params.lambda[i], std::numeric_limits<double>::min(), 1.0));
  return run;
}

std::uint64_t restart_seed(std::uint64_t seed, int index) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

MixtureFit em_fit(std::span<const double> xs, const FitConfig& config) {
  config.validate();
  check_samples(xs, config.k);

  const auto restarts = static_cast<std::size_t>(config.restarts);
  std::vector<EmRun> runs(restarts);
  auto work = [&](std::size_t r) {
    const auto strategy = r == 0 ? config.init_strategy : InitStrategy::random;
    auto init = init_params(xs, config.k, restart_seed(config.seed, static_cast<int>(r)),
                            strategy, config.sigma_floor);
    runs[r] = run_em(xs, std::move(init), config);
  };

  const std::size_t n_threads =
      std::min<std::size_t>(restarts, std::max(1u, std::thread::hardware_concurrency()));
  if (n_threads <= 1) {
    for (std::size_t r = 0; r < restarts; ++r)
      work(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(restarts);
    {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
          for (std::size_t r = next++; r < restarts; r = next++) {
            try {
              work(r);
            } catch (...) {
              failures[r] = std::current_exception();
            }
          }
        });
    }
    for (const auto& failure : failures)
      if (failure)
        std::rethrow_exception(failure);
  }

  // Highest likelihood wins; the lower restart index breaks ties.
  const EmRun* best = nullptr;
  for (const auto& run : runs) {
    if (run.degenerate)
      continue;
    if (!best || run.final_log_likelihood() > best->final_log_likelihood())
      best = &run;
  }
  if (!best)
    throw numerical_error("all " + std::to_string(restarts) +
                          " EM runs degenerated (collapsed weight or variance)");

  MixtureFit fit;
  fit.components = best->components;
  sort_components(fit.components);
  fit.log_likelihood = best->final_log_likelihood();
  fit.n = static_cast<std::int64_t>(xs.size());
  fit.iterations = best->iterations;
  fit.converged = best->converged;
  fit.seed = config.seed;
  return label_components(std::move(fit));
}

double bic(const MixtureFit& fit) {
  if (fit.n <= 0)
    throw usage_error("BIC needs a fit with at least one sample");
  const double params = 3.0 * static_cast<double>(fit.k()) - 1.0;
  return params * std::log(static_cast<double>(fit.n)) - 2.0 * fit.log_likelihood;
}

MixtureFit label_components(MixtureFit fit) {
  auto& cs = fit.components;
  std::optional<std::size_t> top_within;
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (cs[i].mu < within_mean_limit_log2 &&
        (!top_within || cs[i].mu >= cs[*top_within].mu))
      top_within = i;

  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto& c = cs[i];
    if (c.mu < within_mean_limit_log2)
      c.label = i == *top_within ? ComponentLabel::within
                                 : ComponentLabel::short_within;
    else if (c.mu < break_mean_limit_log2)
      c.label = ComponentLabel::between;
    else
      c.label = ComponentLabel::break_;
  }

  // Nothing under an hour: the fastest component still marks in-session
  // activity.
  if (!top_within && !cs.empty()) {
    const auto fastest = std::min_element(
        cs.begin(), cs.end(),
        [](const auto& a, const auto& b) { return a.mu < b.mu; });
    fastest->label = ComponentLabel::within;
  }
  return fit;
}

double mixture_density(std::span<const MixtureComponent> components, double x) {
  double total = 0.0;
  for (const auto& c : components)
    total += c.lambda * normal_pdf(x, c.mu, c.sigma);
  return total;
}

} // namespace valleyfinder

#include <doctest.h>

#include "support.hpp"

#include <valleyfinder/error.hpp>
#include <valleyfinder/mixture.hpp>
#include <valleyfinder/synth.hpp>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace valleyfinder;

namespace {

std::vector<double> two_clumps(std::uint64_t seed) {
  std::mt19937_64 rng{seed};
  std::normal_distribution<double> near6{6.0, 0.5}, near16{16.0, 0.5};
  std::vector<double> xs;
  for (int i = 0; i < 500; ++i)
    xs.push_back(near6(rng));
  for (int i = 0; i < 500; ++i)
    xs.push_back(near16(rng));
  std::shuffle(xs.begin(), xs.end(), rng);
  return xs;
}

/// Direct summation of log mixture density in extended precision, without
/// log-sum-exp.
long double brute_log_likelihood(const std::vector<MixtureComponent>& cs,
                                 const std::vector<double>& xs) {
  long double total = 0.0L;
  for (double x : xs) {
    long double density = 0.0L;
    for (const auto& c : cs) {
      const long double z = (static_cast<long double>(x) - c.mu) / c.sigma;
      density += c.lambda * std::exp(-0.5L * z * z) /
                 (c.sigma * std::sqrt(2.0L * std::numbers::pi_v<long double>));
    }
    total += std::log(density);
  }
  return total;
}

} // namespace

TEST_CASE("quantile init takes block statistics") {
  const auto xs = two_clumps(1);
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const double low_mean = std::accumulate(sorted.begin(), sorted.begin() + 500, 0.0) / 500;
  const double high_mean = std::accumulate(sorted.begin() + 500, sorted.end(), 0.0) / 500;

  const auto init = init_params(xs, 2, 0, InitStrategy::quantile);
  REQUIRE(init.size() == 2);
  CHECK(init[0].mu == doctest::Approx(low_mean).epsilon(1e-12));
  CHECK(init[1].mu == doctest::Approx(high_mean).epsilon(1e-12));
  CHECK(init[0].mu == doctest::Approx(6.0).epsilon(0.02));
  CHECK(init[1].mu == doctest::Approx(16.0).epsilon(0.02));
  CHECK(init[0].lambda == 0.5);
  CHECK(init[1].lambda == 0.5);
}

TEST_CASE("init on constant data floors sigma and the fit degenerates") {
  const std::vector<double> xs(100, 7.0);
  const auto init = init_params(xs, 2, 0, InitStrategy::quantile, 1e-3);
  CHECK(init[0].sigma == 1e-3);
  CHECK(init[1].sigma == 1e-3);
  FitConfig config;
  config.restarts = 3;
  CHECK_THROWS_AS(em_fit(xs, config), numerical_error);
}

TEST_CASE("random init is seed-deterministic") {
  const auto xs = two_clumps(2);
  CHECK(init_params(xs, 3, 9, InitStrategy::random) ==
        init_params(xs, 3, 9, InitStrategy::random));
  CHECK(init_params(xs, 3, 9, InitStrategy::random) !=
        init_params(xs, 3, 10, InitStrategy::random));
}

TEST_CASE("too few samples") {
  const std::vector<double> xs(19, 1.0);
  CHECK_THROWS_AS(init_params(xs, 2, 0, InitStrategy::quantile), data_error);
  CHECK_THROWS_AS(em_fit(std::vector<double>(5, 1.0), FitConfig{}), data_error);
}

TEST_CASE("em_fit recovers the aol mixture from 200k samples") {
  const auto xs = sample_mixture(testing::aol_components(), 200'000, 2024);
  const auto fit = em_fit(xs, FitConfig{});
  REQUIRE(fit.k() == 2);
  CHECK(fit.converged);
  const auto truth = testing::aol_components();
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(fit.components[i].mu - truth[i].mu) <= 0.1);
    CHECK(std::abs(fit.components[i].sigma - truth[i].sigma) <= 0.1);
    CHECK(std::abs(fit.components[i].lambda - truth[i].lambda) <= 0.02);
  }
  CHECK(fit.components[0].label == ComponentLabel::within);
  CHECK(fit.components[1].label == ComponentLabel::between);
  CHECK(validate_fit(fit, 1e-3).empty());
  CHECK(fit.n == 200'000);
}

TEST_CASE("two components never fit a single normal worse than one") {
  std::mt19937_64 rng{8};
  std::normal_distribution<double> normal{10.0, 2.0};
  std::vector<double> xs(5000);
  for (auto& x : xs)
    x = normal(rng);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0;
  for (double x : xs)
    ss += (x - mean) * (x - mean);
  const std::vector<MixtureComponent> single{{mean, std::sqrt(ss / xs.size()), 1.0}};

  FitConfig config;
  config.restarts = 4;
  const auto fit = em_fit(xs, config);
  CHECK(fit.log_likelihood >= log_likelihood(single, xs) - 1e-9);
  for (double t : {6.0, 8.0, 10.0, 12.0, 14.0})
    CHECK(mixture_density(fit.components, t) ==
          doctest::Approx(mixture_density(single, t)).epsilon(0.05));
}

TEST_CASE("em_fit is bit-identical under a fixed seed") {
  const auto xs = sample_mixture(testing::aol_components(), 20'000, 77);
  FitConfig config;
  config.k = 3;
  config.restarts = 4;
  config.seed = 123;
  CHECK(em_fit(xs, config) == em_fit(xs, config));
}

TEST_CASE("log_likelihood closed forms") {
  const std::vector<MixtureComponent> one{{3.0, 2.0, 1.0}};
  const std::vector<double> at_mean{3.0};
  CHECK(log_likelihood(one, at_mean) ==
        doctest::Approx(std::log(1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi)))).epsilon(1e-14));

  // A negligible far component leaves ln(lambda phi(mu)) intact.
  const std::vector<MixtureComponent> dominant{{3.0, 2.0, 0.9}, {500.0, 1.0, 0.1}};
  CHECK(log_likelihood(dominant, at_mean) ==
        doctest::Approx(std::log(0.9 / (2.0 * std::sqrt(2.0 * std::numbers::pi)))).epsilon(1e-14));

  CHECK(log_likelihood(one, std::vector<double>{}) == 0.0);
}

TEST_CASE("log_likelihood matches direct summation") {
  std::mt19937_64 rng{4};
  std::uniform_real_distribution<double> u{0.0, 25.0};
  std::vector<double> xs(100);
  for (auto& x : xs)
    x = u(rng);
  const std::vector<MixtureComponent> cs{{4.0, 1.5, 0.2}, {9.0, 3.0, 0.5}, {18.0, 2.5, 0.3}};
  const double fast = log_likelihood(cs, xs);
  CHECK(std::abs(fast - static_cast<double>(brute_log_likelihood(cs, xs))) < 1e-9);
}

TEST_CASE("bic plug-in values") {
  auto fit = testing::make_fit(testing::aol_components());
  fit.n = 1;
  fit.log_likelihood = -2.5;
  CHECK(bic(fit) == doctest::Approx(5.0));
  fit.n = 100;
  fit.log_likelihood = -10.0;
  CHECK(bic(fit) == doctest::Approx(5.0 * std::log(100.0) + 20.0));
  fit.n = 0;
  CHECK_THROWS_AS(bic(fit), usage_error);
}

TEST_CASE("bic penalty grows with k") {
  for (std::size_t k = 2; k < 4; ++k) {
    MixtureFit small, large;
    small.n = large.n = 1000;
    for (std::size_t i = 0; i < k; ++i)
      small.components.emplace_back(static_cast<double>(i), 1.0, 1.0 / k);
    for (std::size_t i = 0; i <= k; ++i)
      large.components.emplace_back(static_cast<double>(i), 1.0, 1.0 / (k + 1));
    CHECK(bic(large) > bic(small));
  }
}

TEST_CASE("bic prefers two components on clean two-component data") {
  const auto xs = sample_mixture(testing::aol_components(), 5000, 31);
  FitConfig config;
  config.restarts = 3;
  config.k = 2;
  const auto two = em_fit(xs, config);
  config.k = 4;
  const auto four = em_fit(xs, config);
  CHECK(bic(two) < bic(four));
}

TEST_CASE("label_components on known mixtures") {
  auto aol = label_components(testing::make_fit({{6.7, 2.9, 0.7}, {16.8, 2.2, 0.3}}));
  CHECK(aol.components[0].label == ComponentLabel::within);
  CHECK(aol.components[1].label == ComponentLabel::between);

  auto rating = label_components(
      testing::make_fit({{3.0, 1.3, 0.58}, {5.2, 1.9, 0.35}, {18.0, 3.0, 0.07}}));
  CHECK(rating.components[0].label == ComponentLabel::short_within);
  CHECK(rating.components[1].label == ComponentLabel::within);
  CHECK(rating.components[2].label == ComponentLabel::between);

  auto questions = label_components(
      testing::make_fit({{12.7, 1.7, 0.1}, {18.5, 2.1, 0.64}, {22.4, 1.7, 0.26}}));
  CHECK(questions.components[0].label == ComponentLabel::within);
  CHECK(questions.components[1].label == ComponentLabel::between);
  CHECK(questions.components[2].label == ComponentLabel::break_);
}

TEST_CASE("EM never decreases the log-likelihood") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto xs = sample_mixture(testing::aol_components(), 3000, seed);
    FitConfig config;
    config.k = 2 + static_cast<int>(seed % 3);
    const auto run = run_em(xs, init_params(xs, config.k, seed, InitStrategy::random), config);
    for (std::size_t i = 1; i < run.log_likelihood_trace.size(); ++i)
      CHECK(run.log_likelihood_trace[i] >= run.log_likelihood_trace[i - 1] - 1e-9);
    double weights = 0;
    for (const auto& c : run.components)
      weights += c.lambda;
    CHECK(weights == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("responsibilities sum to one") {
  const auto cs = testing::aol_components();
  for (double x = -10.0; x <= 40.0; x += 0.37) {
    const auto r = responsibilities(cs, x);
    CHECK(std::abs(r[0] + r[1] - 1.0) < 1e-12);
    CHECK(r[0] >= 0.0);
    CHECK(r[1] >= 0.0);
  }
}

TEST_CASE("fits shift with the data") {
  const auto xs = sample_mixture(testing::aol_components(), 5000, 12);
  auto shifted = xs;
  for (auto& x : shifted)
    x += 3.25;
  FitConfig config;
  config.restarts = 3;
  const auto a = em_fit(xs, config);
  const auto b = em_fit(shifted, config);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(b.components[i].mu - (a.components[i].mu + 3.25)) < 1e-6);
    CHECK(std::abs(b.components[i].sigma - a.components[i].sigma) < 1e-6);
    CHECK(std::abs(b.components[i].lambda - a.components[i].lambda) < 1e-6);
  }
}

TEST_CASE("restart seeds differ per index") {
  CHECK(restart_seed(1, 0) != restart_seed(1, 1));
  CHECK(restart_seed(1, 0) != restart_seed(2, 0));
  CHECK(restart_seed(5, 3) == restart_seed(5, 3));
}

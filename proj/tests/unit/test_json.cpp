#include <doctest.h>

#include "support.hpp"

#include <valleyfinder/histogram.hpp>
#include <valleyfinder/json.hpp>
#include <valleyfinder/mixture.hpp>
#include <valleyfinder/sessionize.hpp>
#include <valleyfinder/synth.hpp>
#include <valleyfinder/threshold.hpp>

#include <random>

using namespace valleyfinder;

namespace {

template <class T>
T round_trip(const T& value) {
  return json::parse(dump_line(json(value))).template get<T>();
}

MixtureFit random_fit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u{0.001, 30.0};
  std::uniform_int_distribution<int> k{1, 5};
  MixtureFit fit;
  const int n = k(rng);
  for (int i = 0; i < n; ++i)
    fit.components.emplace_back(u(rng), u(rng), 1.0 / n,
                                static_cast<ComponentLabel>(i % 5));
  fit.log_likelihood = -u(rng) * 1e5;
  fit.n = static_cast<std::int64_t>(u(rng) * 1000) + 1;
  fit.iterations = k(rng);
  fit.converged = k(rng) % 2 == 0;
  fit.seed = rng();
  return fit;
}

} // namespace

TEST_CASE("mixture fits survive a round trip") {
  std::mt19937_64 rng{3};
  for (int i = 0; i < 200; ++i) {
    const auto fit = random_fit(rng);
    CHECK(round_trip(fit) == fit);
  }
}

TEST_CASE("fit field names") {
  const auto j = json(testing::make_fit(testing::aol_components()));
  CHECK(j.contains("components"));
  CHECK(j.contains("log_likelihood"));
  CHECK(j["components"][0].contains("mu"));
  CHECK(j["components"][0]["label"] == "UNLABELED");
}

TEST_CASE("other records survive a round trip") {
  const auto threshold =
      crossover_threshold(label_components(testing::make_fit(testing::aol_components())));
  CHECK(round_trip(threshold) == threshold);

  const auto hist = make_histogram(sample_mixture(testing::aol_components(), 500, 1), 0.25);
  CHECK(round_trip(hist) == hist);

  const Session session{"u", 10, 70, 3};
  CHECK(round_trip(session) == session);
  CHECK(round_trip(Event{"u", 5, "click"}) == Event{"u", 5, "click"});
  CHECK(round_trip(InterActivitySample{"u", 104}) == InterActivitySample{"u", 104});

  FitConfig config;
  config.k = 4;
  config.init_strategy = InitStrategy::random;
  CHECK(round_trip(config) == config);

  FilterSpec filters;
  filters.min_delta_s = 2;
  filters.exclude_exact_deltas = {1080};
  filters.exclude_users = {"bot"};
  filters.max_events_per_user = 50;
  CHECK(round_trip(filters) == filters);

  SynthSpec spec;
  spec.components = testing::aol_components();
  spec.events_per_user = EventCountRange{2, 9};
  CHECK(round_trip(spec) == spec);
  spec.events_per_user = std::int64_t{4};
  CHECK(round_trip(spec) == spec);

  ValleyReport valley;
  CHECK(round_trip(valley) == valley);
  valley.found = true;
  valley.valley_log2 = 12.875;
  valley.valley_minutes = 125.0;
  valley.peak_lo_log2 = 6.0;
  valley.peak_hi_log2 = 16.0;
  CHECK(round_trip(valley) == valley);

  const std::vector<double> xs{0.0, 2.0, 9.0, 11.0};
  const auto dbi =
      davies_bouldin(xs, testing::make_fit({{1.0, 1.0, 0.5}, {10.0, 1.0, 0.5}}));
  CHECK(round_trip(dbi) == dbi);

  const std::vector<Session> sessions{session, Session{"v", 0, 0, 1}};
  const auto summary = session_summary(sessions);
  CHECK(round_trip(summary) == summary);
}

TEST_CASE("fit config fields default when absent") {
  const auto config = json::parse(R"({"k": 3})").get<FitConfig>();
  CHECK(config.k == 3);
  CHECK(config.restarts == FitConfig{}.restarts);
}

TEST_CASE("document form ends with a newline") {
  const auto text = dump_document(json{{"a", 1}});
  CHECK(text.back() == '\n');
  CHECK(dump_line(json{{"a", 1}}) == R"({"a":1})");
}

#include <benchmark/benchmark.h>

#include <valleyfinder/ingest.hpp>
#include <valleyfinder/mixture.hpp>
#include <valleyfinder/sessionize.hpp>
#include <valleyfinder/synth.hpp>
#include <valleyfinder/threshold.hpp>

using namespace valleyfinder;

namespace {

const std::vector<MixtureComponent> aol{{6.7, 2.9, 0.70}, {16.8, 2.2, 0.30}};

SynthSpec log_spec(std::int64_t users) {
  SynthSpec spec;
  spec.components = aol;
  spec.n_users = users;
  spec.events_per_user = EventCountRange{2, 200};
  spec.seed = 11;
  return spec;
}

void BM_em_fit(benchmark::State& state) {
  const auto xs = sample_mixture(aol, state.range(0), 1);
  FitConfig config;
  config.restarts = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(em_fit(xs, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_em_fit)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_crossover(benchmark::State& state) {
  MixtureFit fit;
  fit.components = {{12.7, 1.7, 0.10}, {18.5, 2.1, 0.64}, {22.4, 1.7, 0.26}};
  fit.n = 1;
  fit = label_components(fit);
  for (auto _ : state)
    benchmark::DoNotOptimize(crossover_threshold(fit));
}
BENCHMARK(BM_crossover);

void BM_compute_deltas(benchmark::State& state) {
  const auto events = generate_event_log(log_spec(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(extract_deltas(events));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_compute_deltas)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_sessionize(benchmark::State& state) {
  const auto events = generate_event_log(log_spec(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(sessionize(events, 3600));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_sessionize)->Arg(1000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

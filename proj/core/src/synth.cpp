#include "valleyfinder/synth.hpp"

#include "valleyfinder/error.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace valleyfinder {

namespace {

void check_weights(std::span<const MixtureComponent> components) {
  if (components.empty())
    throw usage_error("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components)
    total += c.lambda;
  if (std::abs(total - 1.0) > 1e-9)
    throw usage_error("mixture weights must sum to 1");
}

/// Deviate source shared by sample_mixture and the event generator.
class MixtureSampler {
public:
  MixtureSampler(std::span<const MixtureComponent> components, std::uint64_t seed)
    : components_(components), rng_(seed) {
    double running = 0.0;
    for (const auto& c : components) {
      running += c.lambda;
      cumulative_.push_back(running);
    }
  }

  double operator()() {
    const double u = unit_(rng_) * cumulative_.back();
    std::size_t i = 0;
    while (i + 1 < cumulative_.size() && u >= cumulative_[i])
      ++i;
    const auto& c = components_[i];
    return c.mu + c.sigma * normal_(rng_);
  }

private:
  std::span<const MixtureComponent> components_;
  std::vector<double> cumulative_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t user_seed(std::uint64_t seed, std::int64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// 2^62 s is far beyond any log; deviates past it are redrawn.
constexpr double max_log2_delta = 62.0;

} // namespace

void SynthSpec::validate() const {
  check_weights(components);
  if (n_users < 1)
    throw usage_error("synthetic spec needs at least one user");
  if (start_s < 0)
    throw usage_error("synthetic start time must be non-negative");
  if (const auto* fixed = std::get_if<std::int64_t>(&events_per_user)) {
    if (*fixed < 1)
      throw usage_error("events_per_user must be at least 1");
  } else {
    const auto& range = std::get<EventCountRange>(events_per_user);
    if (range.min < 1 || range.max < range.min)
      throw usage_error("events_per_user range must satisfy 1 <= min <= max");
  }
}

std::vector<double> sample_mixture(std::span<const MixtureComponent> components,
                                   std::int64_t n, std::uint64_t seed) {
  check_weights(components);
  if (n < 1)
    throw usage_error("sample count must be at least 1");
  MixtureSampler draw{components, seed};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    out.push_back(draw());
  return out;
}

std::string synthetic_user_id(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user%06lld", static_cast<long long>(index));
  return buf;
}

std::vector<std::int64_t> draw_user_deltas(const SynthSpec& spec,
                                           std::int64_t index) {
  spec.validate();
  std::mt19937_64 count_rng{user_seed(spec.seed, index)};
  std::int64_t n_events = 0;
  if (const auto* fixed = std::get_if<std::int64_t>(&spec.events_per_user)) {
    n_events = *fixed;
  } else {
    const auto& range = std::get<EventCountRange>(spec.events_per_user);
    n_events = std::uniform_int_distribution<std::int64_t>{range.min, range.max}(count_rng);
  }

  MixtureSampler draw{spec.components, count_rng()};
  std::vector<std::int64_t> deltas;
  deltas.reserve(static_cast<std::size_t>(n_events - 1));
  while (static_cast<std::int64_t>(deltas.size()) < n_events - 1) {
    const double x = draw();
    if (x > max_log2_delta)
      continue;
    const auto delta = static_cast<std::int64_t>(std::llround(std::exp2(x)));
    if (delta < 1)
      continue;
    deltas.push_back(delta);
  }
  return deltas;
}

std::vector<Event> generate_event_log(const SynthSpec& spec) {
  spec.validate();
  std::vector<Event> events;
  for (std::int64_t u = 0; u < spec.n_users; ++u) {
    const auto user = synthetic_user_id(u);
    std::int64_t t = spec.start_s;
    events.emplace_back(user, t);
    for (auto delta : draw_user_deltas(spec, u)) {
      t += delta;
      events.emplace_back(user, t);
    }
  }
  return events;
}

} // namespace valleyfinder

#pragma once

#include "valleyfinder/types.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace valleyfinder {

struct EventCountRange {
  std::int64_t min = 2;
  std::int64_t max = 2;

  friend bool operator==(const EventCountRange&,
                         const EventCountRange&) = default;
};

struct SynthSpec {
  std::vector<MixtureComponent> components;
  std::int64_t n_users = 1;
  /// Fixed count per user, or uniform over an inclusive range.
  std::variant<std::int64_t, EventCountRange> events_per_user =
      std::int64_t{2};
  std::int64_t start_s = 0;
  std::uint64_t seed = 1;

  void validate() const;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

/// Draws n log2 deltas: pick a component by weight, then a normal deviate.
std::vector<double> sample_mixture(std::span<const MixtureComponent> components,
                                   std::int64_t n, std::uint64_t seed);

/// Stable user id for synthetic user `index`.
std::string synthetic_user_id(std::int64_t index);

/// Integer-second gaps for synthetic user `index`, exactly as
/// generate_event_log lays them down.
std::vector<std::int64_t> draw_user_deltas(const SynthSpec& spec,
                                           std::int64_t index);

/// Events for every synthetic user, user by user in time order.
std::vector<Event> generate_event_log(const SynthSpec& spec);

} // namespace valleyfinder

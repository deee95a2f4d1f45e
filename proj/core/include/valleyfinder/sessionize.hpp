#pragma once

#include "valleyfinder/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace valleyfinder {

inline constexpr std::int64_t default_threshold_s = 3600;

/// Splits each user's events wherever the gap exceeds `threshold_s`.
/// A gap equal to the threshold stays in the session. Output is ordered
/// by user id, then start time.
std::vector<Session> sessionize(std::span<const Event> events,
                                std::int64_t threshold_s = default_threshold_s);

struct Aggregate {
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct SessionSummary {
  std::int64_t n_sessions = 0;
  std::int64_t n_users = 0;
  Aggregate events_per_session;
  Aggregate duration_s;
  double single_event_share = 0.0;

  friend bool operator==(const SessionSummary&,
                         const SessionSummary&) = default;
};

SessionSummary session_summary(std::span<const Session> sessions);

} // namespace valleyfinder

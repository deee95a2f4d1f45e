#include "valleyfinder/sessionize.hpp"

#include "valleyfinder/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace valleyfinder {

std::vector<Session> sessionize(std::span<const Event> events,
                                std::int64_t threshold_s) {
  if (threshold_s < 1)
    throw usage_error("session threshold must be at least 1 s");

  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (events[a].user_id != events[b].user_id)
      return events[a].user_id < events[b].user_id;
    return events[a].timestamp_s < events[b].timestamp_s;
  });

  std::vector<Session> sessions;
  std::size_t i = 0;
  while (i < order.size()) {
    const auto& head = events[order[i]];
    std::int64_t end = head.timestamp_s;
    std::int64_t count = 1;
    std::size_t j = i + 1;
    for (; j < order.size(); ++j) {
      const auto& e = events[order[j]];
      if (e.user_id != head.user_id || e.timestamp_s - end > threshold_s)
        break;
      end = e.timestamp_s;
      ++count;
    }
    sessions.emplace_back(head.user_id, head.timestamp_s, end, count);
    i = j;
  }
  return sessions;
}

namespace {

Aggregate aggregate(std::vector<double> values) {
  Aggregate agg;
  if (values.empty())
    return agg;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  agg.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(n);
  agg.median = n % 2 == 1 ? values[n / 2]
                          : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  agg.max = values.back();
  return agg;
}

} // namespace

SessionSummary session_summary(std::span<const Session> sessions) {
  SessionSummary summary;
  if (sessions.empty())
    return summary;
  std::set<std::string_view> users;
  std::vector<double> counts, durations;
  std::int64_t singles = 0;
  for (const auto& s : sessions) {
    users.insert(s.user_id);
    counts.push_back(static_cast<double>(s.n_events));
    durations.push_back(static_cast<double>(s.duration_s));
    if (s.n_events == 1)
      ++singles;
  }
  summary.n_sessions = static_cast<std::int64_t>(sessions.size());
  summary.n_users = static_cast<std::int64_t>(users.size());
  summary.events_per_session = aggregate(std::move(counts));
  summary.duration_s = aggregate(std::move(durations));
  summary.single_event_share =
      static_cast<double>(singles) / static_cast<double>(sessions.size());
  return summary;
}

} // namespace valleyfinder

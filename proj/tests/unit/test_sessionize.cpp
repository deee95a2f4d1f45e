#include <doctest.h>

#include "support.hpp"

#include <valleyfinder/error.hpp>
#include <valleyfinder/sessionize.hpp>

#include <algorithm>
#include <map>
#include <random>

using namespace valleyfinder;

namespace {

std::vector<Event> user_events(const std::string& user, std::vector<std::int64_t> ts) {
  std::vector<Event> events;
  for (auto t : ts)
    events.emplace_back(user, t);
  return events;
}

double naive_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

} // namespace

TEST_CASE("splits on a long gap") {
  const auto sessions = sessionize(user_events("a", {0, 30, 7500, 7530}), 3600);
  REQUIRE(sessions.size() == 2);
  CHECK(sessions[0] == Session("a", 0, 30, 2));
  CHECK(sessions[1] == Session("a", 7500, 7530, 2));
  CHECK(sessions[0].duration_s == 30);
}

TEST_CASE("single event is a zero-length session") {
  const auto sessions = sessionize(user_events("a", {42}), 3600);
  REQUIRE(sessions.size() == 1);
  CHECK(sessions[0] == Session("a", 42, 42, 1));
}

TEST_CASE("gap equal to the threshold stays together") {
  CHECK(sessionize(user_events("a", {0, 3600}), 3600).size() == 1);
  CHECK(sessionize(user_events("a", {0, 3601}), 3600).size() == 2);
}

TEST_CASE("unsorted and interleaved input") {
  auto events = user_events("b", {100, 130});
  for (auto& e : user_events("a", {5000, 0, 10}))
    events.push_back(e);
  const auto sessions = sessionize(events, 60);
  REQUIRE(sessions.size() == 3);
  CHECK(sessions[0] == Session("a", 0, 10, 2));
  CHECK(sessions[1] == Session("a", 5000, 5000, 1));
  CHECK(sessions[2].user_id == "b");
}

TEST_CASE("threshold must be positive") {
  CHECK_THROWS_AS(sessionize(user_events("a", {0}), 0), usage_error);
}

TEST_CASE("summary of a small set") {
  const std::vector<Session> sessions{Session("a", 0, 30, 2), Session("a", 7500, 7530, 2),
                                      Session("b", 0, 0, 1)};
  const auto s = session_summary(sessions);
  CHECK(s.n_sessions == 3);
  CHECK(s.n_users == 2);
  CHECK(s.events_per_session.mean == doctest::Approx(5.0 / 3.0));
  CHECK(s.events_per_session.median == 2.0);
  CHECK(s.events_per_session.max == 2.0);
  CHECK(s.duration_s.mean == 20.0);
  CHECK(s.duration_s.median == 30.0);
  CHECK(s.single_event_share == doctest::Approx(1.0 / 3.0));
  CHECK(session_summary(std::vector<Session>{}).n_sessions == 0);
}

TEST_CASE("summary agrees with a naive computation") {
  std::mt19937_64 rng{21};
  const auto sessions = sessionize(testing::random_event_log(rng, 200, 20), 600);
  REQUIRE(sessions.size() >= 200);
  std::vector<double> counts, durations;
  std::map<std::string, int> users;
  int singles = 0;
  for (const auto& s : sessions) {
    counts.push_back(static_cast<double>(s.n_events));
    durations.push_back(static_cast<double>(s.duration_s));
    users[s.user_id]++;
    singles += s.n_events == 1;
  }
  const auto summary = session_summary(sessions);
  CHECK(summary.n_users == static_cast<std::int64_t>(users.size()));
  CHECK(summary.events_per_session.median == naive_median(counts));
  CHECK(summary.duration_s.median == naive_median(durations));
  CHECK(summary.duration_s.max == *std::max_element(durations.begin(), durations.end()));
  double total = 0;
  for (double d : durations)
    total += d;
  CHECK(summary.duration_s.mean == doctest::Approx(total / durations.size()));
  CHECK(summary.single_event_share == doctest::Approx(double(singles) / sessions.size()));
}

TEST_CASE("session properties on random logs") {
  std::mt19937_64 rng{99};
  for (int trial = 0; trial < 50; ++trial) {
    const auto events = testing::random_event_log(rng, 5, 40);
    const std::int64_t threshold = std::int64_t{1} << (4 + trial % 12);
    const auto sessions = sessionize(events, threshold);

    std::int64_t covered = 0;
    for (const auto& s : sessions)
      covered += s.n_events;
    CHECK(covered == static_cast<std::int64_t>(events.size()));

    for (std::size_t i = 1; i < sessions.size(); ++i)
      if (sessions[i].user_id == sessions[i - 1].user_id)
        CHECK(sessions[i].start_s - sessions[i - 1].end_s > threshold);

    CHECK(sessionize(events, threshold * 2).size() <= sessions.size());
  }
}

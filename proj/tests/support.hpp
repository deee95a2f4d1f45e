#pragma once

#include <valleyfinder/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace valleyfinder::testing {

/// aol search mixture: within (6.7, 2.9, 0.70), between (16.8, 2.2, 0.30).
inline std::vector<MixtureComponent> aol_components() {
  return {{6.7, 2.9, 0.70}, {16.8, 2.2, 0.30}};
}

inline MixtureFit make_fit(std::vector<MixtureComponent> components) {
  MixtureFit fit;
  fit.components = std::move(components);
  fit.n = 1;
  return fit;
}

/// Fresh empty directory under the system temp dir, removed on scope exit.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("valleyfinder-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const {
    return path_;
  }

private:
  std::filesystem::path path_;
};

/// Random event log: `n_users` users with up to `max_events` events each,
/// gaps drawn log-uniformly so both short and long gaps appear.
inline std::vector<Event> random_event_log(std::mt19937_64& rng, int n_users,
                                           int max_events) {
  std::uniform_int_distribution<int> count{1, max_events};
  std::uniform_real_distribution<double> log_gap{0.0, 18.0};
  std::bernoulli_distribution repeat{0.05};
  std::vector<Event> events;
  for (int u = 0; u < n_users; ++u) {
    std::int64_t t = std::uniform_int_distribution<std::int64_t>{0, 1'000'000}(rng);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      events.emplace_back("u" + std::to_string(u), t);
      if (!repeat(rng))
        t += static_cast<std::int64_t>(std::exp2(log_gap(rng)));
    }
  }
  std::shuffle(events.begin(), events.end(), rng);
  return events;
}

} // namespace valleyfinder::testing

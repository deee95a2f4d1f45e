#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace valleyfinder {

/// One timestamped user-initiated action.
struct Event {
  Event(std::string user_id, std::int64_t timestamp_s,
        std::optional<std::string> kind = std::nullopt);

  std::string user_id;
  std::int64_t timestamp_s;
  std::optional<std::string> kind;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Gap between two consecutive events of the same user.
struct InterActivitySample {
  InterActivitySample(std::string user_id, std::int64_t delta_s);

  std::string user_id;
  std::int64_t delta_s;
  double log2_delta;

  friend bool operator==(const InterActivitySample&,
                         const InterActivitySample&) = default;
};

enum class ComponentLabel {
  unlabeled,
  short_within,
  within,
  between,
  break_,
};

std::string_view to_string(ComponentLabel label);
ComponentLabel parse_component_label(std::string_view text);

/// True for labels that model gaps inside a session.
bool is_within_label(ComponentLabel label);

/// One weighted normal component over log2 seconds.
struct MixtureComponent {
  MixtureComponent(double mu, double sigma, double lambda,
                   ComponentLabel label = ComponentLabel::unlabeled);

  double mu;
  double sigma;
  double lambda;
  ComponentLabel label;

  friend bool operator==(const MixtureComponent&,
                         const MixtureComponent&) = default;
};

/// A fitted mixture. Components are kept sorted by mean; `validate_fit`
/// reports any broken invariant.
struct MixtureFit {
  std::vector<MixtureComponent> components;
  double log_likelihood = 0.0;
  std::int64_t n = 0;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;

  std::size_t k() const noexcept {
    return components.size();
  }

  friend bool operator==(const MixtureFit&, const MixtureFit&) = default;
};

/// Returns one human-readable line per violated MixtureFit invariant.
std::vector<std::string> validate_fit(const MixtureFit& fit,
                                      double sigma_floor = 0.0);

/// Orders components by mean, ties by standard deviation.
void sort_components(std::vector<MixtureComponent>& components);

enum class InitStrategy { quantile, random };

std::string_view to_string(InitStrategy strategy);
InitStrategy parse_init_strategy(std::string_view text);

struct FitConfig {
  int k = 2;
  int max_iter = 1000;
  double rel_tol = 1e-8;
  int restarts = 10;
  std::uint64_t seed = 1;
  double sigma_floor = 1e-3;
  InitStrategy init_strategy = InitStrategy::quantile;

  /// Throws usage_error when a field is out of range.
  void validate() const;

  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

struct ThresholdResult {
  double t_log2 = 0.0;
  double threshold_s = 0.0;
  double threshold_min = 0.0;
  std::vector<std::size_t> within_group;
  std::vector<std::size_t> between_group;
  std::pair<double, double> bracket{0.0, 0.0};

  friend bool operator==(const ThresholdResult&,
                         const ThresholdResult&) = default;
};

/// A maximal run of one user's events with no internal gap above the
/// inactivity threshold.
struct Session {
  Session(std::string user_id, std::int64_t start_s, std::int64_t end_s,
          std::int64_t n_events);

  std::string user_id;
  std::int64_t start_s;
  std::int64_t end_s;
  std::int64_t n_events;
  std::int64_t duration_s;

  friend bool operator==(const Session&, const Session&) = default;
};

struct HistogramBin {
  double lo_log2;
  double hi_log2;
  std::int64_t count;
  double density;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

struct Histogram {
  double bin_width_log2 = 0.25;
  std::vector<HistogramBin> bins;
  std::int64_t n_total = 0;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

} // namespace valleyfinder

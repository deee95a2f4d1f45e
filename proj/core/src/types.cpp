#include "valleyfinder/types.hpp"

#include "valleyfinder/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace valleyfinder {

Event::Event(std::string user_id, std::int64_t timestamp_s,
             std::optional<std::string> kind)
  : user_id(std::move(user_id)), timestamp_s(timestamp_s),
    kind(std::move(kind)) {
  if (this->user_id.empty())
    throw data_error("event has an empty user id");
  if (timestamp_s < 0)
    throw data_error("event timestamp is negative: " +
                     std::to_string(timestamp_s));
}

InterActivitySample::InterActivitySample(std::string user_id,
                                         std::int64_t delta_s)
  : user_id(std::move(user_id)), delta_s(delta_s),
    log2_delta(std::log2(static_cast<double>(delta_s))) {
  if (this->user_id.empty())
    throw data_error("sample has an empty user id");
  if (delta_s < 1)
    throw data_error("inter-activity gap must be at least 1 s, got " +
                     std::to_string(delta_s));
}

std::string_view to_string(ComponentLabel label) {
  switch (label) {
    case ComponentLabel::unlabeled:
      return "UNLABELED";
    case ComponentLabel::short_within:
      return "SHORT_WITHIN";
    case ComponentLabel::within:
      return "WITHIN";
    case ComponentLabel::between:
      return "BETWEEN";
    case ComponentLabel::break_:
      return "BREAK";
  }
  return "UNLABELED";
}

ComponentLabel parse_component_label(std::string_view text) {
  for (auto label : {ComponentLabel::unlabeled, ComponentLabel::short_within,
                     ComponentLabel::within, ComponentLabel::between,
                     ComponentLabel::break_})
    if (to_string(label) == text)
      return label;
  throw data_error("unknown component label: " + std::string{text});
}

bool is_within_label(ComponentLabel label) {
  return label == ComponentLabel::short_within ||
         label == ComponentLabel::within;
}

MixtureComponent::MixtureComponent(double mu, double sigma, double lambda,
                                   ComponentLabel label)
  : mu(mu), sigma(sigma), lambda(lambda), label(label) {
  if (!std::isfinite(mu))
    throw numerical_error("component mean is not finite");
  if (!std::isfinite(sigma) || sigma <= 0.0)
    throw numerical_error("component sigma must be positive and finite");
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw numerical_error("component weight must lie in (0, 1]");
}

void sort_components(std::vector<MixtureComponent>& components) {
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) {
                     if (a.mu != b.mu)
                       return a.mu < b.mu;
                     return a.sigma < b.sigma;
                   });
}

std::vector<std::string> validate_fit(const MixtureFit& fit,
                                      double sigma_floor) {
  std::vector<std::string> violations;
  const auto k = fit.components.size();
  if (k < 2 || k > 4)
    violations.push_back("component count " + std::to_string(k) +
                         " outside [2, 4]");
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& c = fit.components[i];
    weight_sum += c.lambda;
    if (!(c.lambda > 0.0 && c.lambda <= 1.0))
      violations.push_back("component " + std::to_string(i) +
                           " weight outside (0, 1]");
    if (!(c.sigma > 0.0) || c.sigma < sigma_floor)
      violations.push_back("component " + std::to_string(i) +
                           " sigma below floor");
    if (i > 0) {
      const auto& prev = fit.components[i - 1];
      const bool ordered =
          prev.mu < c.mu || (prev.mu == c.mu && prev.sigma <= c.sigma);
      if (!ordered)
        violations.push_back("components " + std::to_string(i - 1) + " and " +
                             std::to_string(i) + " not ordered by mean");
    }
  }
  if (k > 0 && std::abs(weight_sum - 1.0) > 1e-9) {
    std::ostringstream out;
    out << "weights sum to " << weight_sum << ", not 1";
    violations.push_back(out.str());
  }
  if (fit.n < 0)
    violations.push_back("negative sample count");
  return violations;
}

std::string_view to_string(InitStrategy strategy) {
  return strategy == InitStrategy::quantile ? "QUANTILE" : "RANDOM";
}

InitStrategy parse_init_strategy(std::string_view text) {
  if (text == "QUANTILE" || text == "quantile")
    return InitStrategy::quantile;
  if (text == "RANDOM" || text == "random")
    return InitStrategy::random;
  throw usage_error("unknown init strategy: " + std::string{text});
}

void FitConfig::validate() const {
  if (k < 2 || k > 4)
    throw usage_error("k must be in [2, 4], got " + std::to_string(k));
  if (max_iter <= 0)
    throw usage_error("max_iter must be positive");
  if (!(rel_tol > 0.0))
    throw usage_error("rel_tol must be positive");
  if (restarts <= 0)
    throw usage_error("restarts must be positive");
  if (!(sigma_floor > 0.0))
    throw usage_error("sigma_floor must be positive");
}

Session::Session(std::string user_id, std::int64_t start_s, std::int64_t end_s,
                 std::int64_t n_events)
  : user_id(std::move(user_id)), start_s(start_s), end_s(end_s),
    n_events(n_events), duration_s(end_s - start_s) {
  if (this->user_id.empty())
    throw data_error("session has an empty user id");
  if (start_s > end_s)
    throw data_error("session starts after it ends");
  if (n_events < 1)
    throw data_error("session needs at least one event");
  if (n_events == 1 && duration_s != 0)
    throw data_error("single-event session must have zero duration");
}

} // namespace valleyfinder

#include "valleyfinder/json.hpp"

#include "valleyfinder/error.hpp"

namespace valleyfinder {

namespace {

template <class T>
T field(const json& j, const char* name) {
  if (!j.is_object())
    throw data_error(std::string{"expected a JSON object holding '"} + name + "'");
  auto it = j.find(name);
  if (it == j.end())
    throw data_error(std::string{"missing field '"} + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw data_error(std::string{"field '"} + name + "': " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* name, T fallback) {
  if (j.is_object() && j.contains(name) && !j.at(name).is_null())
    return field<T>(j, name);
  return fallback;
}

template <class T>
json nullable(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <class T>
std::optional<T> optional_field(const json& j, const char* name) {
  if (!j.contains(name) || j.at(name).is_null())
    return std::nullopt;
  return field<T>(j, name);
}

} // namespace

void to_json(json& j, const MixtureFit& fit) {
  j = json{{"components", fit.components},
           {"log_likelihood", fit.log_likelihood},
           {"n", fit.n},
           {"iterations", fit.iterations},
           {"converged", fit.converged},
           {"seed", fit.seed}};
}

void from_json(const json& j, MixtureFit& fit) {
  fit.components = field<std::vector<MixtureComponent>>(j, "components");
  fit.log_likelihood = field<double>(j, "log_likelihood");
  fit.n = field<std::int64_t>(j, "n");
  fit.iterations = field<int>(j, "iterations");
  fit.converged = field<bool>(j, "converged");
  fit.seed = field<std::uint64_t>(j, "seed");
}

void to_json(json& j, const FitConfig& config) {
  j = json{{"k", config.k},
           {"max_iter", config.max_iter},
           {"rel_tol", config.rel_tol},
           {"restarts", config.restarts},
           {"seed", config.seed},
           {"sigma_floor", config.sigma_floor},
           {"init_strategy", to_string(config.init_strategy)}};
}

void from_json(const json& j, FitConfig& config) {
  FitConfig defaults;
  config.k = field<int>(j, "k");
  config.max_iter = field_or(j, "max_iter", defaults.max_iter);
  config.rel_tol = field_or(j, "rel_tol", defaults.rel_tol);
  config.restarts = field_or(j, "restarts", defaults.restarts);
  config.seed = field_or(j, "seed", defaults.seed);
  config.sigma_floor = field_or(j, "sigma_floor", defaults.sigma_floor);
  config.init_strategy = parse_init_strategy(
      field_or<std::string>(j, "init_strategy", "QUANTILE"));
  config.validate();
}

void to_json(json& j, const ThresholdResult& result) {
  j = json{{"t_log2", result.t_log2},
           {"threshold_s", result.threshold_s},
           {"threshold_min", result.threshold_min},
           {"within_group", result.within_group},
           {"between_group", result.between_group},
           {"bracket", json::array({result.bracket.first, result.bracket.second})}};
}

void from_json(const json& j, ThresholdResult& result) {
  result.t_log2 = field<double>(j, "t_log2");
  result.threshold_s = field<double>(j, "threshold_s");
  result.threshold_min = field<double>(j, "threshold_min");
  result.within_group = field<std::vector<std::size_t>>(j, "within_group");
  result.between_group = field<std::vector<std::size_t>>(j, "between_group");
  const auto bracket = field<std::vector<double>>(j, "bracket");
  if (bracket.size() != 2)
    throw data_error("bracket must hold two values");
  result.bracket = {bracket[0], bracket[1]};
}

void to_json(json& j, const HistogramBin& bin) {
  j = json{{"lo_log2", bin.lo_log2},
           {"hi_log2", bin.hi_log2},
           {"count", bin.count},
           {"density", bin.density}};
}

void from_json(const json& j, HistogramBin& bin) {
  bin.lo_log2 = field<double>(j, "lo_log2");
  bin.hi_log2 = field<double>(j, "hi_log2");
  bin.count = field<std::int64_t>(j, "count");
  bin.density = field<double>(j, "density");
}

void to_json(json& j, const Histogram& hist) {
  j = json{{"bin_width_log2", hist.bin_width_log2},
           {"n_total", hist.n_total},
           {"bins", hist.bins}};
}

void from_json(const json& j, Histogram& hist) {
  hist.bin_width_log2 = field<double>(j, "bin_width_log2");
  hist.n_total = field<std::int64_t>(j, "n_total");
  hist.bins = field<std::vector<HistogramBin>>(j, "bins");
}

void to_json(json& j, const ColumnMap& columns) {
  j = json{{"user_field", columns.user_field},
           {"timestamp_field", columns.timestamp_field},
           {"timestamp_format", to_string(columns.timestamp_format)},
           {"ip_field", nullable(columns.ip_field)},
           {"user_agent_field", nullable(columns.user_agent_field)},
           {"accept_language_field", nullable(columns.accept_language_field)}};
}

void from_json(const json& j, ColumnMap& columns) {
  columns.user_field = field_or<std::string>(j, "user_field", "");
  columns.timestamp_field = field<std::string>(j, "timestamp_field");
  columns.timestamp_format = parse_timestamp_format(
      field_or<std::string>(j, "timestamp_format", "EPOCH_SECONDS"));
  columns.ip_field = optional_field<std::string>(j, "ip_field");
  columns.user_agent_field = optional_field<std::string>(j, "user_agent_field");
  columns.accept_language_field =
      optional_field<std::string>(j, "accept_language_field");
}

void to_json(json& j, const FilterSpec& spec) {
  j = json{{"min_delta_s", spec.min_delta_s},
           {"exclude_exact_deltas", spec.exclude_exact_deltas},
           {"exclude_users", spec.exclude_users},
           {"max_events_per_user", nullable(spec.max_events_per_user)}};
}

void from_json(const json& j, FilterSpec& spec) {
  if (!j.is_object())
    throw data_error("filter spec must be a JSON object");
  spec.min_delta_s = field_or<std::int64_t>(j, "min_delta_s", 0);
  spec.exclude_exact_deltas = field_or<std::set<std::int64_t>>(
      j, "exclude_exact_deltas", {});
  spec.exclude_users = field_or<std::set<std::string>>(j, "exclude_users", {});
  spec.max_events_per_user =
      optional_field<std::int64_t>(j, "max_events_per_user");
  spec.validate();
}

void to_json(json& j, const SpikeReport& report) {
  j = json{{"delta_s", report.delta_s},
           {"count", report.count},
           {"neighborhood_mean", report.neighborhood_mean},
           {"ratio", report.ratio},
           {"share", report.share},
           {"offending_users", report.offending_users}};
}

void from_json(const json& j, SpikeReport& report) {
  report.delta_s = field<std::int64_t>(j, "delta_s");
  report.count = field<std::int64_t>(j, "count");
  report.neighborhood_mean = field<double>(j, "neighborhood_mean");
  report.ratio = field<double>(j, "ratio");
  report.share = field<double>(j, "share");
  report.offending_users = field<std::vector<std::string>>(j, "offending_users");
}

void to_json(json& j, const ValleyReport& report) {
  j = json{{"found", report.found},
           {"valley_log2", nullable(report.valley_log2)},
           {"valley_minutes", nullable(report.valley_minutes)},
           {"peak_lo_log2", nullable(report.peak_lo_log2)},
           {"peak_hi_log2", nullable(report.peak_hi_log2)},
           {"smoothing_window_bins", report.smoothing_window_bins}};
}

void from_json(const json& j, ValleyReport& report) {
  report.found = field<bool>(j, "found");
  report.valley_log2 = optional_field<double>(j, "valley_log2");
  report.valley_minutes = optional_field<double>(j, "valley_minutes");
  report.peak_lo_log2 = optional_field<double>(j, "peak_lo_log2");
  report.peak_hi_log2 = optional_field<double>(j, "peak_hi_log2");
  report.smoothing_window_bins = field<int>(j, "smoothing_window_bins");
}

void to_json(json& j, const DbiReport& report) {
  j = json{{"index", report.index},
           {"per_cluster_dispersion", report.per_cluster_dispersion},
           {"centroid_distances", report.centroid_distances},
           {"assignment_counts", report.assignment_counts},
           {"empty_clusters", report.empty_clusters}};
}

void from_json(const json& j, DbiReport& report) {
  report.index = field<double>(j, "index");
  report.per_cluster_dispersion =
      field<std::vector<double>>(j, "per_cluster_dispersion");
  report.centroid_distances =
      field<std::vector<std::vector<double>>>(j, "centroid_distances");
  report.assignment_counts =
      field<std::vector<std::int64_t>>(j, "assignment_counts");
  report.empty_clusters = field<std::vector<std::size_t>>(j, "empty_clusters");
}

void to_json(json& j, const Aggregate& agg) {
  j = json{{"mean", agg.mean}, {"median", agg.median}, {"max", agg.max}};
}

void from_json(const json& j, Aggregate& agg) {
  agg.mean = field<double>(j, "mean");
  agg.median = field<double>(j, "median");
  agg.max = field<double>(j, "max");
}

void to_json(json& j, const SessionSummary& summary) {
  j = json{{"n_sessions", summary.n_sessions},
           {"n_users", summary.n_users},
           {"events_per_session", summary.events_per_session},
           {"duration_s", summary.duration_s},
           {"single_event_share", summary.single_event_share}};
}

void from_json(const json& j, SessionSummary& summary) {
  summary.n_sessions = field<std::int64_t>(j, "n_sessions");
  summary.n_users = field<std::int64_t>(j, "n_users");
  summary.events_per_session = field<Aggregate>(j, "events_per_session");
  summary.duration_s = field<Aggregate>(j, "duration_s");
  summary.single_event_share = field<double>(j, "single_event_share");
}

void to_json(json& j, const SynthSpec& spec) {
  j = json{{"components", spec.components},
           {"n_users", spec.n_users},
           {"start_s", spec.start_s},
           {"seed", spec.seed}};
  if (const auto* fixed = std::get_if<std::int64_t>(&spec.events_per_user))
    j["events_per_user"] = *fixed;
  else
    j["events_per_user"] = json{
        {"min", std::get<EventCountRange>(spec.events_per_user).min},
        {"max", std::get<EventCountRange>(spec.events_per_user).max}};
}

void from_json(const json& j, SynthSpec& spec) {
  spec.components = field<std::vector<MixtureComponent>>(j, "components");
  spec.n_users = field<std::int64_t>(j, "n_users");
  spec.start_s = field_or<std::int64_t>(j, "start_s", 0);
  spec.seed = field_or<std::uint64_t>(j, "seed", 1);
  const auto& count = j.contains("events_per_user") ? j.at("events_per_user")
                                                    : json(nullptr);
  if (count.is_number_integer())
    spec.events_per_user = count.get<std::int64_t>();
  else if (count.is_object())
    spec.events_per_user = EventCountRange{field<std::int64_t>(count, "min"),
                                           field<std::int64_t>(count, "max")};
  else
    throw data_error("events_per_user must be an integer or {min, max}");
  spec.validate();
}

std::string dump_line(const json& j) {
  return j.dump();
}

std::string dump_document(const json& j) {
  return j.dump(2) + "\n";
}

} // namespace valleyfinder

namespace nlohmann {

using valleyfinder::data_error;

valleyfinder::Event adl_serializer<valleyfinder::Event>::from_json(const json& j) {
  std::optional<std::string> kind;
  if (j.contains("kind") && !j.at("kind").is_null())
    kind = valleyfinder::field<std::string>(j, "kind");
  return {valleyfinder::field<std::string>(j, "user_id"),
          valleyfinder::field<std::int64_t>(j, "timestamp_s"), std::move(kind)};
}

void adl_serializer<valleyfinder::Event>::to_json(json& j,
                                                  const valleyfinder::Event& e) {
  j = json{{"user_id", e.user_id}, {"timestamp_s", e.timestamp_s}};
  if (e.kind)
    j["kind"] = *e.kind;
}

valleyfinder::InterActivitySample
adl_serializer<valleyfinder::InterActivitySample>::from_json(const json& j) {
  valleyfinder::InterActivitySample s{
      valleyfinder::field<std::string>(j, "user_id"),
      valleyfinder::field<std::int64_t>(j, "delta_s")};
  if (j.contains("log2_delta") &&
      valleyfinder::field<double>(j, "log2_delta") != s.log2_delta)
    throw data_error("log2_delta does not match delta_s");
  return s;
}

void adl_serializer<valleyfinder::InterActivitySample>::to_json(
    json& j, const valleyfinder::InterActivitySample& s) {
  j = json{{"user_id", s.user_id},
           {"delta_s", s.delta_s},
           {"log2_delta", s.log2_delta}};
}

valleyfinder::MixtureComponent
adl_serializer<valleyfinder::MixtureComponent>::from_json(const json& j) {
  return {valleyfinder::field<double>(j, "mu"),
          valleyfinder::field<double>(j, "sigma"),
          valleyfinder::field<double>(j, "lambda"),
          valleyfinder::parse_component_label(
              valleyfinder::field_or<std::string>(j, "label", "UNLABELED"))};
}

void adl_serializer<valleyfinder::MixtureComponent>::to_json(
    json& j, const valleyfinder::MixtureComponent& c) {
  j = json{{"mu", c.mu},
           {"sigma", c.sigma},
           {"lambda", c.lambda},
           {"label", valleyfinder::to_string(c.label)}};
}

valleyfinder::Session adl_serializer<valleyfinder::Session>::from_json(const json& j) {
  valleyfinder::Session s{valleyfinder::field<std::string>(j, "user_id"),
                          valleyfinder::field<std::int64_t>(j, "start_s"),
                          valleyfinder::field<std::int64_t>(j, "end_s"),
                          valleyfinder::field<std::int64_t>(j, "n_events")};
  if (j.contains("duration_s") &&
      valleyfinder::field<std::int64_t>(j, "duration_s") != s.duration_s)
    throw data_error("duration_s does not match end_s - start_s");
  return s;
}

void adl_serializer<valleyfinder::Session>::to_json(
    json& j, const valleyfinder::Session& s) {
  j = json{{"user_id", s.user_id},
           {"start_s", s.start_s},
           {"end_s", s.end_s},
           {"n_events", s.n_events},
           {"duration_s", s.duration_s}};
}

} // namespace nlohmann

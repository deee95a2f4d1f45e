#pragma once

#include "valleyfinder/types.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace valleyfinder {

enum class InputFormat { csv, tsv, jsonl };
enum class TimestampFormat { epoch_seconds, iso8601 };

std::string_view to_string(InputFormat format);
InputFormat parse_input_format(std::string_view text);
std::string_view to_string(TimestampFormat format);
TimestampFormat parse_timestamp_format(std::string_view text);

/// Where to find the user and time of each record. Either `user_field` is
/// set, or users are fingerprinted from `ip_field` + `user_agent_field`
/// (and `accept_language_field` when present).
struct ColumnMap {
  std::string user_field = "user_id";
  std::string timestamp_field = "timestamp";
  TimestampFormat timestamp_format = TimestampFormat::epoch_seconds;
  std::optional<std::string> ip_field;
  std::optional<std::string> user_agent_field;
  std::optional<std::string> accept_language_field;

  bool fingerprinted() const noexcept {
    return user_field.empty();
  }

  /// Throws usage_error unless exactly one identity route is configured.
  void validate() const;

  friend bool operator==(const ColumnMap&, const ColumnMap&) = default;
};

struct ParseResult {
  std::vector<Event> events;
  std::int64_t n_records = 0;
  std::int64_t n_malformed = 0;
  /// 1-based source line numbers of the first malformed records.
  std::vector<std::int64_t> malformed_lines;
};

/// Parses a CSV/TSV (header row required) or JSONL event log. Malformed
/// records are counted and skipped; more than half malformed is an error.
ParseResult parse_events(std::istream& source, InputFormat format,
                         const ColumnMap& columns);

/// Parses epoch seconds, optionally with a fractional part (truncated).
std::optional<std::int64_t> parse_epoch_seconds(std::string_view text);

/// Parses `YYYY-MM-DD[T ]hh:mm:ss[.fff](Z|+hh:mm|-hh:mm|+hhmm|-hhmm)`.
/// The zone designator is mandatory; fractions are truncated.
std::optional<std::int64_t> parse_iso8601(std::string_view text);

/// 32 lowercase hex chars: the first 16 bytes of SHA-256 over
/// ip 0x1F user_agent 0x1F accept_language.
std::string fingerprint(std::string_view ip, std::string_view user_agent,
                        std::string_view accept_language);

struct DeltaExtraction {
  std::vector<InterActivitySample> samples;
  std::int64_t dropped_nonpositive = 0;
};

/// Per-user gaps between consecutive events. Output is ordered by user id,
/// then time. Zero gaps (same-second repeats) are dropped.
DeltaExtraction extract_deltas(std::span<const Event> events);

std::vector<InterActivitySample> compute_deltas(std::span<const Event> events);

struct SpikeReport {
  std::int64_t delta_s = 0;
  std::int64_t count = 0;
  double neighborhood_mean = 0.0;
  double ratio = 0.0;
  double share = 0.0;
  std::vector<std::string> offending_users;

  friend bool operator==(const SpikeReport&, const SpikeReport&) = default;
};

struct SpikeOptions {
  std::int64_t window_s = 60;
  double ratio_min = 10.0;
  double share_min = 0.001;
  std::size_t top_users = 5;
};

/// Exact-valued deltas that occur far more often than their integer
/// neighbours. Sorted by share, descending.
std::vector<SpikeReport> detect_spikes(
    std::span<const InterActivitySample> samples, SpikeOptions options = {});

struct FilterSpec {
  std::int64_t min_delta_s = 0;
  std::set<std::int64_t> exclude_exact_deltas;
  std::set<std::string> exclude_users;
  std::optional<std::int64_t> max_events_per_user;

  void validate() const;

  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

struct FilterOutcome {
  std::vector<InterActivitySample> samples;
  /// Removal counts keyed by rule: min_delta, exclude_delta, exclude_user,
  /// max_events_per_user.
  std::map<std::string, std::int64_t> removed;
};

FilterOutcome apply_filters(std::span<const InterActivitySample> samples,
                            const FilterSpec& spec);

/// log2 deltas of `samples`, in order.
std::vector<double> log2_values(std::span<const InterActivitySample> samples);

} // namespace valleyfinder

#include "valleyfinder/ingest.hpp"

#include "valleyfinder/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace valleyfinder {

std::string_view to_string(InputFormat format) {
  switch (format) {
    case InputFormat::csv:
      return "csv";
    case InputFormat::tsv:
      return "tsv";
    case InputFormat::jsonl:
      return "jsonl";
  }
  return "csv";
}

InputFormat parse_input_format(std::string_view text) {
  if (text == "csv" || text == "CSV")
    return InputFormat::csv;
  if (text == "tsv" || text == "TSV")
    return InputFormat::tsv;
  if (text == "jsonl" || text == "JSONL")
    return InputFormat::jsonl;
  throw usage_error("unknown input format: " + std::string{text});
}

std::string_view to_string(TimestampFormat format) {
  return format == TimestampFormat::epoch_seconds ? "EPOCH_SECONDS" : "ISO8601";
}

TimestampFormat parse_timestamp_format(std::string_view text) {
  if (text == "EPOCH_SECONDS" || text == "epoch")
    return TimestampFormat::epoch_seconds;
  if (text == "ISO8601" || text == "iso8601")
    return TimestampFormat::iso8601;
  throw usage_error("unknown timestamp format: " + std::string{text});
}

void ColumnMap::validate() const {
  const bool has_user = !user_field.empty();
  const bool has_fingerprint = ip_field && !ip_field->empty() &&
                               user_agent_field && !user_agent_field->empty();
  if (has_user == has_fingerprint)
    throw usage_error(
        "column map needs either a user column or ip + user-agent columns, "
        "not both");
  if (timestamp_field.empty())
    throw usage_error("column map needs a timestamp column");
}

namespace {

bool valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    if (c < 0x80)
      extra = 0;
    else if ((c & 0xe0) == 0xc0 && c >= 0xc2)
      extra = 1;
    else if ((c & 0xf0) == 0xe0)
      extra = 2;
    else if ((c & 0xf8) == 0xf0 && c <= 0xf4)
      extra = 3;
    else
      return false;
    if (i + extra >= text.size())
      return false;
    for (std::size_t k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(text[i + k]) & 0xc0) != 0x80)
        return false;
    i += extra + 1;
  }
  return true;
}

/// Splits one delimited line. Double quotes group fields; "" escapes a
/// quote. Returns nullopt for an unterminated quote.
std::optional<std::vector<std::string>> split_fields(std::string_view line,
                                                     char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted)
    return std::nullopt;
  fields.push_back(std::move(current));
  return fields;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text,
                                            TimestampFormat format) {
  return format == TimestampFormat::epoch_seconds ? parse_epoch_seconds(text)
                                                  : parse_iso8601(text);
}

struct RecordFields {
  std::optional<std::string> user;
  std::optional<std::string> ip;
  std::optional<std::string> user_agent;
  std::optional<std::string> accept_language;
  std::optional<std::int64_t> timestamp;
};

std::optional<Event> make_event(const RecordFields& r,
                                const ColumnMap& columns) {
  if (!r.timestamp || *r.timestamp < 0)
    return std::nullopt;
  std::string user;
  if (columns.fingerprinted()) {
    if (!r.ip || r.ip->empty() || !r.user_agent || r.user_agent->empty())
      return std::nullopt;
    user = fingerprint(*r.ip, *r.user_agent,
                       r.accept_language.value_or(std::string{}));
  } else {
    if (!r.user || r.user->empty())
      return std::nullopt;
    user = *r.user;
  }
  return Event{std::move(user), *r.timestamp};
}

class Parser {
public:
  Parser(InputFormat format, const ColumnMap& columns)
    : format_(format), columns_(columns) {
  }

  void consume(std::string_view line, std::int64_t line_no) {
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF"))
      line.remove_prefix(3);
    if (!valid_utf8(line))
      throw data_error("line " + std::to_string(line_no) +
                       ": input is not valid UTF-8");
    if (format_ != InputFormat::jsonl && !header_) {
      read_header(line);
      return;
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos)
      return;
    ++result_.n_records;
    auto event = format_ == InputFormat::jsonl ? parse_json(line)
                                               : parse_delimited(line);
    if (event) {
      result_.events.push_back(std::move(*event));
    } else {
      ++result_.n_malformed;
      if (result_.malformed_lines.size() < 20)
        result_.malformed_lines.push_back(line_no);
    }
  }

  ParseResult finish() && {
    if (result_.n_malformed * 2 > result_.n_records)
      throw data_error(std::to_string(result_.n_malformed) + " of " +
                       std::to_string(result_.n_records) +
                       " records are malformed; check the column mapping");
    return std::move(result_);
  }

private:
  char delimiter() const {
    return format_ == InputFormat::tsv ? '\t' : ',';
  }

  void read_header(std::string_view line) {
    auto names = split_fields(line, delimiter());
    if (!names)
      throw data_error("header row has an unterminated quote");
    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
      auto it = std::find(names->begin(), names->end(), name);
      if (it == names->end())
        throw data_error("column '" + name + "' not found in header");
      return static_cast<std::size_t>(it - names->begin());
    };
    Header h;
    h.width = names->size();
    h.timestamp = *find(columns_.timestamp_field);
    if (columns_.fingerprinted()) {
      h.ip = find(*columns_.ip_field);
      h.user_agent = find(*columns_.user_agent_field);
      if (columns_.accept_language_field)
        h.accept_language = find(*columns_.accept_language_field);
    } else {
      h.user = find(columns_.user_field);
    }
    header_ = h;
  }

  std::optional<Event> parse_delimited(std::string_view line) const {
    auto fields = split_fields(line, delimiter());
    if (!fields || fields->size() != header_->width)
      return std::nullopt;
    RecordFields r;
    auto get = [&](std::optional<std::size_t> idx) -> std::optional<std::string> {
      if (!idx)
        return std::nullopt;
      return (*fields)[*idx];
    };
    r.user = get(header_->user);
    r.ip = get(header_->ip);
    r.user_agent = get(header_->user_agent);
    r.accept_language = get(header_->accept_language);
    r.timestamp = parse_timestamp((*fields)[header_->timestamp],
                                  columns_.timestamp_format);
    return make_event(r, columns_);
  }

  std::optional<Event> parse_json(std::string_view line) const {
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      return std::nullopt;
    auto text = [&](const std::optional<std::string>& key)
        -> std::optional<std::string> {
      if (!key)
        return std::nullopt;
      auto it = doc.find(*key);
      if (it == doc.end())
        return std::nullopt;
      if (it->is_string())
        return it->get<std::string>();
      if (it->is_number_integer())
        return it->dump();
      return std::nullopt;
    };
    RecordFields r;
    if (!columns_.fingerprinted())
      r.user = text(columns_.user_field);
    r.ip = text(columns_.ip_field);
    r.user_agent = text(columns_.user_agent_field);
    r.accept_language = text(columns_.accept_language_field);
    auto ts = doc.find(columns_.timestamp_field);
    if (ts != doc.end()) {
      if (ts->is_string()) {
        r.timestamp = parse_timestamp(ts->get_ref<const std::string&>(),
                                      columns_.timestamp_format);
      } else if (ts->is_number() &&
                 columns_.timestamp_format == TimestampFormat::epoch_seconds) {
        const double value = ts->get<double>();
        if (std::isfinite(value) && value >= 0.0 && value < 9.2e18)
          r.timestamp = ts->is_number_integer()
                            ? ts->get<std::int64_t>()
                            : static_cast<std::int64_t>(std::trunc(value));
      }
    }
    return make_event(r, columns_);
  }

  struct Header {
    std::size_t width = 0;
    std::size_t timestamp = 0;
    std::optional<std::size_t> user;
    std::optional<std::size_t> ip;
    std::optional<std::size_t> user_agent;
    std::optional<std::size_t> accept_language;
  };

  InputFormat format_;
  const ColumnMap& columns_;
  std::optional<Header> header_;
  ParseResult result_;
};

} // namespace

ParseResult parse_events(std::istream& source, InputFormat format,
                         const ColumnMap& columns) {
  columns.validate();
  if (!source)
    throw data_error("event source is not readable");
  Parser parser{format, columns};
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(source, line))
    parser.consume(line, ++line_no);
  if (source.bad())
    throw data_error("read error on event source");
  return std::move(parser).finish();
}

DeltaExtraction extract_deltas(std::span<const Event> events) {
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto& ea = events[a];
                     const auto& eb = events[b];
                     if (ea.user_id != eb.user_id)
                       return ea.user_id < eb.user_id;
                     return ea.timestamp_s < eb.timestamp_s;
                   });
  DeltaExtraction out;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& prev = events[order[i - 1]];
    const auto& cur = events[order[i]];
    if (prev.user_id != cur.user_id)
      continue;
    const auto delta = cur.timestamp_s - prev.timestamp_s;
    if (delta <= 0) {
      ++out.dropped_nonpositive;
      continue;
    }
    out.samples.emplace_back(cur.user_id, delta);
  }
  return out;
}

std::vector<InterActivitySample> compute_deltas(std::span<const Event> events) {
  return extract_deltas(events).samples;
}

std::vector<SpikeReport> detect_spikes(
    std::span<const InterActivitySample> samples, SpikeOptions options) {
  std::map<std::int64_t, std::int64_t> counts;
  for (const auto& s : samples)
    ++counts[s.delta_s];
  const auto n_total = static_cast<double>(samples.size());

  std::vector<SpikeReport> reports;
  for (const auto& [value, count] : counts) {
    const auto lo = std::max<std::int64_t>(1, value - options.window_s);
    const auto hi = value + options.window_s;
    std::int64_t neighbours = 0;
    for (auto it = counts.lower_bound(lo); it != counts.end() && it->first <= hi;
         ++it)
      if (it->first != value)
        neighbours += it->second;
    // Integer deltas in [lo, hi] other than the value itself.
    const auto width = hi - lo;
    if (neighbours == 0 || width <= 0)
      continue;
    const double mean = static_cast<double>(neighbours) /
                        static_cast<double>(width);
    const double ratio = static_cast<double>(count) / mean;
    const double share = static_cast<double>(count) / n_total;
    if (ratio < options.ratio_min || share < options.share_min)
      continue;
    SpikeReport report;
    report.delta_s = value;
    report.count = count;
    report.neighborhood_mean = mean;
    report.ratio = ratio;
    report.share = share;
    reports.push_back(std::move(report));
  }

  if (!reports.empty()) {
    std::unordered_map<std::int64_t, std::map<std::string, std::int64_t>> users;
    for (const auto& r : reports)
      users[r.delta_s];
    for (const auto& s : samples)
      if (auto it = users.find(s.delta_s); it != users.end())
        ++it->second[s.user_id];
    for (auto& r : reports) {
      std::vector<std::pair<std::string, std::int64_t>> ranked(
          users[r.delta_s].begin(), users[r.delta_s].end());
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) {
                         return a.second > b.second;
                       });
      for (std::size_t i = 0; i < ranked.size() && i < options.top_users; ++i)
        r.offending_users.push_back(ranked[i].first);
    }
  }

  std::stable_sort(reports.begin(), reports.end(),
                   [](const auto& a, const auto& b) {
                     return a.share > b.share;
                   });
  return reports;
}

void FilterSpec::validate() const {
  if (min_delta_s < 0)
    throw usage_error("min_delta_s must be non-negative");
  if (max_events_per_user && *max_events_per_user < 1)
    throw usage_error("max_events_per_user must be positive");
}

FilterOutcome apply_filters(std::span<const InterActivitySample> samples,
                            const FilterSpec& spec) {
  spec.validate();
  FilterOutcome out;
  auto& removed = out.removed;
  removed["min_delta"] = 0;
  removed["exclude_delta"] = 0;
  removed["exclude_user"] = 0;
  removed["max_events_per_user"] = 0;

  std::vector<InterActivitySample> kept;
  kept.reserve(samples.size());
  for (const auto& s : samples) {
    if (spec.exclude_users.contains(s.user_id))
      ++removed["exclude_user"];
    else if (s.delta_s < spec.min_delta_s)
      ++removed["min_delta"];
    else if (spec.exclude_exact_deltas.contains(s.delta_s))
      ++removed["exclude_delta"];
    else
      kept.push_back(s);
  }

  if (spec.max_events_per_user) {
    // A user with m remaining gaps contributed at least m + 1 events.
    std::unordered_map<std::string, std::int64_t> per_user;
    for (const auto& s : kept)
      ++per_user[s.user_id];
    std::erase_if(kept, [&](const InterActivitySample& s) {
      if (per_user[s.user_id] + 1 > *spec.max_events_per_user) {
        ++removed["max_events_per_user"];
        return true;
      }
      return false;
    });
  }
  out.samples = std::move(kept);
  return out;
}

std::vector<double> log2_values(std::span<const InterActivitySample> samples) {
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const auto& s : samples)
    xs.push_back(s.log2_delta);
  return xs;
}

} // namespace valleyfinder

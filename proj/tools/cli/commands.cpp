#include "cli/commands.hpp"

#include "cli/files.hpp"

#include <valleyfinder/error.hpp>
#include <valleyfinder/histogram.hpp>
#include <valleyfinder/mixture.hpp>
#include <valleyfinder/sessionize.hpp>
#include <valleyfinder/synth.hpp>
#include <valleyfinder/threshold.hpp>

#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>

namespace valleyfinder::cli {

std::string_view error_code(error_kind kind) {
  switch (kind) {
    case error_kind::usage:
      return "invalid_parameter";
    case error_kind::data:
      return "data_error";
    case error_kind::numerical:
      return "numerical_failure";
  }
  return "error";
}

json error_body(const error& e) {
  return json{{"code", error_code(e.kind())}, {"message", e.what()}};
}

namespace {

/// Re-raises `e` with the same category and a location prefix.
[[noreturn]] void rethrow_with_context(const error& e, const std::string& where) {
  const std::string message = where + ": " + e.what();
  switch (e.kind()) {
    case error_kind::usage:
      throw usage_error(message);
    case error_kind::data:
      throw data_error(message);
    case error_kind::numerical:
      throw numerical_error(message);
  }
  throw data_error(message);
}

ParseResult load_events(const fs::path& path, InputFormat format,
                        const ColumnMap& columns) {
  std::ifstream in{path, std::ios::binary};
  if (!in)
    throw data_error("cannot open " + path.string());
  try {
    return parse_events(in, format, columns);
  } catch (const error& e) {
    rethrow_with_context(e, path.string());
  }
}

void report_malformed(const ParseResult& parsed, const fs::path& path,
                      std::ostream& log) {
  if (parsed.n_malformed == 0)
    return;
  log << "warning: " << path.string() << ": skipped " << parsed.n_malformed
      << " malformed record(s)";
  if (!parsed.malformed_lines.empty())
    log << ", first at line " << parsed.malformed_lines.front();
  log << "\n";
}

} // namespace

json run_deltas(const DeltasRequest& request, std::ostream& log) {
  const auto parsed = load_events(request.input, request.format, request.columns);
  report_malformed(parsed, request.input, log);

  auto extracted = extract_deltas(parsed.events);
  if (extracted.dropped_nonpositive > 0)
    log << "note: dropped " << extracted.dropped_nonpositive
        << " zero-second gap(s) between same-second events\n";
  auto filtered = apply_filters(extracted.samples, request.filters);

  std::vector<SpikeReport> spikes;
  if (!filtered.samples.empty())
    spikes = detect_spikes(filtered.samples, request.spikes);
  for (const auto& spike : spikes)
    log << "warning: spike at exactly " << spike.delta_s << " s ("
        << spike.count << " samples, " << spike.ratio
        << "x its neighbourhood); consider --exclude-delta or excluding users\n";

  json report{{"input", request.input.generic_string()},
              {"n_records", parsed.n_records},
              {"n_malformed", parsed.n_malformed},
              {"malformed_lines", parsed.malformed_lines},
              {"n_events", parsed.events.size()},
              {"dropped_nonpositive", extracted.dropped_nonpositive},
              {"n_samples_raw", extracted.samples.size()},
              {"removed", filtered.removed},
              {"n_samples", filtered.samples.size()},
              {"filters", request.filters}};

  write_jsonl(request.out_dir / "samples.jsonl", filtered.samples);
  write_json(request.out_dir / "spikes.json", json(spikes));
  write_json(request.out_dir / "deltas_report.json", report);
  return report;
}

json fit_entry(std::span<const double> xs, const FitConfig& config) {
  json entry{{"k", config.k}, {"config", config}};
  const auto fit = em_fit(xs, config);
  entry["fit"] = fit;
  entry["bic"] = bic(fit);
  try {
    entry["dbi"] = davies_bouldin(xs, fit);
  } catch (const error& e) {
    entry["dbi"] = nullptr;
    entry["dbi_error"] = error_body(e);
  }
  return entry;
}

json run_fit(const FitRequest& request, std::ostream& log) {
  const auto raw = read_samples(request.samples);
  const auto filtered = apply_filters(raw, request.filters);
  const auto xs = log2_values(filtered.samples);

  json entries = json::array();
  std::exception_ptr first_failure;
  for (const auto& config : request.fits) {
    try {
      auto entry = fit_entry(xs, config);
      if (!entry["fit"]["converged"].get<bool>())
        log << "warning: k=" << config.k << " hit max_iter without converging\n";
      if (entry.contains("dbi_error"))
        log << "warning: k=" << config.k << ": no Davies-Bouldin index: "
            << entry["dbi_error"]["message"].get<std::string>() << "\n";
      else if (!entry["dbi"]["empty_clusters"].empty())
        log << "warning: k=" << config.k
            << ": empty clusters left out of the Davies-Bouldin index\n";
      entries.push_back(std::move(entry));
    } catch (const error& e) {
      log << "error: k=" << config.k << ": " << e.what() << "\n";
      entries.push_back(json{{"k", config.k}, {"config", config}, {"error", error_body(e)}});
      if (!first_failure)
        first_failure = std::current_exception();
    }
  }

  const auto hist = make_histogram(xs, request.bin_width);
  json doc{{"samples", request.samples.generic_string()},
           {"n_samples", xs.size()},
           {"filters", request.filters},
           {"fits", entries}};
  write_json(request.out_dir / "fits.json", doc);
  write_json(request.out_dir / "histogram.json", json(hist));

  bool any_ok = false;
  for (const auto& entry : entries)
    any_ok = any_ok || entry.contains("fit");
  if (!any_ok && first_failure)
    std::rethrow_exception(first_failure);
  return doc;
}

json run_threshold(const ThresholdRequest& request, std::ostream& log) {
  const auto doc = read_json(request.fits);
  std::optional<MixtureFit> chosen;
  try {
    for (const auto& entry : doc.at("fits"))
      if (entry.at("k").get<int>() == request.k && entry.contains("fit"))
        chosen = entry.at("fit").get<MixtureFit>();
  } catch (const json::exception& e) {
    throw data_error(request.fits.string() + ": " + e.what());
  }
  if (!chosen)
    throw data_error(request.fits.string() + ": no successful fit for k=" +
                     std::to_string(request.k));

  const auto result = crossover_threshold(label_components(*chosen));
  write_json(request.out_dir / "threshold.json", json(result));
  if (std::abs(result.threshold_min - 60.0) / 60.0 > 1.0)
    log << "warning: threshold of " << result.threshold_min
        << " min is far from one hour; plot the histogram and inspect the fit "
           "before using it\n";

  json out{{"threshold", result}};
  const auto hist_path = request.histogram.value_or(
      request.fits.parent_path() / "histogram.json");
  if (fs::exists(hist_path)) {
    const auto valley = find_valley(read_json(hist_path).get<Histogram>());
    write_json(request.out_dir / "valley.json", json(valley));
    if (!valley.found)
      log << "warning: no valley between 1 minute and 1 day in the histogram\n";
    out["valley"] = valley;
  } else {
    log << "warning: " << hist_path.string()
        << " not found; skipping valley check\n";
  }
  return out;
}

json run_sessionize(const SessionizeRequest& request, std::ostream& log) {
  const auto parsed = load_events(request.input, request.format, request.columns);
  report_malformed(parsed, request.input, log);
  const auto sessions = sessionize(parsed.events, request.threshold_s);
  const auto summary = session_summary(sessions);
  write_jsonl(request.out_dir / "sessions.jsonl", sessions);
  json doc{{"threshold_s", request.threshold_s}, {"summary", summary}};
  write_json(request.out_dir / "session_summary.json", doc);
  return doc;
}

fs::path events_file_name(InputFormat format) {
  switch (format) {
    case InputFormat::csv:
      return "events.csv";
    case InputFormat::tsv:
      return "events.tsv";
    case InputFormat::jsonl:
      return "events.jsonl";
  }
  return "events.csv";
}

json run_simulate(const SimulateRequest& request, std::ostream&) {
  SynthSpec spec;
  try {
    spec = read_json(request.spec).get<SynthSpec>();
  } catch (const error& e) {
    rethrow_with_context(e, request.spec.string());
  }
  const auto events = generate_event_log(spec);
  const auto path = request.out_dir / events_file_name(request.format);
  write_events(path, events, request.format);
  return json{{"events", path.generic_string()},
              {"n_events", events.size()},
              {"n_users", spec.n_users}};
}

} // namespace valleyfinder::cli

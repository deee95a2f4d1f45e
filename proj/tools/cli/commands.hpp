#pragma once

#include <valleyfinder/error.hpp>
#include <valleyfinder/ingest.hpp>
#include <valleyfinder/json.hpp>
#include <valleyfinder/types.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace valleyfinder::cli {

namespace fs = std::filesystem;

/// Short machine-readable name for an error category.
std::string_view error_code(error_kind kind);

/// {code, message} body shared by CLI reports and the HTTP service.
json error_body(const error& e);

struct DeltasRequest {
  fs::path input;
  InputFormat format = InputFormat::csv;
  ColumnMap columns;
  FilterSpec filters;
  SpikeOptions spikes;
  fs::path out_dir = "out";
};

/// Writes samples.jsonl, spikes.json and deltas_report.json; returns the
/// report.
json run_deltas(const DeltasRequest& request, std::ostream& log);

struct FitRequest {
  fs::path samples;
  std::vector<FitConfig> fits{FitConfig{}};
  FilterSpec filters;
  double bin_width = 0.25;
  fs::path out_dir = "out";
};

/// Fits every requested k and writes fits.json and histogram.json. A k that
/// fails is recorded with its error; the call only throws when every k
/// failed.
json run_fit(const FitRequest& request, std::ostream& log);

/// One fits.json entry: the fit, its BIC and Davies-Bouldin report.
json fit_entry(std::span<const double> xs, const FitConfig& config);

struct ThresholdRequest {
  fs::path fits;
  int k = 2;
  std::optional<fs::path> histogram;
  fs::path out_dir = "out";
};

/// Writes threshold.json and, when a histogram is available, valley.json.
json run_threshold(const ThresholdRequest& request, std::ostream& log);

struct SessionizeRequest {
  fs::path input;
  InputFormat format = InputFormat::csv;
  ColumnMap columns;
  std::int64_t threshold_s = 3600;
  fs::path out_dir = "out";
};

/// Writes sessions.jsonl and session_summary.json.
json run_sessionize(const SessionizeRequest& request, std::ostream& log);

struct SimulateRequest {
  fs::path spec;
  InputFormat format = InputFormat::csv;
  fs::path out_dir = "out";
};

/// Writes events.csv / events.tsv / events.jsonl from a SynthSpec file.
json run_simulate(const SimulateRequest& request, std::ostream& log);

fs::path events_file_name(InputFormat format);

} // namespace valleyfinder::cli

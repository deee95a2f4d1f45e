#pragma once

// JSON encodings of the public types. Parsing is strict: missing or
// mistyped fields raise data_error, and every value passes through the
// validating constructors.

#include "valleyfinder/ingest.hpp"
#include "valleyfinder/sessionize.hpp"
#include "valleyfinder/synth.hpp"
#include "valleyfinder/threshold.hpp"
#include "valleyfinder/types.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace valleyfinder {

using json = nlohmann::json;

void to_json(json& j, const MixtureFit& fit);
void from_json(const json& j, MixtureFit& fit);
void to_json(json& j, const FitConfig& config);
void from_json(const json& j, FitConfig& config);
void to_json(json& j, const ThresholdResult& result);
void from_json(const json& j, ThresholdResult& result);
void to_json(json& j, const HistogramBin& bin);
void from_json(const json& j, HistogramBin& bin);
void to_json(json& j, const Histogram& hist);
void from_json(const json& j, Histogram& hist);
void to_json(json& j, const ColumnMap& columns);
void from_json(const json& j, ColumnMap& columns);
void to_json(json& j, const FilterSpec& spec);
void from_json(const json& j, FilterSpec& spec);
void to_json(json& j, const SpikeReport& report);
void from_json(const json& j, SpikeReport& report);
void to_json(json& j, const ValleyReport& report);
void from_json(const json& j, ValleyReport& report);
void to_json(json& j, const DbiReport& report);
void from_json(const json& j, DbiReport& report);
void to_json(json& j, const Aggregate& agg);
void from_json(const json& j, Aggregate& agg);
void to_json(json& j, const SessionSummary& summary);
void from_json(const json& j, SessionSummary& summary);
void to_json(json& j, const SynthSpec& spec);
void from_json(const json& j, SynthSpec& spec);

/// Compact single-line encoding used for JSONL records and files.
std::string dump_line(const json& j);

/// Indented encoding used for whole-document outputs.
std::string dump_document(const json& j);

} // namespace valleyfinder

namespace nlohmann {

template <>
struct adl_serializer<valleyfinder::Event> {
  static valleyfinder::Event from_json(const json& j);
  static void to_json(json& j, const valleyfinder::Event& event);
};

template <>
struct adl_serializer<valleyfinder::InterActivitySample> {
  static valleyfinder::InterActivitySample from_json(const json& j);
  static void to_json(json& j, const valleyfinder::InterActivitySample& s);
};

template <>
struct adl_serializer<valleyfinder::MixtureComponent> {
  static valleyfinder::MixtureComponent from_json(const json& j);
  static void to_json(json& j, const valleyfinder::MixtureComponent& c);
};

template <>
struct adl_serializer<valleyfinder::Session> {
  static valleyfinder::Session from_json(const json& j);
  static void to_json(json& j, const valleyfinder::Session& session);
};

} // namespace nlohmann

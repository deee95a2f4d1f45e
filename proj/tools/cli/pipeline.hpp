#pragma once

#include <valleyfinder/ingest.hpp>
#include <valleyfinder/json.hpp>
#include <valleyfinder/types.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace valleyfinder::cli {

/// Everything needed to rerun the pipeline end to end. This is also the
/// document the inspector exports when an analyst accepts a fit.
struct PipelineConfig {
  std::filesystem::path input_path;
  InputFormat input_format = InputFormat::csv;
  ColumnMap columns;
  FilterSpec filters;
  std::vector<FitConfig> fits{FitConfig{}};
  std::optional<std::int64_t> threshold_s;
  std::filesystem::path output_dir = "out";
  double bin_width = 0.25;

  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

void to_json(json& j, const PipelineConfig& config);
void from_json(const json& j, PipelineConfig& config);

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

} // namespace valleyfinder::cli

#include "cli/pipeline.hpp"

#include "cli/files.hpp"

#include <valleyfinder/error.hpp>

#include <cmath>

namespace valleyfinder::cli {

void PipelineConfig::validate() const {
  if (input_path.empty())
    throw usage_error("pipeline config needs an input path");
  if (output_dir.empty())
    throw usage_error("pipeline config needs an output directory");
  if (fits.empty())
    throw usage_error("pipeline config needs at least one fit configuration");
  for (const auto& fit : fits)
    fit.validate();
  columns.validate();
  filters.validate();
  if (threshold_s && *threshold_s < 1)
    throw usage_error("threshold_s must be at least 1");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw usage_error("bin_width must be positive");
}

void to_json(json& j, const PipelineConfig& config) {
  j = json{{"input", {{"path", config.input_path.generic_string()},
                      {"format", to_string(config.input_format)},
                      {"columns", config.columns}}},
           {"filters", config.filters},
           {"fits", config.fits},
           {"threshold_s", config.threshold_s ? json(*config.threshold_s)
                                              : json(nullptr)},
           {"output_dir", config.output_dir.generic_string()},
           {"bin_width", config.bin_width}};
}

void from_json(const json& j, PipelineConfig& config) {
  try {
    const auto& input = j.at("input");
    config.input_path = input.at("path").get<std::string>();
    config.input_format =
        parse_input_format(input.value("format", std::string{"csv"}));
    if (input.contains("columns"))
      config.columns = input.at("columns").get<ColumnMap>();
    if (j.contains("filters"))
      config.filters = j.at("filters").get<FilterSpec>();
    if (j.contains("fits"))
      config.fits = j.at("fits").get<std::vector<FitConfig>>();
    config.threshold_s.reset();
    if (j.contains("threshold_s") && !j.at("threshold_s").is_null())
      config.threshold_s = j.at("threshold_s").get<std::int64_t>();
    config.output_dir = j.value("output_dir", std::string{"out"});
    config.bin_width = j.value("bin_width", 0.25);
  } catch (const json::exception& e) {
    throw usage_error(std::string{"pipeline config: "} + e.what());
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  PipelineConfig config = read_json(path).get<PipelineConfig>();
  config.validate();
  return config;
}

} // namespace valleyfinder::cli

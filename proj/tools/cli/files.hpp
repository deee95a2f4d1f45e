#pragma once

#include <valleyfinder/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace valleyfinder::cli {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

/// Writes one compact JSON record per line.
template <class Range>
void write_jsonl(const std::filesystem::path& path, const Range& records) {
  std::string text;
  for (const auto& record : records) {
    text += dump_line(json(record));
    text += '\n';
  }
  write_text(path, text);
}

std::vector<InterActivitySample> read_samples(const std::filesystem::path& path);

/// Writes events as `user_id,timestamp` CSV or as JSONL.
void write_events(const std::filesystem::path& path,
                  const std::vector<Event>& events, InputFormat format);

} // namespace valleyfinder::cli

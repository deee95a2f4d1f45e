#include "cli/files.hpp"

#include <valleyfinder/error.hpp>

#include <fstream>
#include <sstream>

namespace valleyfinder::cli {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in)
    throw data_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out{path, std::ios::binary | std::ios::trunc};
  if (!out)
    throw data_error("cannot write " + path.string());
  out << text;
  if (!out)
    throw data_error("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  auto doc = json::parse(read_text(path), nullptr, false);
  if (doc.is_discarded())
    throw data_error(path.string() + ": not valid JSON");
  return doc;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, dump_document(doc));
}

std::vector<InterActivitySample> read_samples(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in)
    throw data_error("cannot open " + path.string());
  std::vector<InterActivitySample> samples;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto doc = json::parse(line, nullptr, false);
    if (doc.is_discarded())
      throw data_error(path.string() + ":" + std::to_string(line_no) +
                       ": not valid JSON");
    try {
      samples.push_back(doc.get<InterActivitySample>());
    } catch (const error& e) {
      throw data_error(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return samples;
}

void write_events(const std::filesystem::path& path,
                  const std::vector<Event>& events, InputFormat format) {
  std::string text;
  if (format == InputFormat::jsonl) {
    for (const auto& e : events) {
      text += dump_line(json{{"user_id", e.user_id}, {"timestamp", e.timestamp_s}});
      text += '\n';
    }
  } else {
    const char sep = format == InputFormat::tsv ? '\t' : ',';
    text += "user_id";
    text += sep;
    text += "timestamp\n";
    for (const auto& e : events) {
      text += e.user_id;
      text += sep;
      text += std::to_string(e.timestamp_s);
      text += '\n';
    }
  }
  write_text(path, text);
}

} // namespace valleyfinder::cli

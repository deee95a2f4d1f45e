#pragma once

#include <valleyfinder/ingest.hpp>
#include <valleyfinder/json.hpp>

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>

namespace httplib {
class Server;
}

namespace valleyfinder::cli {

/// A fit with the same parameters is already being computed.
struct conflict_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct not_found_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Number of evenly spaced points in every served density curve.
inline constexpr std::size_t curve_points = 512;

/// Per-component and total mixture density on `curve_points` points over
/// [lo, hi].
json curve_samples(const MixtureFit& fit, double lo, double hi);

/// Backend state for the fit inspector: one dataset loaded from
/// `workdir/samples.jsonl`, the analyst's current filters, and completed
/// fits keyed by id.
class InspectorService {
public:
  explicit InspectorService(std::filesystem::path workdir,
                            std::uint64_t default_seed = 1);

  json histogram(std::optional<double> bin_width) const;
  json fit(const json& request);
  json threshold(const std::string& fit_id) const;
  json set_filters(const json& spec);
  json spikes() const;

  const std::filesystem::path& workdir() const noexcept {
    return workdir_;
  }

private:
  std::vector<double> active_values() const;

  std::filesystem::path workdir_;
  std::uint64_t default_seed_;
  std::vector<InterActivitySample> raw_;

  mutable std::shared_mutex state_mutex_;
  FilterSpec filters_;
  std::vector<InterActivitySample> active_;

  mutable std::mutex fits_mutex_;
  std::set<std::string> running_;
  std::map<std::string, json> fits_;
};

/// Registers the /api routes and, when `workdir/ui` exists, static hosting
/// of the inspector bundle.
void register_routes(httplib::Server& server, InspectorService& service);

/// Blocks serving `workdir` on `host:port`.
void serve(const std::string& host, int port, const std::filesystem::path& workdir,
           std::uint64_t default_seed);

} // namespace valleyfinder::cli

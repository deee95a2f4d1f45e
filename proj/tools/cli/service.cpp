#include "cli/service.hpp"

#include "cli/commands.hpp"
#include "cli/files.hpp"

#include <valleyfinder/error.hpp>
#include <valleyfinder/histogram.hpp>
#include <valleyfinder/mixture.hpp>
#include <valleyfinder/normal.hpp>
#include <valleyfinder/threshold.hpp>

#include <httplib.h>

#include <algorithm>
#include <iostream>

namespace valleyfinder::cli {

json curve_samples(const MixtureFit& fit, double lo, double hi) {
  json xs = json::array();
  json total = json::array();
  std::vector<json> per_component(fit.components.size(), json::array());
  for (std::size_t p = 0; p < curve_points; ++p) {
    const double x = lo + (hi - lo) * static_cast<double>(p) /
                              static_cast<double>(curve_points - 1);
    xs.push_back(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < fit.components.size(); ++i) {
      const auto& c = fit.components[i];
      const double d = c.lambda * normal_pdf(x, c.mu, c.sigma);
      per_component[i].push_back(d);
      sum += d;
    }
    total.push_back(sum);
  }
  return json{{"x", xs}, {"components", per_component}, {"total", total}};
}

InspectorService::InspectorService(std::filesystem::path workdir,
                                   std::uint64_t default_seed)
  : workdir_(std::move(workdir)), default_seed_(default_seed),
    raw_(read_samples(workdir_ / "samples.jsonl")), active_(raw_) {
}

std::vector<double> InspectorService::active_values() const {
  std::shared_lock lock{state_mutex_};
  return log2_values(active_);
}

json InspectorService::histogram(std::optional<double> bin_width) const {
  return make_histogram(active_values(), bin_width.value_or(0.25));
}

json InspectorService::fit(const json& request) {
  if (!request.is_object())
    throw usage_error("fit request must be a JSON object");
  FitConfig config;
  try {
    if (!request.contains("k") || !request.at("k").is_number_integer())
      throw usage_error("fit request needs an integer k");
    config.k = request.at("k").get<int>();
    config.seed = request.value("seed", default_seed_);
    config.restarts = request.value("restarts", config.restarts);
    config.max_iter = request.value("max_iter", config.max_iter);
    if (request.contains("init_strategy"))
      config.init_strategy =
          parse_init_strategy(request.at("init_strategy").get<std::string>());
  } catch (const json::exception& e) {
    throw usage_error(std::string{"invalid fit request: "} + e.what());
  }
  config.validate();

  FilterSpec filters;
  std::vector<double> xs;
  if (request.contains("filters") && !request.at("filters").is_null()) {
    try {
      filters = request.at("filters").get<FilterSpec>();
    } catch (const data_error& e) {
      throw usage_error(e.what());
    }
    xs = log2_values(apply_filters(raw_, filters).samples);
  } else {
    std::shared_lock lock{state_mutex_};
    filters = filters_;
    xs = log2_values(active_);
  }

  const json key{{"config", config}, {"filters", filters}};
  const auto fit_id = fingerprint(key.dump(), "fit", "").substr(0, 16);
  {
    std::lock_guard lock{fits_mutex_};
    if (auto it = fits_.find(fit_id); it != fits_.end())
      return it->second;
    if (running_.contains(fit_id))
      throw conflict_error("a fit with these parameters is already running");
    running_.insert(fit_id);
  }

  json response;
  try {
    response = fit_entry(xs, config);
    const auto fit = response.at("fit").get<MixtureFit>();
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    response["fit_id"] = fit_id;
    response["filters"] = filters;
    response["curves"] = curve_samples(fit, *lo, *hi);
    try {
      response["threshold"] = crossover_threshold(fit);
    } catch (const error& e) {
      response["threshold"] = nullptr;
      response["threshold_error"] = error_body(e);
    }
  } catch (...) {
    std::lock_guard lock{fits_mutex_};
    running_.erase(fit_id);
    throw;
  }

  std::lock_guard lock{fits_mutex_};
  running_.erase(fit_id);
  fits_.emplace(fit_id, response);
  return response;
}

json InspectorService::threshold(const std::string& fit_id) const {
  MixtureFit fit;
  {
    std::lock_guard lock{fits_mutex_};
    auto it = fits_.find(fit_id);
    if (it == fits_.end())
      throw not_found_error("unknown fit_id: " + fit_id);
    fit = it->second.at("fit").get<MixtureFit>();
  }
  return crossover_threshold(label_components(fit));
}

json InspectorService::set_filters(const json& spec) {
  FilterSpec filters;
  try {
    filters = spec.get<FilterSpec>();
  } catch (const data_error& e) {
    throw usage_error(e.what());
  }
  auto outcome = apply_filters(raw_, filters);
  std::set<std::string_view> users;
  for (const auto& s : outcome.samples)
    users.insert(s.user_id);
  json summary{{"filters", filters},
               {"n_samples_before", raw_.size()},
               {"n_samples_after", outcome.samples.size()},
               {"n_users", users.size()},
               {"removed", outcome.removed}};
  std::unique_lock lock{state_mutex_};
  filters_ = std::move(filters);
  active_ = std::move(outcome.samples);
  return summary;
}

json InspectorService::spikes() const {
  std::shared_lock lock{state_mutex_};
  if (active_.empty())
    return json::array();
  return detect_spikes(active_);
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send_json(res, status, json{{"code", code}, {"message", message}});
}

template <class Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      send_json(res, 200, handler(req));
    } catch (const conflict_error& e) {
      send_error(res, 409, "conflict", e.what());
    } catch (const not_found_error& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const usage_error& e) {
      send_error(res, 400, "invalid_parameter", e.what());
    } catch (const error& e) {
      send_json(res, 422, error_body(e));
    } catch (const json::exception& e) {
      send_error(res, 400, "invalid_parameter", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded())
    throw usage_error("request body is not valid JSON");
  return body;
}

} // namespace

void register_routes(httplib::Server& server, InspectorService& service) {
  server.Get("/api/histogram", guarded([&](const httplib::Request& req) {
    std::optional<double> width;
    if (req.has_param("bin_width")) {
      const auto text = req.get_param_value("bin_width");
      try {
        std::size_t used = 0;
        width = std::stod(text, &used);
        if (used != text.size())
          throw std::invalid_argument(text);
      } catch (const std::exception&) {
        throw usage_error("bin_width must be a number");
      }
    }
    return service.histogram(width);
  }));
  server.Post("/api/fit", guarded([&](const httplib::Request& req) {
    return service.fit(parse_body(req));
  }));
  server.Get("/api/threshold", guarded([&](const httplib::Request& req) {
    if (!req.has_param("fit_id"))
      throw usage_error("fit_id is required");
    return service.threshold(req.get_param_value("fit_id"));
  }));
  server.Post("/api/filters", guarded([&](const httplib::Request& req) {
    return service.set_filters(parse_body(req));
  }));
  server.Get("/api/spikes", guarded([&](const httplib::Request&) {
    return service.spikes();
  }));

  const auto ui = service.workdir() / "ui";
  if (std::filesystem::is_directory(ui))
    server.set_mount_point("/", ui.string());
}

void serve(const std::string& host, int port, const std::filesystem::path& workdir,
           std::uint64_t default_seed) {
  InspectorService service{workdir, default_seed};
  httplib::Server server;
  register_routes(server, service);
  std::cerr << "serving " << workdir.string() << " on http://" << host << ":"
            << port << "\n";
  if (!server.listen(host, port))
    throw usage_error("cannot listen on " + host + ":" + std::to_string(port));
}

} // namespace valleyfinder::cli

#include <doctest.h>

#include "support.hpp"

#include "cli/files.hpp"
#include "cli/service.hpp"

#include <valleyfinder/synth.hpp>

#include <httplib.h>

#include <thread>

using namespace valleyfinder;

namespace {

class Running {
public:
  explicit Running(const std::filesystem::path& workdir) : service_(workdir, 1) {
    cli::register_routes(server_, service_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread{[this] { server_.listen_after_bind(); }};
    server_.wait_until_ready();
  }
  ~Running() {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c{"127.0.0.1", port_};
    c.set_read_timeout(120, 0);
    return c;
  }

private:
  cli::InspectorService service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

void seed_workdir(const std::filesystem::path& dir) {
  std::vector<InterActivitySample> samples;
  const auto xs = sample_mixture(testing::aol_components(), 10'000, 12);
  for (std::size_t i = 0; i < xs.size(); ++i)
    samples.emplace_back(i % 1000 == 0 ? "bot" : "u" + std::to_string(i % 97),
                         i % 1000 == 0 ? 1080
                                       : std::max<std::int64_t>(1, std::llround(std::exp2(xs[i]))));
  cli::write_jsonl(dir / "samples.jsonl", samples);
}

} // namespace

TEST_CASE("inspector API") {
  testing::TempDir dir{"service"};
  seed_workdir(dir.path());
  Running running{dir.path()};
  auto client = running.client();

  SUBCASE("histogram bins are contiguous") {
    auto res = client.Get("/api/histogram?bin_width=0.5");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["bin_width_log2"] == 0.5);
    const auto& bins = body["bins"];
    REQUIRE(bins.size() > 1);
    for (std::size_t i = 1; i < bins.size(); ++i)
      CHECK(bins[i]["lo_log2"] == bins[i - 1]["hi_log2"]);
    CHECK(client.Get("/api/histogram?bin_width=wide")->status == 400);
  }

  SUBCASE("fit, then threshold by id") {
    auto res = client.Post("/api/fit", R"({"k": 2, "seed": 3, "restarts": 3})",
                           "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["fit"]["converged"] == true);
    CHECK(body["fit"]["components"].size() == 2);
    CHECK(body["curves"]["x"].size() == cli::curve_points);
    CHECK(body["curves"]["total"].size() == cli::curve_points);
    CHECK(body["curves"]["components"].size() == 2);
    CHECK(body["curves"]["components"][0].size() == cli::curve_points);
    const double mu0 = body["fit"]["components"][0]["mu"];
    CHECK(std::abs(mu0 - 6.7) < 0.3);

    const std::string id = body["fit_id"];
    auto threshold = client.Get(("/api/threshold?fit_id=" + id).c_str());
    REQUIRE(threshold->status == 200);
    CHECK(json::parse(threshold->body)["threshold_min"] > 45.0);

    auto again = client.Post("/api/fit", R"({"k": 2, "seed": 3, "restarts": 3})",
                             "application/json");
    CHECK(json::parse(again->body)["fit_id"] == id);
  }

  SUBCASE("invalid requests") {
    auto res = client.Post("/api/fit", R"({"k": 7})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    const auto body = json::parse(res->body);
    CHECK(body["code"] == "invalid_parameter");
    CHECK(body.contains("message"));
    CHECK(client.Post("/api/fit", "{", "application/json")->status == 400);
    CHECK(client.Get("/api/threshold?fit_id=feedface")->status == 404);
    CHECK(client.Get("/api/threshold")->status == 400);
  }

  SUBCASE("filters reshape the active samples") {
    auto spikes = client.Get("/api/spikes");
    REQUIRE(spikes->status == 200);
    auto reports = json::parse(spikes->body);
    REQUIRE(!reports.empty());
    CHECK(reports[0]["delta_s"] == 1080);

    auto res = client.Post("/api/filters", R"({"exclude_users": ["bot"]})", "application/json");
    REQUIRE(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["n_samples_before"] == 10'000);
    CHECK(body["n_samples_after"] == 9'990);
    CHECK(body["removed"]["exclude_user"] == 10);

    reports = json::parse(client.Get("/api/spikes")->body);
    for (const auto& r : reports)
      CHECK(r["delta_s"] != 1080);
    CHECK(client.Post("/api/filters", R"({"min_delta_s": -1})", "application/json")->status ==
          400);
  }
}

TEST_CASE("static bundle is served when present") {
  testing::TempDir dir{"service"};
  seed_workdir(dir.path());
  std::filesystem::create_directories(dir.path() / "ui");
  std::ofstream{dir.path() / "ui" / "index.html"} << "<p>inspector</p>";
  Running running{dir.path()};
  auto res = running.client().Get("/index.html");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == "<p>inspector</p>");
}

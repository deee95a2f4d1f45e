#include "cli/app.hpp"

#include "cli/commands.hpp"
#include "cli/pipeline.hpp"
#include "cli/service.hpp"

#include <valleyfinder/error.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <ostream>

namespace valleyfinder::cli {

namespace {

/// Raw flag values shared by all subcommands.
struct Flags {
  std::string config;
  std::string input;
  std::string format;
  std::string user_col;
  std::string ts_col;
  std::string ts_format;
  std::string ip_col;
  std::string ua_col;
  std::string lang_col;
  std::int64_t min_delta = 0;
  std::vector<std::int64_t> exclude_delta;
  std::vector<std::string> exclude_user;
  std::int64_t max_events = 0;
  std::vector<int> k;
  std::uint64_t seed = 0;
  int restarts = 10;
  std::int64_t threshold_s = 3600;
  double bin_width = 0.25;
  std::string out;
  std::string addr = "127.0.0.1:8080";
  std::string workdir;
  std::string histogram;
};

struct Options {
  CLI::App* sub = nullptr;

  bool given(const std::string& name) const {
    auto* opt = sub->get_option_no_throw(name);
    return opt && opt->count() > 0;
  }
};

void add_config(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Pipeline config JSON (flags override)")
      ->check(CLI::ExistingFile);
}

void add_input(CLI::App* sub, Flags& f, const std::string& help) {
  sub->add_option("--input", f.input, help);
  sub->add_option("--format", f.format, "csv, tsv or jsonl (default: from extension)")
      ->check(CLI::IsMember({"csv", "tsv", "jsonl"}));
}

void add_columns(CLI::App* sub, Flags& f) {
  sub->add_option("--user-col", f.user_col, "User id column (default user_id)");
  sub->add_option("--ts-col", f.ts_col, "Timestamp column (default timestamp)");
  sub->add_option("--ts-format", f.ts_format, "epoch or iso8601")
      ->check(CLI::IsMember({"epoch", "iso8601"}));
  sub->add_option("--ip-col", f.ip_col, "IP column for fingerprinted users");
  sub->add_option("--ua-col", f.ua_col, "User-agent column for fingerprinted users");
  sub->add_option("--lang-col", f.lang_col, "Accept-Language column for fingerprinting");
}

void add_filters(CLI::App* sub, Flags& f) {
  sub->add_option("--min-delta", f.min_delta, "Drop gaps shorter than this many seconds")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--exclude-delta", f.exclude_delta, "Drop gaps of exactly these seconds")
      ->delimiter(',');
  sub->add_option("--exclude-user", f.exclude_user, "Drop these users")->delimiter(',');
  sub->add_option("--max-events", f.max_events, "Drop users with more events than this")
      ->check(CLI::PositiveNumber);
}

void add_fit(CLI::App* sub, Flags& f) {
  sub->add_option("--k", f.k, "Component counts to fit, e.g. 2,3,4")->delimiter(',');
  sub->add_option("--seed", f.seed, "Seed (default: $VALLEYFINDER_SEED or 1)");
  sub->add_option("--restarts", f.restarts, "EM restarts per k")->check(CLI::PositiveNumber);
  sub->add_option("--bin-width", f.bin_width, "Histogram bin width in log2 seconds")
      ->check(CLI::PositiveNumber);
}

void add_out(CLI::App* sub, Flags& f) {
  sub->add_option("--out", f.out, "Output directory (default out)");
}

InputFormat infer_format(const Options& o, const Flags& f, const std::string& path,
                         std::optional<InputFormat> fallback) {
  if (o.given("--format"))
    return parse_input_format(f.format);
  if (fallback)
    return *fallback;
  const auto ext = std::filesystem::path{path}.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson")
    return InputFormat::jsonl;
  if (ext == ".tsv")
    return InputFormat::tsv;
  return InputFormat::csv;
}

ColumnMap columns_from(const Options& o, const Flags& f, ColumnMap base) {
  if (o.given("--ip-col") || o.given("--ua-col")) {
    base.user_field.clear();
    if (o.given("--ip-col"))
      base.ip_field = f.ip_col;
    if (o.given("--ua-col"))
      base.user_agent_field = f.ua_col;
    if (o.given("--lang-col"))
      base.accept_language_field = f.lang_col;
  }
  if (o.given("--user-col")) {
    base.user_field = f.user_col;
    base.ip_field.reset();
    base.user_agent_field.reset();
    base.accept_language_field.reset();
  }
  if (o.given("--ts-col"))
    base.timestamp_field = f.ts_col;
  if (o.given("--ts-format"))
    base.timestamp_format = parse_timestamp_format(f.ts_format);
  base.validate();
  return base;
}

FilterSpec filters_from(const Options& o, const Flags& f, FilterSpec base) {
  if (o.given("--min-delta"))
    base.min_delta_s = f.min_delta;
  if (o.given("--exclude-delta"))
    base.exclude_exact_deltas.insert(f.exclude_delta.begin(), f.exclude_delta.end());
  if (o.given("--exclude-user"))
    base.exclude_users.insert(f.exclude_user.begin(), f.exclude_user.end());
  if (o.given("--max-events"))
    base.max_events_per_user = f.max_events;
  base.validate();
  return base;
}

std::optional<std::uint64_t> env_seed() {
  const char* value = std::getenv("VALLEYFINDER_SEED");
  if (!value || !*value)
    return std::nullopt;
  std::uint64_t seed = 0;
  const std::string_view text{value};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw usage_error("VALLEYFINDER_SEED is not an unsigned integer: " +
                      std::string{text});
  return seed;
}

std::vector<FitConfig> fits_from(const Options& o, const Flags& f,
                                 std::vector<FitConfig> base,
                                 std::vector<int> default_k) {
  FitConfig templ = base.empty() ? FitConfig{} : base.front();
  if (o.given("--k") || base.empty()) {
    const auto& ks = o.given("--k") ? f.k : default_k;
    base.clear();
    for (int k : ks) {
      FitConfig c = templ;
      c.k = k;
      base.push_back(c);
    }
  }
  std::optional<std::uint64_t> seed;
  if (o.given("--seed"))
    seed = f.seed;
  else
    seed = env_seed();
  for (auto& c : base) {
    if (seed)
      c.seed = *seed;
    if (o.given("--restarts"))
      c.restarts = f.restarts;
    c.validate();
  }
  return base;
}

std::optional<PipelineConfig> load_config(const Options& o, const Flags& f) {
  if (!o.given("--config"))
    return std::nullopt;
  return load_pipeline_config(f.config);
}

std::filesystem::path out_dir(const Options& o, const Flags& f,
                              const std::optional<PipelineConfig>& config) {
  if (o.given("--out"))
    return f.out;
  return config ? config->output_dir : std::filesystem::path{"out"};
}

std::string require_input(const Options& o, const Flags& f,
                          const std::optional<std::string>& fallback,
                          const char* what) {
  if (o.given("--input"))
    return f.input;
  if (fallback)
    return *fallback;
  throw usage_error(std::string{"--input is required ("} + what + ")");
}

void print_summary(std::ostream& out, const json& summary) {
  out << summary.dump(2) << "\n";
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Session inactivity thresholds from inter-activity time mixtures",
               "valleyfinder"};
  app.require_subcommand(1);
  Flags f;

  auto* deltas = app.add_subcommand("deltas", "Extract per-user inter-activity samples");
  add_config(deltas, f);
  add_input(deltas, f, "Event log (CSV/TSV with header, or JSONL)");
  add_columns(deltas, f);
  add_filters(deltas, f);
  add_out(deltas, f);

  auto* fit = app.add_subcommand("fit", "Fit Gaussian mixtures to log2 samples");
  add_config(fit, f);
  fit->add_option("--input", f.input, "samples.jsonl from `deltas`");
  add_filters(fit, f);
  add_fit(fit, f);
  add_out(fit, f);

  auto* threshold = app.add_subcommand("threshold", "Derive the crossover threshold");
  add_config(threshold, f);
  threshold->add_option("--input", f.input, "fits.json from `fit`");
  threshold->add_option("--k", f.k, "Which fit to use (default 2)")->expected(1);
  threshold->add_option("--histogram", f.histogram,
                        "histogram.json (default: next to fits.json)");
  add_out(threshold, f);

  auto* sessions = app.add_subcommand("sessionize", "Split events into sessions");
  add_config(sessions, f);
  add_input(sessions, f, "Event log (CSV/TSV with header, or JSONL)");
  add_columns(sessions, f);
  sessions->add_option("--threshold-s", f.threshold_s,
                       "Inactivity threshold in seconds (default 3600)")
      ->check(CLI::PositiveNumber);
  add_out(sessions, f);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic event log");
  simulate->add_option("--input", f.input, "SynthSpec JSON")->required();
  simulate->add_option("--format", f.format, "csv, tsv or jsonl (default csv)")
      ->check(CLI::IsMember({"csv", "tsv", "jsonl"}));
  add_out(simulate, f);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the fit inspector API");
  serve_cmd->add_option("--addr", f.addr, "host:port (default 127.0.0.1:8080)");
  serve_cmd->add_option("--workdir", f.workdir, "Directory holding samples.jsonl");
  serve_cmd->add_option("--seed", f.seed, "Default seed for fits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(error_kind::usage);
  }

  try {
    if (deltas->parsed()) {
      const Options o{deltas};
      const auto config = load_config(o, f);
      DeltasRequest r;
      const auto input = require_input(
          o, f, config ? std::optional{config->input_path.string()} : std::nullopt,
          "event log");
      r.input = input;
      r.format = infer_format(o, f, input,
                              config ? std::optional{config->input_format} : std::nullopt);
      r.columns = columns_from(o, f, config ? config->columns : ColumnMap{});
      r.filters = filters_from(o, f, config ? config->filters : FilterSpec{});
      r.out_dir = out_dir(o, f, config);
      print_summary(out, run_deltas(r, err));
    } else if (fit->parsed()) {
      const Options o{fit};
      const auto config = load_config(o, f);
      FitRequest r;
      r.out_dir = out_dir(o, f, config);
      r.samples = require_input(
          o, f,
          config ? std::optional{(config->output_dir / "samples.jsonl").string()}
                 : std::nullopt,
          "samples.jsonl");
      r.filters = filters_from(o, f, config ? config->filters : FilterSpec{});
      r.fits = fits_from(o, f, config ? config->fits : std::vector<FitConfig>{},
                         {2, 3, 4});
      r.bin_width = o.given("--bin-width") ? f.bin_width
                    : config               ? config->bin_width
                                           : 0.25;
      const auto doc = run_fit(r, err);
      json brief = json::array();
      for (const auto& entry : doc.at("fits")) {
        json line{{"k", entry.at("k")}};
        if (entry.contains("fit")) {
          line["bic"] = entry.at("bic");
          line["converged"] = entry.at("fit").at("converged");
          line["dbi"] = entry.at("dbi").is_null() ? json(nullptr)
                                                  : entry.at("dbi").at("index");
        } else {
          line["error"] = entry.at("error");
        }
        brief.push_back(line);
      }
      print_summary(out, brief);
    } else if (threshold->parsed()) {
      const Options o{threshold};
      const auto config = load_config(o, f);
      ThresholdRequest r;
      r.out_dir = out_dir(o, f, config);
      r.fits = require_input(
          o, f,
          config ? std::optional{(config->output_dir / "fits.json").string()}
                 : std::nullopt,
          "fits.json");
      r.k = o.given("--k") ? f.k.front() : config ? config->fits.front().k : 2;
      if (o.given("--histogram"))
        r.histogram = f.histogram;
      print_summary(out, run_threshold(r, err));
    } else if (sessions->parsed()) {
      const Options o{sessions};
      const auto config = load_config(o, f);
      SessionizeRequest r;
      const auto input = require_input(
          o, f, config ? std::optional{config->input_path.string()} : std::nullopt,
          "event log");
      r.input = input;
      r.format = infer_format(o, f, input,
                              config ? std::optional{config->input_format} : std::nullopt);
      r.columns = columns_from(o, f, config ? config->columns : ColumnMap{});
      r.threshold_s = o.given("--threshold-s")        ? f.threshold_s
                      : config && config->threshold_s ? *config->threshold_s
                                                      : 3600;
      r.out_dir = out_dir(o, f, config);
      print_summary(out, run_sessionize(r, err));
    } else if (simulate->parsed()) {
      const Options o{simulate};
      SimulateRequest r;
      r.spec = f.input;
      r.format = o.given("--format") ? parse_input_format(f.format) : InputFormat::csv;
      r.out_dir = out_dir(o, f, std::nullopt);
      print_summary(out, run_simulate(r, err));
    } else if (serve_cmd->parsed()) {
      const Options o{serve_cmd};
      const auto colon = f.addr.rfind(':');
      if (colon == std::string::npos)
        throw usage_error("--addr must be host:port");
      int port = 0;
      const auto port_text = std::string_view{f.addr}.substr(colon + 1);
      auto [ptr, ec] = std::from_chars(port_text.data(),
                                       port_text.data() + port_text.size(), port);
      if (ec != std::errc{} || ptr != port_text.data() + port_text.size() ||
          port < 0 || port > 65535)
        throw usage_error("invalid port in --addr: " + f.addr);
      const std::uint64_t seed = o.given("--seed") ? f.seed : env_seed().value_or(1);
      serve(f.addr.substr(0, colon), port, o.given("--workdir") ? f.workdir : "out",
            seed);
    }
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(error_kind::data);
  }
  return 0;
}

} // namespace valleyfinder::cli

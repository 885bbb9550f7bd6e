// familiar: serve | run | validate

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "familiar/config.hpp"
#include "familiar/session.hpp"
#include "server.hpp"

using namespace familiar;
using nlohmann::json;

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

void print_errors(const std::vector<ConfigError>& errors) {
  json arr = json::array();
  for (const auto& e : errors) arr.push_back(to_json(e));
  std::cerr << json{{"errors", arr}}.dump(2) << '\n';
}

// Loads and validates; prints errors and returns nullopt on failure.
std::optional<Config> load(const std::string& path) {
  ConfigResult res = load_config_file(path);
  if (!res.ok()) {
    print_errors(res.errors);
    return std::nullopt;
  }
  return std::move(res.config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior-guidance engine and region-teaching simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto flag_check = CLI::IsMember({"on", "off"});

  auto* serve = app.add_subcommand("serve", "Run the session server");
  tools::ServeOptions serve_opts;
  std::string dynamic_viz = "on", visual_programming = "on";
  bool stdio = false;
  serve->add_option("--config", config_path, "Protocol configuration (JSON)")->required();
  serve->add_option("--port", serve_opts.port, "WebSocket port")->default_val(8765);
  serve->add_option("--max-sessions", serve_opts.max_sessions, "Concurrent sessions, one per connection")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  serve->add_option("--dynamic-viz", dynamic_viz, "Stream live status events (on|off)")->check(flag_check);
  serve->add_option("--visual-programming", visual_programming, "Accept define_behavior (on|off)")
      ->check(flag_check);
  serve->add_flag("--stdio", stdio, "Speak NDJSON on stdin/stdout instead of WebSocket");

  auto* run = app.add_subcommand("run", "Replay a scripted session headlessly");
  std::string script_path, out_path, log_path;
  run->add_option("--config", config_path, "Protocol configuration (JSON)")->required();
  run->add_option("--script", script_path, "NDJSON script of {\"tick\":N,\"msg\":{...}}")->required();
  run->add_option("--out", out_path, "Metrics output file")->required();
  run->add_option("--log", log_path, "Write the session log (NDJSON)");
  run->add_option("--dynamic-viz", dynamic_viz, "on|off")->check(flag_check);
  run->add_option("--visual-programming", visual_programming, "on|off")->check(flag_check);

  auto* val = app.add_subcommand("validate", "Validate a configuration file");
  val->add_option("--config", config_path, "Protocol configuration (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  SessionOptions session_opts{dynamic_viz == "on", visual_programming == "on"};

  if (*val) {
    return load(config_path) ? 0 : 1;
  }

  if (*serve) {
    auto config = load(config_path);
    if (!config) return 1;
    serve_opts.session = session_opts;
    return stdio ? tools::serve_stdio(*config, serve_opts) : tools::serve_websocket(*config, serve_opts);
  }

  auto config = load(config_path);
  if (!config) return 1;
  std::string script_text;
  if (!read_file(script_path, script_text)) {
    std::cerr << "cannot read script " << script_path << '\n';
    return 1;
  }
  try {
    const auto script = parse_script(script_text);
    const ReplayResult res = replay(script, *config, session_opts);
    std::ofstream(out_path) << to_json(res.metrics).dump(2) << '\n';
    if (!log_path.empty()) std::ofstream(log_path) << res.log.export_ndjson();
    std::cout << to_json(res.metrics).dump() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

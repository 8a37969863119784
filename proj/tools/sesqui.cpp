#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include "CLI11.hpp"

#include "sesqui/lab.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for interpolating sesqui-harmonic maps into spheres"};
  app.set_version_flag("--version", sesqui::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  for (const char* name : {"solve", "residual", "conserve", "stress", "monotone", "morrey", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config's \"out\")");
    sub->add_option("--seed", seed, "RNG seed (overrides the config's \"seed\")");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    std::ifstream in(config_path);
    sesqui::require(static_cast<bool>(in), sesqui::ErrorCode::IoError, "cannot open config " + config_path);
    sesqui::Json j;
    try {
      j = sesqui::Json::parse(in);
    } catch (const sesqui::Json::parse_error& e) {
      throw sesqui::Error(sesqui::ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
    sesqui::require(j.is_object(), sesqui::ErrorCode::ConfigError, "config: expected a JSON object");
    j["mode"] = mode;
    if (!out_dir.empty()) j["out"] = out_dir;
    if (app.get_subcommands().front()->count("--seed")) j["seed"] = seed;
    const sesqui::Json summary = sesqui::run(sesqui::parse_config(j));
    std::printf("%s\n", summary.dump(2).c_str());
    return 0;
  } catch (const sesqui::Error& e) {
    const sesqui::Json err{{"error", std::string(sesqui::to_string(e.code()))}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 2;
  } catch (const std::exception& e) {
    const sesqui::Json err{{"error", "Internal"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 3;
  }
}

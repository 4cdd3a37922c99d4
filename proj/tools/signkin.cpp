#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "signkin/pipeline.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
};

void add_flags(CLI::App& sub, Flags& flags) {
  sub.add_option("-c,--config", flags.config_path, "key = value config file")->check(CLI::ExistingFile);
  sub.add_option("-o,--out", flags.out_dir, "output directory (default: out)");
  sub.add_option("--set", flags.sets, "override as key=value; repeatable");
  for (const auto& key : signkin::config_keys()) {
    if (key != "out_dir") {
      sub.add_option("--" + key, flags.values[key], "config key '" + key + "'");
    }
  }
}

signkin::RunConfig build_config(const CLI::App& sub, const Flags& flags) {
  signkin::RunConfig config;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    try {
      signkin::load_config(config, in);
    } catch (const signkin::ParseError& e) {
      throw signkin::FileError(e.code(), flags.config_path, e.line(), e.what());
    }
  }
  for (const auto& item : flags.sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw signkin::Error(signkin::Errc::config_error, "--set expects key=value, got '" + item + "'");
    }
    signkin::apply_setting(config, item.substr(0, eq), item.substr(eq + 1));
  }
  for (const auto& [key, value] : flags.values) {
    if (sub.count("--" + key) > 0) {
      signkin::apply_setting(config, key, value);
    }
  }
  if (!flags.out_dir.empty()) {
    config.out_dir = flags.out_dir;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematic analysis of repeated signs"};
  app.require_subcommand(1);

  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> help = {
      {"ingest", "map raw pose landmarks to canonical keypoint files and validate inputs"},
      {"metrics", "per-token kinematic metrics for every joint group"},
      {"reduce", "repeated-mention correlations and vocabulary baseline deltas"},
      {"entrain", "cross-signer embedding similarity"},
      {"spot", "sign spotting retrieval scores"},
      {"synth", "generate a synthetic session with known answers"},
      {"report", "render the correlation grid and retrieval table"},
  };
  for (const auto command : signkin::all_commands()) {
    const std::string name(signkin::command_name(command));
    subs[name] = app.add_subcommand(name, help.at(name));
    add_flags(*subs[name], flags[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (const auto command : signkin::all_commands()) {
    const std::string name(signkin::command_name(command));
    if (!subs[name]->parsed()) {
      continue;
    }
    try {
      const signkin::RunConfig config = build_config(*subs[name], flags[name]);
      for (const auto& path : signkin::run_pipeline(command, config)) {
        std::cout << path.string() << '\n';
      }
      return 0;
    } catch (const std::exception& e) {
      std::cerr << signkin::error_record(e) << '\n';
      return 1;
    }
  }
  return 1;
}

// cdcctl: dataset generation, training, search, derivation, evaluation,
// gradient checking and inference from one `key = value` config.
//
//   cdcctl <command> [--config FILE] [--json] [--<key> VALUE]...

#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "cdcnet/harness/commands.hpp"

int main(int argc, char** argv) {
  using namespace cdcnet;
  CLI::App app{"Central difference convolution networks for face anti-spoofing"};
  app.require_subcommand(1);
  std::string config_path;
  bool json = false;
  std::map<std::string, std::string> overrides;

  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file of key = value lines");
    sub->add_flag("--json", json, "line-delimited JSON reports on stdout");
    for (const auto& key : config_keys()) {
      sub->add_option_function<std::string>(
          "--" + key.name, [&overrides, k = key.name](const std::string& v) { overrides[k] = v; }, key.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    run_command(app.get_subcommands().front()->get_name(), cfg, std::cout, json);
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << error_line(e) << "\n";
    return exit_code(e);
  }
  return 0;
}

#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace eprbsim;
  CLI::App app{"eprbsim: local hidden-variable and threshold-detector simulations of EPR-Bell tests"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> commands;
  for (auto make : {make_disk_demo, make_scan, make_chsh, make_pathology, make_events_gen,
                    make_events_match}) {
    commands.push_back(std::make_unique<Command>(make()));
  }

  CLI::App* events = app.add_subcommand("events", "Time-tagged event files");
  events->require_subcommand(1);
  std::vector<std::pair<CLI::App*, Command*>> bound;
  for (auto& cmd : commands) {
    CLI::App* sub = nullptr;
    if (cmd->name.rfind("events ", 0) == 0) {
      sub = events->add_subcommand(cmd->name.substr(7), cmd->description);
    } else {
      sub = app.add_subcommand(cmd->name, cmd->description);
    }
    cmd->config.register_options(*sub);
    bound.emplace_back(sub, cmd.get());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto& [sub, cmd] : bound) {
    if (!sub->parsed()) continue;
    try {
      cmd->config.resolve();
      const auto files = cmd->run(cmd->config);
      cmd->config.write_manifest(files);
      std::cout << "wrote " << files.size() + 1 << " files to " << cmd->config.out_dir().string()
                << '\n';
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "eprbsim " << cmd->name << ": " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "eprbsim " << cmd->name << ": error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "config.hpp"

namespace eprbsim {

struct Command {
  std::string name;         // as typed, e.g. "scan" or "events gen"
  std::string description;
  RunConfig config;
  /// Runs the command and returns the files it wrote, relative to --out.
  std::function<std::vector<std::string>(RunConfig&)> run;
};

Command make_disk_demo();
Command make_scan();
Command make_chsh();
Command make_pathology();
Command make_events_gen();
Command make_events_match();

}  // namespace eprbsim

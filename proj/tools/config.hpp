// Layered run configuration for eprbsim.
//
// Every knob has a dotted key ("station_a.threshold"), a command-line flag
// and a default. Values resolve in order: default, preset, config file,
// command-line flag. The resolved set is written back out as the run
// manifest, which is itself a valid config file.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "eprb/domain.hpp"

namespace CLI {
class App;
}

namespace eprbsim {

inline constexpr const char* kToolVersion = "1.0.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Knob {
  std::string key;
  std::string flags;  // CLI11 name list, e.g. "--a-threshold,--ta"
  std::string default_value;
  std::string help;
};

using Preset = std::map<std::string, std::string>;

/// Parses "0.5", "pi", "-pi/4", "3pi/8", "3*pi/8", "45deg".
double parse_angle(const std::string& text);

class RunConfig {
 public:
  RunConfig(std::string command, std::vector<Knob> knobs, std::map<std::string, Preset> presets);

  const std::string& command() const { return command_; }

  /// Adds --seed, --out, --config, --preset (when presets exist) and one
  /// option per knob to `app`.
  void register_options(CLI::App& app);

  /// Applies preset, config file and flags. Throws UsageError on unknown
  /// keys, a manifest for another command, or an unknown preset.
  void resolve();

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  eprb::Angle get_angle(const std::string& key) const;
  /// Angle expression in radians without reduction into [0, 2pi).
  double get_radians(const std::string& key) const;
  /// Replaces a value after resolution, e.g. to store an angle in canonical
  /// radians so the manifest replays bit-exactly.
  void set(const std::string& key, std::string value);
  void canonicalize_angle(const std::string& key);
  void canonicalize_radians(const std::string& key);

  std::uint64_t seed() const;
  const std::filesystem::path& out_dir() const { return out_dir_; }

  /// FNV-1a over the resolved configuration text.
  std::uint64_t config_hash() const;

  /// Writes <out>/manifest.txt with the resolved config and output list.
  void write_manifest(const std::vector<std::string>& outputs) const;

 private:
  std::string config_text() const;

  std::string command_;
  std::vector<Knob> knobs_;
  std::map<std::string, Preset> presets_;
  std::map<std::string, std::string> flag_values_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> given_;
  std::string seed_text_ = "1";
  std::string out_text_ = "out";
  std::string config_path_;
  std::string preset_;
  bool seed_given_ = false;
  std::filesystem::path out_dir_;
};

/// key = value lines for summaries.
void write_summary(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace eprbsim

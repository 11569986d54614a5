#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "CLI11.hpp"

namespace eprbsim {
namespace {

std::string section_of(const std::string& key) {
  const auto dot = key.find('.');
  return dot == std::string::npos ? std::string() : key.substr(0, dot);
}

std::string leaf_of(const std::string& key) {
  const auto dot = key.find('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw UsageError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

std::string quoted(const std::string& v) { return "\"" + v + "\""; }

}  // namespace

double parse_angle(const std::string& text) {
  static const std::regex re(
      R"(^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*(\d+\.?\d*|\.\d+))?\s*(deg)?\s*$)");
  static const std::regex signed_pi(R"(^\s*[+-]\s*pi)");
  std::smatch m;
  std::string s = text;
  // Allow "-pi/4" by giving a bare sign in front of pi a unit coefficient.
  if (std::regex_search(s, signed_pi)) s.insert(s.find_first_of("+-") + 1, "1");
  if (!std::regex_match(s, m, re) || (!m[1].matched && !m[2].matched)) {
    throw UsageError("cannot parse angle '" + text + "'");
  }
  if (m[2].matched && m[4].matched) throw UsageError("angle '" + text + "' mixes pi and deg");
  double v = m[1].matched ? std::stod(m[1].str()) : 1.0;
  if (m[2].matched) v *= eprb::kPi;
  if (m[3].matched) {
    const double den = std::stod(m[3].str());
    if (den == 0.0) throw UsageError("angle '" + text + "' divides by zero");
    v /= den;
  }
  if (m[4].matched) v *= eprb::kPi / 180.0;
  return v;
}

RunConfig::RunConfig(std::string command, std::vector<Knob> knobs,
                     std::map<std::string, Preset> presets)
    : command_(std::move(command)), knobs_(std::move(knobs)), presets_(std::move(presets)) {
  for (const auto& k : knobs_) values_[k.key] = k.default_value;
}

void RunConfig::register_options(CLI::App& app) {
  app.add_option("--seed", seed_text_, "Base seed (u64); every random stream derives from it")
      ->capture_default_str()
      ->each([this](const std::string&) { seed_given_ = true; });
  app.add_option("--out", out_text_, "Output directory")->capture_default_str();
  app.add_option("--config", config_path_,
                 "Config file (key = value, [station_a]/[station_b] sections); a run manifest "
                 "replays that run");
  if (!presets_.empty()) {
    std::string names;
    for (const auto& [name, _] : presets_) names += (names.empty() ? "" : "|") + name;
    app.add_option("--preset", preset_, "Calibration preset: " + names);
  }
  for (const auto& k : knobs_) {
    const std::string key = k.key;
    app.add_option(k.flags, flag_values_[key], k.help + " [" + key + "]")
        ->default_str(k.default_value)
        ->each([this, key](const std::string&) { given_[key] = true; });
  }
}

void RunConfig::resolve() {
  std::map<std::string, std::string> from_file;
  std::string file_preset;
  std::string file_seed;
  if (!config_path_.empty()) {
    std::ifstream in(config_path_);
    if (!in) throw UsageError("cannot open config file " + config_path_);
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error& e) {
      throw UsageError(config_path_ + ": " + e.what());
    }
    for (const auto& item : items) {
      if (item.name == "++" || item.name == "--") continue;
      const std::string key = item.fullname();
      std::string value;
      for (std::size_t i = 0; i < item.inputs.size(); ++i) {
        value += (i ? " " : "") + item.inputs[i];
      }
      if (section_of(key) == "outputs" || key == "tool_version") continue;
      if (key == "command") {
        if (value != command_) {
          throw UsageError(config_path_ + " is a manifest for '" + value + "', not '" + command_ +
                           "'");
        }
      } else if (key == "preset") {
        file_preset = value;
      } else if (key == "seed") {
        file_seed = value;
      } else if (values_.count(key) != 0) {
        from_file[key] = value;
      } else {
        throw UsageError(config_path_ + ": unknown key '" + key + "'");
      }
    }
  }

  if (preset_.empty()) preset_ = file_preset;
  if (!preset_.empty()) {
    auto it = presets_.find(preset_);
    if (it == presets_.end()) throw UsageError("unknown preset '" + preset_ + "'");
    for (const auto& [key, value] : it->second) values_.at(key) = value;
  }
  for (const auto& [key, value] : from_file) values_[key] = value;
  for (const auto& [key, given] : given_) {
    if (given) values_[key] = flag_values_[key];
  }
  if (!seed_given_ && !file_seed.empty()) seed_text_ = file_seed;
  seed();  // validate
  out_dir_ = out_text_;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("no knob named " + key);
  return it->second;
}

double RunConfig::get_double(const std::string& key) const { return parse_number(key, get(key)); }

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& text = get(key);
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  // Accept integral values written as 1e5.
  const double d = parse_number(key, text);
  if (d < 0.0 || d > 1.8e19 || std::floor(d) != d) {
    throw UsageError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(d);
}

double RunConfig::get_radians(const std::string& key) const {
  try {
    return parse_angle(get(key));
  } catch (const UsageError& e) {
    throw UsageError(key + ": " + e.what());
  }
}

eprb::Angle RunConfig::get_angle(const std::string& key) const {
  return eprb::Angle::radians(get_radians(key));
}

void RunConfig::set(const std::string& key, std::string value) {
  if (values_.count(key) == 0) throw std::logic_error("no knob named " + key);
  values_[key] = std::move(value);
}

void RunConfig::canonicalize_angle(const std::string& key) {
  set(key, eprb::format_double(get_angle(key).value()));
}

void RunConfig::canonicalize_radians(const std::string& key) {
  set(key, eprb::format_double(get_radians(key)));
}

std::uint64_t RunConfig::seed() const {
  std::uint64_t v = 0;
  const char* end = seed_text_.data() + seed_text_.size();
  auto [ptr, ec] = std::from_chars(seed_text_.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError("--seed: expected a u64");
  return v;
}

std::string RunConfig::config_text() const {
  std::ostringstream os;
  os << "command = " << quoted(command_) << '\n';
  os << "seed = " << seed() << '\n';
  if (!preset_.empty()) os << "preset = " << quoted(preset_) << '\n';
  std::vector<std::string> sections;
  for (const auto& k : knobs_) {
    const std::string sec = section_of(k.key);
    if (sec.empty()) {
      os << k.key << " = " << quoted(values_.at(k.key)) << '\n';
    } else if (std::find(sections.begin(), sections.end(), sec) == sections.end()) {
      sections.push_back(sec);
    }
  }
  for (const auto& sec : sections) {
    os << "\n[" << sec << "]\n";
    for (const auto& k : knobs_) {
      if (section_of(k.key) == sec) {
        os << leaf_of(k.key) << " = " << quoted(values_.at(k.key)) << '\n';
      }
    }
  }
  return os.str();
}

std::uint64_t RunConfig::config_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void RunConfig::write_manifest(const std::vector<std::string>& outputs) const {
  std::filesystem::create_directories(out_dir_);
  const auto path = out_dir_ / "manifest.txt";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config_hash()));
  os << "# eprbsim run manifest; replay with: eprbsim " << command_
     << " --config manifest.txt --out <dir>\n";
  os << "# config_hash = " << hash << '\n';
  os << "tool_version = " << quoted(kToolVersion) << '\n';
  os << config_text();
  os << "\n[outputs]\n";
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    os << "file" << i << " = " << quoted(outputs[i]) << '\n';
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void write_summary(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [k, v] : entries) os << k << " = " << v << '\n';
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace eprbsim

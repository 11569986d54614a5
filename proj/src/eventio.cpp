#include "eprb/eventio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string_view>
#include <unordered_map>

#include "eprb/rng.hpp"

namespace eprb::eventio {
namespace {

constexpr std::string_view kEventHeader = "t_ns,setting,channel";
constexpr std::string_view kTruthHeader = "pair_id,index_a,index_b";

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("line " + std::to_string(line_no) + ": bad field '" + std::string(field) +
                      "'");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void expect_header(std::istream& is, std::string_view header) {
  std::string line;
  if (!std::getline(is, line) || line != header) {
    throw FormatError("line 1: expected header '" + std::string(header) + "'");
  }
}

void check_sorted(const std::vector<EventRecord>& events, const char* side) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].t_ns < events[i - 1].t_ns) {
      throw UnsortedInput(std::string("stream ") + side + " is not sorted by t_ns at record " +
                          std::to_string(i));
    }
  }
}

std::uint64_t absdiff(std::uint64_t x, std::uint64_t y) { return x > y ? x - y : y - x; }

struct Stamped {
  EventRecord record;
  std::uint64_t pair_id;
};

// Sorts by time (stable, so equal stamps keep emission order) and returns the
// position of every pair_id in the sorted stream.
std::unordered_map<std::uint64_t, std::size_t> sort_stream(std::vector<Stamped>& s,
                                                           std::vector<EventRecord>& out) {
  std::stable_sort(s.begin(), s.end(), [](const Stamped& x, const Stamped& y) {
    return x.record.t_ns < y.record.t_ns;
  });
  std::unordered_map<std::uint64_t, std::size_t> where;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(s[i].record);
    where.emplace(s[i].pair_id, i);
  }
  return where;
}

}  // namespace

void write_events(std::ostream& os, const std::vector<EventRecord>& events) {
  os << kEventHeader << '\n';
  for (const auto& e : events) os << e.t_ns << ',' << e.setting << ',' << e.channel << '\n';
}

std::vector<EventRecord> read_events(std::istream& is) {
  expect_header(is, kEventHeader);
  std::vector<EventRecord> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.size() != 3) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 3 fields");
    }
    EventRecord e;
    e.t_ns = parse_field<std::uint64_t>(f[0], line_no);
    e.setting = parse_field<int>(f[1], line_no);
    e.channel = parse_field<int>(f[2], line_no);
    if (e.setting != 0 && e.setting != 1) {
      throw FormatError("line " + std::to_string(line_no) + ": setting must be 0 or 1");
    }
    if (e.channel != 1 && e.channel != -1) {
      throw FormatError("line " + std::to_string(line_no) + ": channel must be 1 or -1");
    }
    out.push_back(e);
  }
  return out;
}

void write_events_file(const std::filesystem::path& path, const std::vector<EventRecord>& events) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_events(os, events);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::vector<EventRecord> read_events_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_events(is);
}

void GeneratorConfig::validate() const {
  if (!(mean_rate > 0.0) || !std::isfinite(mean_rate)) {
    throw std::invalid_argument("mean_rate must be positive");
  }
  if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma)) {
    throw std::invalid_argument("jitter_sigma must be >= 0");
  }
  station_a.validate();
  station_b.validate();
}

GeneratedStreams generate_streams(const GeneratorConfig& cfg, double duration_s,
                                  std::uint64_t seed) {
  cfg.validate();
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");

  Rng rng(derive_seed(seed, 0));
  std::exponential_distribution<double> gap(cfg.mean_rate);
  std::normal_distribution<double> jitter(0.0, cfg.jitter_sigma > 0.0 ? cfg.jitter_sigma : 1.0);
  auto stamp = [&](double t) {
    const double delay = cfg.jitter_sigma > 0.0 ? std::abs(jitter(rng)) : 0.0;
    return static_cast<std::uint64_t>(std::llround((t + delay) * 1e9));
  };

  GeneratedStreams g;
  std::vector<Stamped> a, b;
  std::vector<std::pair<bool, bool>> detected;
  double t = 0.0;
  for (std::uint64_t id = 0;; ++id) {
    t += gap(rng);
    if (t >= duration_s) break;
    const int sa = static_cast<int>(rng() >> 63);
    const int sb = static_cast<int>(rng() >> 63);
    optics::StationConfig ca = cfg.station_a;
    optics::StationConfig cb = cfg.station_b;
    ca.angle = cfg.settings_a[sa];
    cb.angle = cfg.settings_b[sb];
    const optics::PhotonPair pair = optics::emit_pair(cfg.source, rng, id, t);
    const optics::PairOutcome out = optics::measure_pair(pair, ca, cb, rng);
    optics::tally(g.ground_counts[sa][sb], out);
    const bool hit_a = optics::is_single(out.a);
    const bool hit_b = optics::is_single(out.b);
    if (hit_a) a.push_back({{stamp(t), sa, optics::sign_of(out.a)}, id});
    if (hit_b) b.push_back({{stamp(t), sb, optics::sign_of(out.b)}, id});
    detected.emplace_back(hit_a, hit_b);
    ++g.n_pairs;
  }

  const auto where_a = sort_stream(a, g.a);
  const auto where_b = sort_stream(b, g.b);
  for (std::uint64_t id = 0; id < detected.size(); ++id) {
    if (detected[id].first && detected[id].second) {
      g.truth.push_back({id, where_a.at(id), where_b.at(id)});
    }
  }
  return g;
}

void write_truth(std::ostream& os, const std::vector<TruePair>& truth) {
  os << kTruthHeader << '\n';
  for (const auto& p : truth) os << p.pair_id << ',' << p.index_a << ',' << p.index_b << '\n';
}

std::vector<TruePair> read_truth(std::istream& is) {
  expect_header(is, kTruthHeader);
  std::vector<TruePair> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.size() != 3) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 3 fields");
    }
    out.push_back({parse_field<std::uint64_t>(f[0], line_no),
                   parse_field<std::size_t>(f[1], line_no),
                   parse_field<std::size_t>(f[2], line_no)});
  }
  return out;
}

void write_generated(const std::filesystem::path& dir, const GeneratedStreams& streams) {
  std::filesystem::create_directories(dir);
  write_events_file(dir / "events_a.csv", streams.a);
  write_events_file(dir / "events_b.csv", streams.b);
  std::ofstream os(dir / "truth.csv", std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + (dir / "truth.csv").string());
  write_truth(os, streams.truth);
  if (!os) throw std::runtime_error("failed writing " + (dir / "truth.csv").string());
}

MatchResult match_coincidences(const std::vector<EventRecord>& a,
                               const std::vector<EventRecord>& b, std::uint64_t window_ns) {
  check_sorted(a, "A");
  check_sorted(b, "B");
  MatchResult r;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const std::uint64_t ta = a[i].t_ns;
    const std::uint64_t tb = b[j].t_ns;
    if (ta + window_ns < tb) {
      ++i;
      ++r.unmatched_a;
      continue;
    }
    if (tb + window_ns < ta) {
      ++j;
      ++r.unmatched_b;
      continue;
    }
    // Within the window. Give way if the next record on the earlier side is
    // strictly closer to the current record on the later side; only the
    // earlier side's successor can be, so the rule treats A and B alike.
    const std::uint64_t d = absdiff(ta, tb);
    if (i + 1 < a.size() && absdiff(a[i + 1].t_ns, tb) < d) {
      ++i;
      ++r.unmatched_a;
      continue;
    }
    if (j + 1 < b.size() && absdiff(ta, b[j + 1].t_ns) < d) {
      ++j;
      ++r.unmatched_b;
      continue;
    }
    CountTable& t = r.tables[a[i].setting][b[j].setting];
    t.add_coincidence(a[i].channel, b[j].channel);
    ++t.singles_a;
    ++t.singles_b;
    ++t.n_pairs;
    r.pairs.push_back({i, j});
    ++i;
    ++j;
  }
  r.unmatched_a += a.size() - i;
  r.unmatched_b += b.size() - j;
  return r;
}

double RecoveryStats::recovered_fraction() const {
  return true_pairs == 0 ? 1.0 : static_cast<double>(recovered) / static_cast<double>(true_pairs);
}

double RecoveryStats::accidental_fraction(std::size_t matched) const {
  return matched == 0 ? 0.0 : static_cast<double>(accidental) / static_cast<double>(matched);
}

RecoveryStats compare_with_truth(const MatchResult& match, const std::vector<TruePair>& truth) {
  std::unordered_map<std::size_t, std::size_t> partner;
  partner.reserve(truth.size());
  for (const auto& p : truth) partner.emplace(p.index_a, p.index_b);
  RecoveryStats s;
  s.true_pairs = truth.size();
  for (const auto& m : match.pairs) {
    auto it = partner.find(m.index_a);
    if (it != partner.end() && it->second == m.index_b) {
      ++s.recovered;
    } else {
      ++s.accidental;
    }
  }
  return s;
}

}  // namespace eprb::eventio

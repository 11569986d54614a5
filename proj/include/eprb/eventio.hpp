// Time-tagged event streams: per-side detection files in the style of a raw
// experiment dump, and coincidence recovery by window matching.
//
// File format (self-defined): text CSV with header "t_ns,setting,channel",
// one record per line, LF endings, sorted by t_ns ascending. Only single
// clicks are written; misses and doubles leave no record.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eprb/domain.hpp"
#include "eprb/optics.hpp"

namespace eprb::eventio {

struct EventRecord {
  std::uint64_t t_ns = 0;
  int setting = 0;  // 0 or 1
  int channel = +1;
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsortedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_events(std::ostream& os, const std::vector<EventRecord>& events);
/// Throws FormatError (with the line number) on any malformed line.
std::vector<EventRecord> read_events(std::istream& is);

void write_events_file(const std::filesystem::path& path, const std::vector<EventRecord>& events);
std::vector<EventRecord> read_events_file(const std::filesystem::path& path);

struct GeneratorConfig {
  double mean_rate = 1e4;     // pairs per second
  double jitter_sigma = 0.0;  // seconds, per side
  std::array<Angle, 2> settings_a{Angle::radians(0.0), Angle::radians(kPi / 4.0)};
  std::array<Angle, 2> settings_b{Angle::radians(kPi / 8.0), Angle::radians(3.0 * kPi / 8.0)};
  optics::StationConfig station_a;
  optics::StationConfig station_b;
  optics::SourceModel source = optics::IsotropicOrthogonalPairs{};

  void validate() const;
};

/// Record indices (into the sorted A and B streams) of one emitted pair that
/// was detected on both sides.
struct TruePair {
  std::uint64_t pair_id = 0;
  std::size_t index_a = 0;
  std::size_t index_b = 0;
};

struct GeneratedStreams {
  std::vector<EventRecord> a;
  std::vector<EventRecord> b;
  std::vector<TruePair> truth;
  /// Per-setting-pair tables of what the detectors did, before any matching.
  std::array<std::array<CountTable, 2>, 2> ground_counts{};
  std::uint64_t n_pairs = 0;
};

/// Exponential inter-emission gaps at mean_rate over [0, duration); each
/// surviving detection is stamped at emission + |N(0, jitter_sigma)|.
GeneratedStreams generate_streams(const GeneratorConfig& cfg, double duration_s,
                                  std::uint64_t seed);

/// Writes events_a.csv, events_b.csv and truth.csv into dir. Throws
/// std::runtime_error if a file cannot be written.
void write_generated(const std::filesystem::path& dir, const GeneratedStreams& streams);

void write_truth(std::ostream& os, const std::vector<TruePair>& truth);
std::vector<TruePair> read_truth(std::istream& is);

struct MatchedPair {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
};

struct MatchResult {
  /// tables[setting_a][setting_b]
  std::array<std::array<CountTable, 2>, 2> tables{};
  std::vector<MatchedPair> pairs;
  std::size_t unmatched_a = 0;
  std::size_t unmatched_b = 0;
};

/// Greedy nearest-neighbour matching within +-window_ns in one merge pass;
/// each record is used at most once. Throws UnsortedInput if either stream
/// is not sorted by t_ns.
MatchResult match_coincidences(const std::vector<EventRecord>& a,
                               const std::vector<EventRecord>& b, std::uint64_t window_ns);

struct RecoveryStats {
  std::size_t true_pairs = 0;
  std::size_t recovered = 0;   // matched pairs that are ground-truth pairs
  std::size_t accidental = 0;  // matched pairs that are not

  double recovered_fraction() const;
  double accidental_fraction(std::size_t matched) const;
};

RecoveryStats compare_with_truth(const MatchResult& match, const std::vector<TruePair>& truth);

}  // namespace eprb::eventio

// Experiment orchestration on top of the optics kernel: analyzer scans with A
// fixed and B swept, four-setting CHSH runs, and the calibration diagnostics
// (singles asymmetry, coincidence modulation, fixed-basis pathology).
//
// A coincidence is a trial where both stations register a single. Doubles
// and misses never enter the four cells but are always counted.
//
// Every step or sub-experiment draws from its own stream derived from
// (seed, index), so results do not depend on the number of worker threads.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eprb/domain.hpp"
#include "eprb/optics.hpp"

namespace eprb::scan {

/// n evenly spaced angles over [0, pi], both ends included.
std::vector<Angle> default_b_angles(std::size_t n_steps = 33);

struct ScanConfig {
  optics::SourceModel source = optics::IsotropicOrthogonalPairs{};
  optics::StationConfig station_a;
  /// The angle field is replaced by each entry of b_angles.
  optics::StationConfig station_b;
  std::vector<Angle> b_angles = default_b_angles();
  std::uint64_t pairs_per_step = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

struct ScanStep {
  Angle b_angle;
  CountTable counts;
  /// Empty when the step produced no coincidences.
  std::optional<Correlation> correlation;
};

struct ScanResult {
  std::vector<ScanStep> steps;
  std::optional<double> singles_ratio;
  std::optional<double> coincidence_modulation;

  CountTable totals() const;
};

/// Simulates one block of pairs with both analyzers fixed.
CountTable run_block(const optics::SourceModel& source, const optics::StationConfig& a,
                     const optics::StationConfig& b, std::uint64_t pairs, std::uint64_t stream_seed,
                     std::uint64_t first_pair_id = 0);

ScanResult run_scan(const ScanConfig& cfg);

/// Total B singles over total A singles. Throws std::domain_error when A
/// registered no singles.
double singles_asymmetry(const ScanResult& result);

/// (max - min) / mean of per-step coincidence totals. Throws
/// std::domain_error with fewer than two steps or no coincidences at all.
double coincidence_modulation(const ScanResult& result);

/// Probabilities over a uniform polarization for the noiseless model.
struct AnalyticCells {
  double p_pp = 0.0;
  double p_pm = 0.0;
  double p_mp = 0.0;
  double p_mm = 0.0;
  double single_a = 0.0;
  double single_b = 0.0;

  double coincidence() const { return p_pp + p_pm + p_mp + p_mm; }
};

/// Exact interval-overlap integration of the detection arcs, relative angle
/// theta = beta - alpha. Thresholds must lie in [0.5, 1].
AnalyticCells analytic_cells(Angle theta, double t_a, double t_b);

/// E(theta) from analytic_cells. Throws std::invalid_argument for thresholds
/// below 0.5 and NoCoincidences when the arcs never overlap.
double analytic_correlation(Angle theta, double t_a, double t_b);

struct ChshSettings {
  Angle a = Angle::radians(0.0);
  Angle a_prime = Angle::radians(kPi / 4.0);
  Angle b = Angle::radians(kPi / 8.0);
  Angle b_prime = Angle::radians(3.0 * kPi / 8.0);
};

struct ChshTerm {
  Angle a;
  Angle b;
  CountTable counts;
  Correlation correlation;
};

struct ChshReport {
  /// Order: (a,b), (a,b'), (a',b), (a',b').
  std::array<ChshTerm, 4> terms;
  ChshValue value;
  double standard_error = 0.0;
};

/// Four sub-experiments; throws NoCoincidences if any setting has none.
ChshReport run_chsh(const optics::SourceModel& source, const optics::StationConfig& station_a,
                    const optics::StationConfig& station_b, const ChshSettings& settings,
                    std::uint64_t pairs_per_setting, std::uint64_t seed);

/// CHSH combination of four already-measured tables, same term order.
ChshReport chsh_from_tables(const ChshSettings& settings, const std::array<CountTable, 4>& tables);

struct PathologyConfig {
  Angle basis;
  Angle alpha;
  optics::StationConfig station_a;
  optics::StationConfig station_b;
  std::vector<Angle> b_angles = default_b_angles();
  std::uint64_t pairs_per_step = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct PathologyReport {
  double a_single_rate = 0.0;
  double a_double_rate = 0.0;
  double a_miss_rate = 0.0;
  ScanResult fixed_basis;
  ScanResult isotropic;
  /// Largest |match_fixed - match_isotropic| over steps where both exist.
  std::optional<double> max_match_deviation;
};

/// B-scan with a fixed-basis source and A at alpha, compared against the same
/// scan with the isotropic source.
PathologyReport pathology_probe(const PathologyConfig& cfg);

/// Columns: b_angle_rad, n_pp, n_pm, n_mp, n_mm, singles_a, singles_b,
/// doubles_a, doubles_b, misses_a, misses_b, match_prob, E.
void write_scan_csv(std::ostream& os, const ScanResult& result);

}  // namespace eprb::scan

// Local-realist photon-pair kernel: pair sources, Malus's-law two-channel
// analyzers, and threshold detection with optional noise and efficiency
// thinning.
//
// Light is a classical pulse of unit energy. The analyzer splits it into
// cos^2 and sin^2 fractions between its + and - channels, and each channel
// fires when its share (plus noise) reaches the station's threshold.

#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "eprb/domain.hpp"
#include "eprb/rng.hpp"

namespace eprb::optics {

struct IsotropicOrthogonalPairs {};
struct FixedBasisHV {
  Angle basis;
};
using SourceModel = std::variant<IsotropicOrthogonalPairs, FixedBasisHV>;

std::string describe(const SourceModel& model);

struct PhotonPair {
  Angle phi;  // polarization of the photon sent to A
  double emission_time = 0.0;
  std::uint64_t pair_id = 0;

  /// The B photon is orthogonal to the A photon.
  Angle phi_b() const { return phi + Angle::radians(kPi / 2.0); }
};

struct StationConfig {
  Angle angle;
  double threshold = 0.5;
  double noise_sigma = 0.0;
  double efficiency = 1.0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class StationOutcome { Miss, SinglePlus, SingleMinus, Double };

const char* to_string(StationOutcome o);
inline bool is_single(StationOutcome o) {
  return o == StationOutcome::SinglePlus || o == StationOutcome::SingleMinus;
}
/// +1 / -1 for singles; 0 otherwise.
inline int sign_of(StationOutcome o) {
  return o == StationOutcome::SinglePlus ? +1 : o == StationOutcome::SingleMinus ? -1 : 0;
}

struct Intensities {
  double plus = 0.0;
  double minus = 0.0;
};

/// Threshold comparisons absorb this much rounding, so intensities that are
/// equal in exact arithmetic (the pi/4 tie) compare equal.
inline constexpr double kThresholdSlack = 1e-12;

/// Fires iff intensity + noise >= threshold - kThresholdSlack.
bool channel_fires(double intensity, double noise, double threshold);

PhotonPair emit_pair(const SourceModel& model, Rng& rng, std::uint64_t pair_id = 0,
                     double emission_time = 0.0);

/// cos^2 / sin^2 split of a unit pulse; plus + minus == 1 exactly.
Intensities malus_intensities(Angle phi, Angle analyzer);

/// Per-channel Gaussian noise (only drawn when noise_sigma > 0), then
/// Bernoulli thinning of the whole station outcome with probability
/// 1 - efficiency (only drawn when efficiency < 1).
StationOutcome detect(Intensities in, const StationConfig& cfg, Rng& rng);

struct PairOutcome {
  StationOutcome a;
  StationOutcome b;
};

PairOutcome measure_pair(const PhotonPair& pair, const StationConfig& cfg_a,
                         const StationConfig& cfg_b, Rng& rng);

/// Counts one trial: per-side single/double/miss, and a coincidence cell when
/// both sides registered a single.
void tally(CountTable& table, const PairOutcome& outcome);

/// Probability that a station with threshold t in [0.5, 1] and no noise
/// registers a single over a uniformly distributed polarization.
double single_detection_probability(double threshold);

}  // namespace eprb::optics

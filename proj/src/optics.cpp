#include "eprb/optics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace eprb::optics {

std::string describe(const SourceModel& model) {
  if (const auto* hv = std::get_if<FixedBasisHV>(&model)) {
    return "fixed-hv(" + format_double(hv->basis.value()) + ")";
  }
  return "isotropic";
}

void StationConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("station threshold must lie in [0, 1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("station noise_sigma must be finite and >= 0");
  }
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument("station efficiency must lie in (0, 1]");
  }
}

const char* to_string(StationOutcome o) {
  switch (o) {
    case StationOutcome::Miss:
      return "miss";
    case StationOutcome::SinglePlus:
      return "single+";
    case StationOutcome::SingleMinus:
      return "single-";
    case StationOutcome::Double:
      return "double";
  }
  return "?";
}

bool channel_fires(double intensity, double noise, double threshold) {
  return intensity + noise >= threshold - kThresholdSlack;
}

PhotonPair emit_pair(const SourceModel& model, Rng& rng, std::uint64_t pair_id,
                     double emission_time) {
  PhotonPair p;
  p.pair_id = pair_id;
  p.emission_time = emission_time;
  if (const auto* hv = std::get_if<FixedBasisHV>(&model)) {
    const bool rotated = (rng() >> 63) != 0;
    p.phi = rotated ? hv->basis + Angle::radians(kPi / 2.0) : hv->basis;
  } else {
    p.phi = Angle::radians(uniform01(rng) * kTwoPi);
  }
  return p;
}

Intensities malus_intensities(Angle phi, Angle analyzer) {
  const double c = std::cos(phi.value() - analyzer.value());
  const double c2 = c * c;
  // Take the complement of whichever share is >= 1/2: that subtraction is
  // exact, so the two shares always add to exactly 1.
  if (c2 >= 0.5) return {c2, 1.0 - c2};
  const double minus = 1.0 - c2;
  return {1.0 - minus, minus};
}

StationOutcome detect(Intensities in, const StationConfig& cfg, Rng& rng) {
  double noise_plus = 0.0;
  double noise_minus = 0.0;
  if (cfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    noise_plus = noise(rng);
    noise_minus = noise(rng);
  }
  const bool plus = channel_fires(in.plus, noise_plus, cfg.threshold);
  const bool minus = channel_fires(in.minus, noise_minus, cfg.threshold);
  if (cfg.efficiency < 1.0 && uniform01(rng) >= cfg.efficiency) return StationOutcome::Miss;
  if (plus && minus) return StationOutcome::Double;
  if (plus) return StationOutcome::SinglePlus;
  if (minus) return StationOutcome::SingleMinus;
  return StationOutcome::Miss;
}

PairOutcome measure_pair(const PhotonPair& pair, const StationConfig& cfg_a,
                         const StationConfig& cfg_b, Rng& rng) {
  const StationOutcome a = detect(malus_intensities(pair.phi, cfg_a.angle), cfg_a, rng);
  const StationOutcome b = detect(malus_intensities(pair.phi_b(), cfg_b.angle), cfg_b, rng);
  return {a, b};
}

void tally(CountTable& t, const PairOutcome& outcome) {
  auto side = [](StationOutcome o, std::uint64_t& singles, std::uint64_t& doubles,
                 std::uint64_t& misses) {
    if (is_single(o)) {
      ++singles;
    } else if (o == StationOutcome::Double) {
      ++doubles;
    } else {
      ++misses;
    }
  };
  ++t.n_pairs;
  side(outcome.a, t.singles_a, t.doubles_a, t.misses_a);
  side(outcome.b, t.singles_b, t.doubles_b, t.misses_b);
  if (is_single(outcome.a) && is_single(outcome.b)) {
    t.add_coincidence(sign_of(outcome.a), sign_of(outcome.b));
  }
}

double single_detection_probability(double threshold) {
  if (!(threshold >= 0.5 && threshold <= 1.0)) {
    throw std::invalid_argument("single_detection_probability: threshold must lie in [0.5, 1]");
  }
  return 4.0 * std::acos(std::sqrt(threshold)) / kPi;
}

}  // namespace eprb::optics

// Shared value types, closed-form singlet predictions, and the correlation
// statistics used by the disk, optics, scan and event modules.
//
// Outcomes are encoded +1 / -1 everywhere.

#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eprb {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce any finite radian value into [0, 2pi).
double normalize_radians(double radians);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Angle held in canonical form, value() in [0, 2pi).
class Angle {
 public:
  constexpr Angle() = default;
  static Angle radians(double r) { return Angle(normalize_radians(r)); }
  static Angle degrees(double d) { return radians(d * kPi / 180.0); }

  double value() const { return rad_; }

  friend Angle operator+(Angle a, Angle b) { return radians(a.rad_ + b.rad_); }
  friend Angle operator-(Angle a, Angle b) { return radians(a.rad_ - b.rad_); }
  friend bool operator==(Angle a, Angle b) = default;

 private:
  explicit Angle(double r) : rad_(r) {}
  double rad_ = 0.0;
};

enum class SingletKind { Correlated, Anticorrelated };

const char* to_string(SingletKind kind);

/// Probabilities for the outcome pairs (+,+), (+,-), (-,+), (-,-).
struct JointPmf {
  double p_pp = 0.0;
  double p_pm = 0.0;
  double p_mp = 0.0;
  double p_mm = 0.0;

  double total() const { return p_pp + p_pm + p_mp + p_mm; }
  /// Entries non-negative and summing to one within 1e-12.
  bool is_normalized(double tol = 1e-12) const;
  double& cell(int a, int b);
  double cell(int a, int b) const;
};

double total_variation(const JointPmf& p, const JointPmf& q);

struct CountTable {
  std::uint64_t n_pp = 0;
  std::uint64_t n_pm = 0;
  std::uint64_t n_mp = 0;
  std::uint64_t n_mm = 0;
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  std::uint64_t doubles_a = 0;
  std::uint64_t doubles_b = 0;
  std::uint64_t misses_a = 0;
  std::uint64_t misses_b = 0;
  std::uint64_t n_pairs = 0;

  std::uint64_t coincidences() const { return n_pp + n_pm + n_mp + n_mm; }
  /// Add one coincidence with outcomes a, b in {+1, -1}.
  void add_coincidence(int a, int b);
  /// Coincidence cells and per-side bookkeeping are mutually consistent.
  bool is_consistent() const;
  /// Empirical pmf over the four coincidence cells.
  JointPmf empirical_pmf() const;
  /// Same experiment with the roles of A and B exchanged.
  CountTable transposed() const;

  CountTable& operator+=(const CountTable& other);
  friend bool operator==(const CountTable&, const CountTable&) = default;
};

class NoCoincidences : public std::runtime_error {
 public:
  NoCoincidences() : std::runtime_error("no coincidences: correlation is undefined") {}
};

/// P(+,+) predicted by the singlet joint distribution at relative angle theta.
double qm_joint_prediction(Angle theta, SingletKind kind);

/// P(A=+|alpha) P(B=+|beta); singlet marginals are uniform so this is 1/4.
double qm_marginal_prediction(Angle alpha, Angle beta);

struct Correlation {
  double e = 0.0;
  double match_probability = 0.0;
  std::uint64_t coincidences = 0;
  /// Binomial standard error of e, sqrt((1 - e^2) / N).
  double standard_error() const;
};

/// Throws NoCoincidences when all four cells are empty.
Correlation correlation(const CountTable& counts);

struct ChshValue {
  double s = 0.0;
  double abs_s = 0.0;
};

/// S = E(a,b) - E(a,b') + E(a',b) + E(a',b').
ChshValue chsh(double e_ab, double e_abp, double e_apb, double e_apbp);

}  // namespace eprb

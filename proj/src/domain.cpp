#include "eprb/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace eprb {

double normalize_radians(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round back up to exactly 2pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const char* to_string(SingletKind kind) {
  return kind == SingletKind::Correlated ? "correlated" : "anticorrelated";
}

bool JointPmf::is_normalized(double tol) const {
  if (p_pp < 0.0 || p_pm < 0.0 || p_mp < 0.0 || p_mm < 0.0) return false;
  return std::abs(total() - 1.0) <= tol;
}

double& JointPmf::cell(int a, int b) {
  if (a > 0) return b > 0 ? p_pp : p_pm;
  return b > 0 ? p_mp : p_mm;
}

double JointPmf::cell(int a, int b) const {
  return const_cast<JointPmf&>(*this).cell(a, b);
}

double total_variation(const JointPmf& p, const JointPmf& q) {
  return 0.5 * (std::abs(p.p_pp - q.p_pp) + std::abs(p.p_pm - q.p_pm) +
                std::abs(p.p_mp - q.p_mp) + std::abs(p.p_mm - q.p_mm));
}

void CountTable::add_coincidence(int a, int b) {
  if (a > 0) {
    ++(b > 0 ? n_pp : n_pm);
  } else {
    ++(b > 0 ? n_mp : n_mm);
  }
}

bool CountTable::is_consistent() const {
  if (coincidences() > std::min(singles_a, singles_b)) return false;
  return singles_a + doubles_a + misses_a == n_pairs &&
         singles_b + doubles_b + misses_b == n_pairs;
}

JointPmf CountTable::empirical_pmf() const {
  const std::uint64_t n = coincidences();
  if (n == 0) throw NoCoincidences();
  const double inv = 1.0 / static_cast<double>(n);
  return {static_cast<double>(n_pp) * inv, static_cast<double>(n_pm) * inv,
          static_cast<double>(n_mp) * inv, static_cast<double>(n_mm) * inv};
}

CountTable CountTable::transposed() const {
  CountTable t = *this;
  std::swap(t.n_pm, t.n_mp);
  std::swap(t.singles_a, t.singles_b);
  std::swap(t.doubles_a, t.doubles_b);
  std::swap(t.misses_a, t.misses_b);
  return t;
}

CountTable& CountTable::operator+=(const CountTable& o) {
  n_pp += o.n_pp;
  n_pm += o.n_pm;
  n_mp += o.n_mp;
  n_mm += o.n_mm;
  singles_a += o.singles_a;
  singles_b += o.singles_b;
  doubles_a += o.doubles_a;
  doubles_b += o.doubles_b;
  misses_a += o.misses_a;
  misses_b += o.misses_b;
  n_pairs += o.n_pairs;
  return *this;
}

double qm_joint_prediction(Angle theta, SingletKind kind) {
  const double c = std::cos(theta.value());
  const double s = std::sin(theta.value());
  return kind == SingletKind::Correlated ? 0.5 * c * c : 0.5 * s * s;
}

double qm_marginal_prediction(Angle, Angle) { return 0.5 * 0.5; }

double Correlation::standard_error() const {
  if (coincidences == 0) return 0.0;
  return std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(coincidences));
}

Correlation correlation(const CountTable& counts) {
  const std::uint64_t n = counts.coincidences();
  if (n == 0) throw NoCoincidences();
  const double matches = static_cast<double>(counts.n_pp + counts.n_mm);
  const double mismatches = static_cast<double>(counts.n_pm + counts.n_mp);
  Correlation c;
  c.coincidences = n;
  c.e = (matches - mismatches) / static_cast<double>(n);
  c.match_probability = matches / static_cast<double>(n);
  return c;
}

ChshValue chsh(double e_ab, double e_abp, double e_apb, double e_apbp) {
  const double s = e_ab - e_abp + e_apb + e_apbp;
  return {s, std::abs(s)};
}

}  // namespace eprb

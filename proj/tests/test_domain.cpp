#include <cmath>
#include <random>

#include "doctest.h"
#include "eprb/domain.hpp"
#include "eprb/rng.hpp"

using namespace eprb;

namespace {

CountTable cells(std::uint64_t pp, std::uint64_t pm, std::uint64_t mp, std::uint64_t mm) {
  CountTable t;
  t.n_pp = pp;
  t.n_pm = pm;
  t.n_mp = mp;
  t.n_mm = mm;
  t.singles_a = t.singles_b = t.n_pairs = pp + pm + mp + mm;
  return t;
}

}  // namespace

TEST_CASE("normalize_radians lands in [0, 2pi) and is idempotent") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(gen);
    const double n = normalize_radians(x);
    CHECK(n >= 0.0);
    CHECK(n < kTwoPi);
    CHECK(normalize_radians(n) == n);
    CHECK(std::abs(std::remainder(n - x, kTwoPi)) < 1e-12);
  }
  CHECK(normalize_radians(kTwoPi) == 0.0);
  CHECK(normalize_radians(-0.0) == 0.0);
}

TEST_CASE("Angle arithmetic wraps") {
  const Angle a = Angle::radians(3 * kPi / 2);
  const Angle b = Angle::radians(kPi);
  CHECK((a + b).value() == doctest::Approx(kPi / 2));
  CHECK((b - a).value() == doctest::Approx(3 * kPi / 2));
  CHECK(Angle::degrees(90).value() == doctest::Approx(kPi / 2));
}

TEST_CASE("qm_joint_prediction examples") {
  CHECK(qm_joint_prediction(Angle::radians(0), SingletKind::Correlated) == doctest::Approx(0.5));
  CHECK(qm_joint_prediction(Angle::radians(kPi / 2), SingletKind::Correlated) ==
        doctest::Approx(0.0));
  CHECK(qm_joint_prediction(Angle::radians(kPi / 4), SingletKind::Anticorrelated) ==
        doctest::Approx(0.25));
  CHECK(qm_marginal_prediction(Angle::radians(0), Angle::radians(0)) == 0.25);
  CHECK(qm_marginal_prediction(Angle::radians(kPi / 3), Angle::radians(kPi / 7)) == 0.25);
}

TEST_CASE("property: correlated and anticorrelated joints sum to one half") {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 5000; ++i) {
    const Angle th = Angle::radians(uniform01(gen) * kTwoPi);
    CHECK(qm_joint_prediction(th, SingletKind::Correlated) +
              qm_joint_prediction(th, SingletKind::Anticorrelated) ==
          doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("property: joint equals marginal product only where cos^2 = 1/2") {
  std::mt19937_64 gen(13);
  for (int i = 0; i < 5000; ++i) {
    const double th = uniform01(gen) * kTwoPi;
    const double off = std::abs(std::remainder(th - kPi / 4, kPi / 2));
    const double joint = qm_joint_prediction(Angle::radians(th), SingletKind::Correlated);
    const double marg = qm_marginal_prediction(Angle::radians(th), Angle::radians(0));
    if (off > 1e-3) CHECK(std::abs(joint - marg) > 1e-7);
  }
  for (int k = 0; k < 8; ++k) {
    const Angle th = Angle::radians(kPi / 4 + k * kPi / 2);
    CHECK(qm_joint_prediction(th, SingletKind::Correlated) == doctest::Approx(0.25));
    CHECK(qm_joint_prediction(th, SingletKind::Anticorrelated) == doctest::Approx(0.25));
  }
}

TEST_CASE("correlation examples") {
  CHECK(correlation(cells(1, 0, 0, 1)).e == 1.0);
  CHECK(correlation(cells(0, 1, 1, 0)).e == -1.0);
  CHECK(correlation(cells(25, 25, 25, 25)).e == 0.0);
  CHECK(correlation(cells(3, 1, 0, 0)).match_probability == doctest::Approx(0.75));
  CHECK_THROWS_AS(correlation(cells(0, 0, 0, 0)), NoCoincidences);
}

TEST_CASE("property: correlation is scale invariant and bounded") {
  std::mt19937_64 gen(14);
  std::uniform_int_distribution<std::uint64_t> n(0, 1000), k(1, 50);
  for (int i = 0; i < 2000; ++i) {
    const auto pp = n(gen), pm = n(gen), mp = n(gen), mm = n(gen) + 1;
    const auto s = k(gen);
    const double e1 = correlation(cells(pp, pm, mp, mm)).e;
    const double e2 = correlation(cells(pp * s, pm * s, mp * s, mm * s)).e;
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-14));
    CHECK(e1 >= -1.0);
    CHECK(e1 <= 1.0);
  }
}

TEST_CASE("chsh examples") {
  CHECK(chsh(-0.5, 0.5, -0.5, -0.5).abs_s == doctest::Approx(2.0));
  const double r = std::sqrt(2.0) / 2;
  CHECK(chsh(-r, r, -r, -r).abs_s == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(chsh(-1, 1, -1, -1).abs_s == 4.0);
  CHECK(chsh(-1, 1, -1, -1).s == -4.0);
}

TEST_CASE("property: chsh is linear in each argument and bounded by 4") {
  std::mt19937_64 gen(15);
  auto e = [&] { return 2 * uniform01(gen) - 1; };
  for (int i = 0; i < 5000; ++i) {
    double x[4] = {e(), e(), e(), e()};
    const double s = chsh(x[0], x[1], x[2], x[3]).s;
    CHECK(std::abs(s) <= 4.0);
    for (int j = 0; j < 4; ++j) {
      double y[4] = {x[0], x[1], x[2], x[3]};
      const double d = e();
      y[j] += d;
      const double sign = j == 1 ? -1.0 : 1.0;
      CHECK(chsh(y[0], y[1], y[2], y[3]).s == doctest::Approx(s + sign * d).epsilon(1e-12));
    }
  }
}

TEST_CASE("CountTable bookkeeping") {
  CountTable t;
  t.n_pairs = 10;
  t.singles_a = 6;
  t.doubles_a = 1;
  t.misses_a = 3;
  t.singles_b = 5;
  t.misses_b = 5;
  t.add_coincidence(1, -1);
  t.add_coincidence(-1, -1);
  CHECK(t.coincidences() == 2);
  CHECK(t.is_consistent());
  t.misses_b = 4;
  CHECK_FALSE(t.is_consistent());

  const CountTable u = cells(1, 2, 3, 4).transposed();
  CHECK(u.n_pm == 3);
  CHECK(u.n_mp == 2);

  const JointPmf p = cells(1, 1, 1, 1).empirical_pmf();
  CHECK(p.is_normalized());
  CHECK(total_variation(p, JointPmf{0.25, 0.25, 0.25, 0.25}) == 0.0);
  CHECK(total_variation(JointPmf{1, 0, 0, 0}, JointPmf{0, 0, 0, 1}) == 1.0);
}

TEST_CASE("derive_seed streams are distinct and reproducible") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(r);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 gen(16);
  for (int i = 0; i < 1000; ++i) {
    const double x = (uniform01(gen) - 0.5) * 1e6;
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
}

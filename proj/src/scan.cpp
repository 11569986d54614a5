#include "eprb/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "eprb/rng.hpp"

namespace eprb::scan {
namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Length of the intersection of two arcs on a circle of circumference pi.
double arc_overlap(double center1, double half1, double center2, double half2) {
  double d = std::fmod(std::abs(center1 - center2), kPi);
  d = std::min(d, kPi - d);
  auto one_side = [&](double dist) {
    return std::max(0.0, std::min(half1, dist + half2) - std::max(-half1, dist - half2));
  };
  return one_side(d) + one_side(kPi - d);
}

double half_width(double threshold) {
  if (!(threshold >= 0.5 && threshold <= 1.0)) {
    throw std::invalid_argument("analytic oracle needs thresholds in [0.5, 1]");
  }
  return std::acos(std::sqrt(threshold));
}

ScanStep make_step(Angle b_angle, const CountTable& counts) {
  ScanStep s{b_angle, counts, std::nullopt};
  if (counts.coincidences() > 0) s.correlation = correlation(counts);
  return s;
}

}  // namespace

std::vector<Angle> default_b_angles(std::size_t n_steps) {
  if (n_steps < 2) throw std::invalid_argument("a scan needs at least 2 steps");
  std::vector<Angle> out;
  out.reserve(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    out.push_back(Angle::radians(kPi * static_cast<double>(k) / static_cast<double>(n_steps - 1)));
  }
  return out;
}

void ScanConfig::validate() const {
  if (b_angles.size() < 2) throw std::invalid_argument("a scan needs at least 2 steps");
  if (pairs_per_step < 1) throw std::invalid_argument("pairs_per_step must be at least 1");
  station_a.validate();
  station_b.validate();
}

CountTable ScanResult::totals() const {
  CountTable t;
  for (const auto& s : steps) t += s.counts;
  return t;
}

CountTable run_block(const optics::SourceModel& source, const optics::StationConfig& a,
                     const optics::StationConfig& b, std::uint64_t pairs, std::uint64_t stream_seed,
                     std::uint64_t first_pair_id) {
  Rng rng(stream_seed);
  CountTable t;
  for (std::uint64_t i = 0; i < pairs; ++i) {
    const optics::PhotonPair pair = optics::emit_pair(source, rng, first_pair_id + i);
    optics::tally(t, optics::measure_pair(pair, a, b, rng));
  }
  return t;
}

ScanResult run_scan(const ScanConfig& cfg) {
  cfg.validate();
  ScanResult result;
  result.steps.resize(cfg.b_angles.size());
  parallel_for(cfg.b_angles.size(), cfg.threads, [&](std::size_t k) {
    optics::StationConfig b = cfg.station_b;
    b.angle = cfg.b_angles[k];
    const CountTable counts = run_block(cfg.source, cfg.station_a, b, cfg.pairs_per_step,
                                        derive_seed(cfg.seed, k), k * cfg.pairs_per_step);
    result.steps[k] = make_step(cfg.b_angles[k], counts);
  });
  if (result.totals().singles_a > 0) result.singles_ratio = singles_asymmetry(result);
  if (result.totals().coincidences() > 0) {
    result.coincidence_modulation = coincidence_modulation(result);
  }
  return result;
}

double singles_asymmetry(const ScanResult& result) {
  const CountTable t = result.totals();
  if (t.singles_a == 0) throw std::domain_error("singles asymmetry: side A has no singles");
  return static_cast<double>(t.singles_b) / static_cast<double>(t.singles_a);
}

double coincidence_modulation(const ScanResult& result) {
  if (result.steps.size() < 2) throw std::domain_error("modulation needs at least 2 steps");
  double lo = 0.0, hi = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const double c = static_cast<double>(result.steps[i].counts.coincidences());
    lo = i == 0 ? c : std::min(lo, c);
    hi = i == 0 ? c : std::max(hi, c);
    sum += c;
  }
  if (sum == 0.0) throw std::domain_error("modulation: scan has no coincidences");
  return (hi - lo) / (sum / static_cast<double>(result.steps.size()));
}

AnalyticCells analytic_cells(Angle theta, double t_a, double t_b) {
  const double wa = half_width(t_a);
  const double wb = half_width(t_b);
  // A at 0, B at theta. A's + channel wins near phi = 0 and - near pi/2; the
  // B photon is rotated by pi/2, so B's + arc is centered at theta + pi/2.
  const double th = theta.value();
  const double a_plus = 0.0, a_minus = kPi / 2.0;
  const double b_plus = th + kPi / 2.0, b_minus = th;
  AnalyticCells c;
  c.p_pp = arc_overlap(a_plus, wa, b_plus, wb) / kPi;
  c.p_pm = arc_overlap(a_plus, wa, b_minus, wb) / kPi;
  c.p_mp = arc_overlap(a_minus, wa, b_plus, wb) / kPi;
  c.p_mm = arc_overlap(a_minus, wa, b_minus, wb) / kPi;
  c.single_a = 4.0 * wa / kPi;
  c.single_b = 4.0 * wb / kPi;
  return c;
}

double analytic_correlation(Angle theta, double t_a, double t_b) {
  const AnalyticCells c = analytic_cells(theta, t_a, t_b);
  const double n = c.coincidence();
  if (n <= 0.0) throw NoCoincidences();
  return (c.p_pp + c.p_mm - c.p_pm - c.p_mp) / n;
}

ChshReport chsh_from_tables(const ChshSettings& settings, const std::array<CountTable, 4>& tables) {
  const std::array<std::pair<Angle, Angle>, 4> combos{{{settings.a, settings.b},
                                                       {settings.a, settings.b_prime},
                                                       {settings.a_prime, settings.b},
                                                       {settings.a_prime, settings.b_prime}}};
  ChshReport r;
  double var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    r.terms[i] = {combos[i].first, combos[i].second, tables[i], correlation(tables[i])};
    const double se = r.terms[i].correlation.standard_error();
    var += se * se;
  }
  r.value = chsh(r.terms[0].correlation.e, r.terms[1].correlation.e, r.terms[2].correlation.e,
                 r.terms[3].correlation.e);
  r.standard_error = std::sqrt(var);
  return r;
}

ChshReport run_chsh(const optics::SourceModel& source, const optics::StationConfig& station_a,
                    const optics::StationConfig& station_b, const ChshSettings& settings,
                    std::uint64_t pairs_per_setting, std::uint64_t seed) {
  station_a.validate();
  station_b.validate();
  if (pairs_per_setting < 1) throw std::invalid_argument("pairs_per_setting must be at least 1");
  const std::array<std::pair<Angle, Angle>, 4> combos{{{settings.a, settings.b},
                                                       {settings.a, settings.b_prime},
                                                       {settings.a_prime, settings.b},
                                                       {settings.a_prime, settings.b_prime}}};
  std::array<CountTable, 4> tables;
  for (std::size_t i = 0; i < 4; ++i) {
    optics::StationConfig a = station_a;
    optics::StationConfig b = station_b;
    a.angle = combos[i].first;
    b.angle = combos[i].second;
    tables[i] = run_block(source, a, b, pairs_per_setting, derive_seed(seed, i),
                          i * pairs_per_setting);
  }
  return chsh_from_tables(settings, tables);
}

PathologyReport pathology_probe(const PathologyConfig& cfg) {
  ScanConfig sc;
  sc.source = optics::FixedBasisHV{cfg.basis};
  sc.station_a = cfg.station_a;
  sc.station_a.angle = cfg.alpha;
  sc.station_b = cfg.station_b;
  sc.b_angles = cfg.b_angles;
  sc.pairs_per_step = cfg.pairs_per_step;
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;

  PathologyReport r;
  r.fixed_basis = run_scan(sc);
  sc.source = optics::IsotropicOrthogonalPairs{};
  r.isotropic = run_scan(sc);

  const CountTable t = r.fixed_basis.totals();
  const double n = static_cast<double>(t.n_pairs);
  r.a_single_rate = static_cast<double>(t.singles_a) / n;
  r.a_double_rate = static_cast<double>(t.doubles_a) / n;
  r.a_miss_rate = static_cast<double>(t.misses_a) / n;

  for (std::size_t k = 0; k < r.fixed_basis.steps.size(); ++k) {
    const auto& f = r.fixed_basis.steps[k].correlation;
    const auto& i = r.isotropic.steps[k].correlation;
    if (!f || !i) continue;
    const double dev = std::abs(f->match_probability - i->match_probability);
    r.max_match_deviation = std::max(r.max_match_deviation.value_or(0.0), dev);
  }
  return r;
}

void write_scan_csv(std::ostream& os, const ScanResult& result) {
  os << "b_angle_rad,n_pp,n_pm,n_mp,n_mm,singles_a,singles_b,doubles_a,doubles_b,misses_a,"
        "misses_b,match_prob,E\n";
  for (const auto& s : result.steps) {
    const CountTable& c = s.counts;
    os << format_double(s.b_angle.value()) << ',' << c.n_pp << ',' << c.n_pm << ',' << c.n_mp
       << ',' << c.n_mm << ',' << c.singles_a << ',' << c.singles_b << ',' << c.doubles_a << ','
       << c.doubles_b << ',' << c.misses_a << ',' << c.misses_b << ',';
    if (s.correlation) {
      os << format_double(s.correlation->match_probability) << ','
         << format_double(s.correlation->e) << '\n';
    } else {
      os << "nan,nan\n";
    }
  }
}

}  // namespace eprb::scan

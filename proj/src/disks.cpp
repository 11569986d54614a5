#include "eprb/disks.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace eprb::disks {
namespace {

constexpr double kCoverTolerance = 1e-9;

template <typename S>
void lay_out(std::vector<S>& sectors) {
  double start = 0.0;
  double sum = 0.0;
  for (auto& s : sectors) {
    if (!(s.length >= 0.0) || s.length > kTwoPi + kCoverTolerance) {
      throw std::invalid_argument("disk arc length must lie in [0, 2pi]");
    }
    s.start = start;
    start += s.length;
    sum += s.length;
  }
  if (std::abs(sum - kTwoPi) > kCoverTolerance) {
    throw std::invalid_argument("disk arcs must cover the circle exactly");
  }
}

// Index of the arc containing lambda. Arc i spans [start_i, start_{i+1}) with
// the final arc closed at 2pi, so empty arcs are never selected.
template <typename S>
std::size_t locate(const std::vector<S>& sectors, double lambda) {
  auto it = std::upper_bound(sectors.begin(), sectors.end(), lambda,
                             [](double l, const S& s) { return l < s.start; });
  if (it == sectors.begin()) return 0;
  return static_cast<std::size_t>(std::distance(sectors.begin(), it)) - 1;
}

template <typename S>
double arc_end(const std::vector<S>& sectors, std::size_t i) {
  return i + 1 < sectors.size() ? sectors[i + 1].start : kTwoPi;
}

double draw_lambda(Rng& rng) { return uniform01(rng) * kTwoPi; }

std::optional<double> assumed_value(const KnowledgePolicy& policy, double true_value, Rng* rng) {
  return std::visit(
      [&](const auto& p) -> std::optional<double> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, BothKnown>) {
          return true_value;
        } else if constexpr (std::is_same_v<P, AssumeZero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<P, AssumeFixed>) {
          return p.value.value();
        } else {
          if (rng == nullptr) return std::nullopt;
          return draw_lambda(*rng);
        }
      },
      policy);
}

bool is_random(const KnowledgePolicy& p) {
  return std::holds_alternative<AssumeRandom>(p) || std::holds_alternative<IntegrateOver>(p);
}

SplitDisk side_of(const DiskPreparation& disk, bool side_a);

}  // namespace

DiskPreparation DiskPreparation::from_lengths(const std::vector<Sector>& labeled_lengths) {
  DiskPreparation d;
  d.sectors_ = labeled_lengths;
  lay_out(d.sectors_);
  return d;
}

const Sector& DiskPreparation::sector_at(double lambda) const {
  return sectors_[locate(sectors_, normalize_radians(lambda))];
}

JointPmf DiskPreparation::pmf() const {
  JointPmf p;
  for (std::size_t i = 0; i < sectors_.size(); ++i) {
    p.cell(sectors_[i].outcome_a, sectors_[i].outcome_b) +=
        (arc_end(sectors_, i) - sectors_[i].start) / kTwoPi;
  }
  return p;
}

SplitDisk SplitDisk::from_lengths(const std::vector<SideSector>& labeled_lengths) {
  std::vector<SideSector> laid = labeled_lengths;
  lay_out(laid);
  return from_partition(laid);
}

SplitDisk SplitDisk::from_partition(const std::vector<SideSector>& arcs) {
  if (arcs.empty() || arcs.front().start != 0.0) {
    throw std::invalid_argument("split disk arcs must start at 0");
  }
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const double end = arc_end(arcs, i);
    if (end < arcs[i].start || arcs[i].start >= kTwoPi + kCoverTolerance) {
      throw std::invalid_argument("split disk arcs must be ordered and within [0, 2pi)");
    }
  }
  SplitDisk d;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const double len = arc_end(arcs, i) - arcs[i].start;
    if (len <= 0.0) continue;
    if (!d.sectors_.empty() && d.sectors_.back().outcome == arcs[i].outcome) {
      d.sectors_.back().length += len;
    } else {
      d.sectors_.push_back({arcs[i].start, len, arcs[i].outcome});
    }
  }
  if (d.sectors_.empty()) throw std::invalid_argument("split disk has no arcs");
  d.sectors_.front().start = 0.0;
  return d;
}

int SplitDisk::sample(double lambda) const {
  return sectors_[locate(sectors_, normalize_radians(lambda))].outcome;
}

double SplitDisk::plus_fraction() const {
  double plus = 0.0;
  for (std::size_t i = 0; i < sectors_.size(); ++i) {
    if (sectors_[i].outcome > 0) plus += arc_end(sectors_, i) - sectors_[i].start;
  }
  return plus / kTwoPi;
}

DiskPreparation build_singlet_disk(Angle theta, SingletKind kind) {
  const double c = std::cos(theta.value());
  const double s = std::sin(theta.value());
  const double match = kind == SingletKind::Correlated ? kPi * c * c : kPi * s * s;
  const double mismatch = kPi - match;
  return DiskPreparation::from_lengths({{0.0, match, +1, +1},
                                        {0.0, mismatch, +1, -1},
                                        {0.0, mismatch, -1, +1},
                                        {0.0, kTwoPi - (match + 2.0 * mismatch), -1, -1}});
}

std::pair<int, int> sample_disk(const DiskPreparation& disk, Angle lambda) {
  const Sector& s = disk.sector_at(lambda.value());
  return {s.outcome_a, s.outcome_b};
}

namespace {

SplitDisk side_of(const DiskPreparation& disk, bool side_a) {
  // Project while keeping the joint disk's arc starts, so split and joint
  // lookups resolve every lambda against identical boundaries.
  std::vector<SideSector> arcs;
  for (const auto& s : disk.sectors()) {
    arcs.push_back({s.start, s.length, side_a ? s.outcome_a : s.outcome_b});
  }
  return SplitDisk::from_partition(arcs);
}

}  // namespace

std::pair<SplitDisk, SplitDisk> split(const DiskPreparation& disk) {
  return {side_of(disk, true), side_of(disk, false)};
}

JointPmf shared_lambda_pmf(const SplitDisk& a, const SplitDisk& b) {
  std::vector<double> cuts;
  for (const auto& s : a.sectors()) cuts.push_back(s.start);
  for (const auto& s : b.sectors()) cuts.push_back(s.start);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(kTwoPi);
  JointPmf p;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    p.cell(a.sample(cuts[i]), b.sample(cuts[i])) += len / kTwoPi;
  }
  return p;
}

JointPmf independent_lambda_pmf(const SplitDisk& a, const SplitDisk& b) {
  const double pa = a.plus_fraction();
  const double pb = b.plus_fraction();
  return {pa * pb, pa * (1.0 - pb), (1.0 - pa) * pb, (1.0 - pa) * (1.0 - pb)};
}

CountTable sample_separated(const SplitDisk& a, const SplitDisk& b, SamplingMode mode,
                            std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_separated: n must be positive");
  Rng rng(derive_seed(seed, 0));
  CountTable t;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double la = draw_lambda(rng);
    const double lb = mode == SamplingMode::SharedLambda ? la : draw_lambda(rng);
    t.add_coincidence(a.sample(la), b.sample(lb));
  }
  t.singles_a = t.singles_b = t.n_pairs = n;
  return t;
}

ParamDisks::ParamDisks(Angle alpha, Angle beta, KnowledgePolicy policy_a,
                       KnowledgePolicy policy_b, SingletKind kind)
    : alpha_(alpha), beta_(beta), policy_a_(policy_a), policy_b_(policy_b), kind_(kind) {}

bool ParamDisks::is_static() const { return !is_random(policy_a_) && !is_random(policy_b_); }

bool ParamDisks::is_expectation() const {
  return std::holds_alternative<IntegrateOver>(policy_a_) ||
         std::holds_alternative<IntegrateOver>(policy_b_);
}

double ParamDisks::theta_a(std::optional<double> assumed_beta) const {
  return alpha_.value() - *assumed_beta;
}

double ParamDisks::theta_b(std::optional<double> assumed_alpha) const {
  return *assumed_alpha - beta_.value();
}

std::pair<SplitDisk, SplitDisk> ParamDisks::disks_for_trial(Rng& rng) const {
  const auto assumed_beta = assumed_value(policy_a_, beta_.value(), &rng);
  const auto assumed_alpha = assumed_value(policy_b_, alpha_.value(), &rng);
  SplitDisk a = side_of(build_singlet_disk(Angle::radians(theta_a(assumed_beta)), kind_), true);
  SplitDisk b = side_of(build_singlet_disk(Angle::radians(theta_b(assumed_alpha)), kind_), false);
  return {std::move(a), std::move(b)};
}

std::pair<SplitDisk, SplitDisk> ParamDisks::static_disks() const {
  if (!is_static()) {
    throw std::logic_error("random knowledge policies have no single pair of disks");
  }
  Rng unused(0);
  return disks_for_trial(unused);
}

JointPmf ParamDisks::target_pmf() const {
  return build_singlet_disk(alpha_ - beta_, kind_).pmf();
}

JointPmf ParamDisks::expected_pmf(int nodes) const {
  if (nodes < 1) throw std::invalid_argument("expected_pmf: nodes must be positive");
  auto node_values = [&](const KnowledgePolicy& p, double true_value) {
    std::vector<double> v;
    if (is_random(p)) {
      for (int k = 0; k < nodes; ++k) v.push_back((k + 0.5) * kTwoPi / nodes);
    } else {
      v.push_back(*assumed_value(p, true_value, nullptr));
    }
    return v;
  };
  const auto betas = node_values(policy_a_, beta_.value());
  const auto alphas = node_values(policy_b_, alpha_.value());
  JointPmf acc;
  for (double ab : betas) {
    const SplitDisk a = side_of(build_singlet_disk(Angle::radians(theta_a(ab)), kind_), true);
    for (double aa : alphas) {
      const SplitDisk b = side_of(build_singlet_disk(Angle::radians(theta_b(aa)), kind_), false);
      const JointPmf p = shared_lambda_pmf(a, b);
      acc.p_pp += p.p_pp;
      acc.p_pm += p.p_pm;
      acc.p_mp += p.p_mp;
      acc.p_mm += p.p_mm;
    }
  }
  const double inv = 1.0 / static_cast<double>(betas.size() * alphas.size());
  return {acc.p_pp * inv, acc.p_pm * inv, acc.p_mp * inv, acc.p_mm * inv};
}

CountTable ParamDisks::sample(std::uint64_t n, std::uint64_t seed) const {
  if (n == 0) throw std::invalid_argument("ParamDisks::sample: n must be positive");
  if (is_static()) {
    auto [a, b] = static_disks();
    return sample_separated(a, b, SamplingMode::SharedLambda, n, seed);
  }
  Rng rng(derive_seed(seed, 0));
  CountTable t;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto [a, b] = disks_for_trial(rng);
    const double lambda = draw_lambda(rng);
    t.add_coincidence(a.sample(lambda), b.sample(lambda));
  }
  t.singles_a = t.singles_b = t.n_pairs = n;
  return t;
}

std::pair<SplitDisk, SplitDisk> build_bell_special(Angle alpha) {
  const double c = std::cos(alpha.value());
  const double offset = kPi * c * c;
  SplitDisk a = SplitDisk::from_lengths(
      {{0.0, offset, -1}, {0.0, kPi, +1}, {0.0, kTwoPi - (offset + kPi), -1}});
  SplitDisk b = SplitDisk::from_lengths({{0.0, kPi, +1}, {0.0, kTwoPi - kPi, -1}});
  return {std::move(a), std::move(b)};
}

void write_disk_table(std::ostream& os, const DiskPreparation& disk) {
  os << "start,length,outcome_a,outcome_b\n";
  for (const auto& s : disk.sectors()) {
    os << format_double(s.start) << ',' << format_double(s.length) << ',' << s.outcome_a << ','
       << s.outcome_b << '\n';
  }
}

void write_split_table(std::ostream& os, const SplitDisk& disk) {
  os << "start,length,outcome\n";
  for (const auto& s : disk.sectors()) {
    os << format_double(s.start) << ',' << format_double(s.length) << ',' << s.outcome << '\n';
  }
}

}  // namespace eprb::disks

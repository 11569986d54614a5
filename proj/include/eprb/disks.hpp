// Disk constructions for sampling a two-outcome joint distribution.
//
// A disk is a partition of [0, 2pi) into labeled arcs. Spinning an arrow
// (drawing lambda uniformly) and reading the labels of the arc it lands in
// samples the joint pmf embodied by the arc lengths. Splitting a disk gives
// each side its own single-outcome disk; whether the split disks still sample
// the joint pmf depends on whether lambda is shared and on what each side
// knows about the other side's parameter.
//
// Arcs are half-open, [start, start + length).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "eprb/domain.hpp"
#include "eprb/rng.hpp"

namespace eprb::disks {

struct Sector {
  double start = 0.0;
  double length = 0.0;
  int outcome_a = +1;
  int outcome_b = +1;
};

struct SideSector {
  double start = 0.0;
  double length = 0.0;
  int outcome = +1;
};

/// Joint disk. Sectors are contiguous from 0 and cover [0, 2pi).
class DiskPreparation {
 public:
  /// Lays the arcs end to end from 0. Throws std::invalid_argument if the
  /// lengths are negative or do not sum to 2pi within 1e-9.
  static DiskPreparation from_lengths(const std::vector<Sector>& labeled_lengths);

  const std::vector<Sector>& sectors() const { return sectors_; }
  const Sector& sector_at(double lambda) const;
  /// Implied pmf, arc length / 2pi summed per label pair.
  JointPmf pmf() const;

 private:
  std::vector<Sector> sectors_;
};

/// One side's disk after splitting.
class SplitDisk {
 public:
  /// Same contract as DiskPreparation::from_lengths. Adjacent arcs with the
  /// same outcome are merged, zero-length arcs dropped.
  static SplitDisk from_lengths(const std::vector<SideSector>& labeled_lengths);
  /// Arcs with explicit starts, contiguous from 0; arc i ends where arc i+1
  /// starts and the last ends at 2pi. Starts are kept bit-for-bit.
  static SplitDisk from_partition(const std::vector<SideSector>& arcs);

  const std::vector<SideSector>& sectors() const { return sectors_; }
  int sample(double lambda) const;
  /// Fraction of the circle labeled +1.
  double plus_fraction() const;

 private:
  std::vector<SideSector> sectors_;
};

enum class SamplingMode { SharedLambda, IndependentLambdas };

struct BothKnown {};
struct AssumeZero {};
struct AssumeFixed {
  Angle value;
};
struct AssumeRandom {};
struct IntegrateOver {};

/// How a side treats the other side's analyzer parameter.
using KnowledgePolicy = std::variant<BothKnown, AssumeZero, AssumeFixed, AssumeRandom, IntegrateOver>;

/// Canonical sector order (+,+), (+,-), (-,+), (-,-) starting at 0.
DiskPreparation build_singlet_disk(Angle theta, SingletKind kind);

std::pair<int, int> sample_disk(const DiskPreparation& disk, Angle lambda);

std::pair<SplitDisk, SplitDisk> split(const DiskPreparation& disk);

/// Exact pmf of shared-lambda sampling, by intersecting the two sides' arcs.
JointPmf shared_lambda_pmf(const SplitDisk& a, const SplitDisk& b);

/// Outer product of the two sides' marginals; the independent-lambda limit.
JointPmf independent_lambda_pmf(const SplitDisk& a, const SplitDisk& b);

/// Every trial yields one outcome per side, so singles_a = singles_b = n.
CountTable sample_separated(const SplitDisk& a, const SplitDisk& b, SamplingMode mode,
                            std::uint64_t n, std::uint64_t seed);

/// Disks prepared from two analyzer parameters. Each side builds
/// build_singlet_disk(local - assumed_remote) and keeps its own projection,
/// so a side only reproduces the joint pmf if its assumption is right.
class ParamDisks {
 public:
  ParamDisks(Angle alpha, Angle beta, KnowledgePolicy policy_a, KnowledgePolicy policy_b,
             SingletKind kind);

  /// True when neither side draws a fresh assumption per trial.
  bool is_static() const;
  /// True when at least one side uses IntegrateOver.
  bool is_expectation() const;

  /// Split disks for one trial; random policies consume draws from rng.
  std::pair<SplitDisk, SplitDisk> disks_for_trial(Rng& rng) const;
  /// Static policies only; throws std::logic_error otherwise.
  std::pair<SplitDisk, SplitDisk> static_disks() const;

  /// Joint pmf the construction is trying to reproduce, singlet at alpha - beta.
  JointPmf target_pmf() const;
  /// Shared-lambda pmf averaged over the random assumptions by midpoint
  /// quadrature (`nodes` per random side). Exact for static policies.
  JointPmf expected_pmf(int nodes = 720) const;

  /// Shared-lambda sampling of n trials.
  CountTable sample(std::uint64_t n, std::uint64_t seed) const;

 private:
  double theta_a(std::optional<double> assumed_beta) const;
  double theta_b(std::optional<double> assumed_alpha) const;

  Angle alpha_;
  Angle beta_;
  KnowledgePolicy policy_a_;
  KnowledgePolicy policy_b_;
  SingletKind kind_;
};

inline std::pair<SplitDisk, SplitDisk> build_param_disks(Angle alpha, Angle beta,
                                                         KnowledgePolicy policy_a,
                                                         KnowledgePolicy policy_b,
                                                         SingletKind kind) {
  return ParamDisks(alpha, beta, policy_a, policy_b, kind).static_disks();
}

/// B fixed at beta = 0 (+ on [0, pi)); A's plus arc starts at pi cos^2(alpha)
/// and spans pi. Shared-lambda sampling gives p_pp = sin^2(alpha) / 2.
std::pair<SplitDisk, SplitDisk> build_bell_special(Angle alpha);

/// Text table, one sector per line: start,length,outcome_a,outcome_b.
void write_disk_table(std::ostream& os, const DiskPreparation& disk);
/// Text table, one sector per line: start,length,outcome.
void write_split_table(std::ostream& os, const SplitDisk& disk);

}  // namespace eprb::disks

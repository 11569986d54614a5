#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <optional>

#include "eprb/disks.hpp"
#include "eprb/eventio.hpp"
#include "eprb/optics.hpp"
#include "eprb/scan.hpp"

namespace eprbsim {
namespace {

using eprb::format_double;

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir());
  std::ofstream os(cfg.out_dir() / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (cfg.out_dir() / name).string());
  return os;
}

std::vector<Knob> source_knobs() {
  return {{"source", "--source", "isotropic", "Pair source: isotropic | fixed-hv"},
          {"basis", "--basis", "0", "H/V basis angle for the fixed-hv source"}};
}

// side is "a" or "b".
std::vector<Knob> station_knobs(const std::string& side, bool with_angle,
                                const std::string& default_threshold) {
  const std::string sec = "station_" + side + ".";
  const std::string S = side == "a" ? "A" : "B";
  std::vector<Knob> k;
  if (with_angle) {
    k.push_back({sec + "angle", "--" + side + "-angle", "0",
                 "Analyzer angle at " + S + " (radians, or e.g. pi/4, 45deg)"});
  }
  k.push_back({sec + "threshold", "--" + side + "-threshold,--t" + side, default_threshold,
               "Detection threshold at " + S + ", fraction of pulse energy"});
  k.push_back({sec + "noise_sigma", "--" + side + "-noise", "0",
               "Per-channel Gaussian noise sigma at " + S});
  k.push_back({sec + "efficiency", "--" + side + "-efficiency", "1",
               "Detection efficiency at " + S + " (Bernoulli thinning)"});
  return k;
}

template <typename... Lists>
std::vector<Knob> concat(Lists&&... lists) {
  std::vector<Knob> out;
  (out.insert(out.end(), lists.begin(), lists.end()), ...);
  return out;
}

eprb::optics::SourceModel source_from(RunConfig& cfg) {
  const std::string& s = cfg.get("source");
  cfg.canonicalize_angle("basis");
  if (s == "isotropic") return eprb::optics::IsotropicOrthogonalPairs{};
  if (s == "fixed-hv") return eprb::optics::FixedBasisHV{cfg.get_angle("basis")};
  throw UsageError("source: expected isotropic or fixed-hv, got '" + s + "'");
}

eprb::optics::StationConfig station_from(RunConfig& cfg, const std::string& side, bool with_angle) {
  const std::string sec = "station_" + side + ".";
  eprb::optics::StationConfig st;
  if (with_angle) {
    cfg.canonicalize_angle(sec + "angle");
    st.angle = cfg.get_angle(sec + "angle");
  }
  st.threshold = cfg.get_double(sec + "threshold");
  st.noise_sigma = cfg.get_double(sec + "noise_sigma");
  st.efficiency = cfg.get_double(sec + "efficiency");
  try {
    st.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(sec + ": " + e.what());
  }
  return st;
}

std::vector<eprb::Angle> scan_angles(RunConfig& cfg) {
  const std::uint64_t steps = cfg.get_u64("scan.steps");
  if (steps < 2) throw UsageError("scan.steps must be at least 2");
  cfg.canonicalize_radians("scan.b_min");
  cfg.canonicalize_radians("scan.b_max");
  const double lo = cfg.get_radians("scan.b_min");
  const double hi = cfg.get_radians("scan.b_max");
  std::vector<eprb::Angle> out;
  for (std::uint64_t k = 0; k < steps; ++k) {
    out.push_back(eprb::Angle::radians(lo + (hi - lo) * static_cast<double>(k) /
                                                static_cast<double>(steps - 1)));
  }
  return out;
}

unsigned threads_from(const RunConfig& cfg) {
  return static_cast<unsigned>(std::max<std::uint64_t>(1, cfg.get_u64("threads")));
}

void write_counts_header(std::ostream& os) {
  os << "n_pp,n_pm,n_mp,n_mm,singles_a,singles_b,doubles_a,doubles_b,misses_a,misses_b";
}

void write_counts(std::ostream& os, const eprb::CountTable& c) {
  os << c.n_pp << ',' << c.n_pm << ',' << c.n_mp << ',' << c.n_mm << ',' << c.singles_a << ','
     << c.singles_b << ',' << c.doubles_a << ',' << c.doubles_b << ',' << c.misses_a << ','
     << c.misses_b;
}

// Noiseless closed forms, when the configuration admits them.
std::optional<double> predicted_singles_ratio(const eprb::optics::SourceModel& src,
                                              const eprb::optics::StationConfig& a,
                                              const eprb::optics::StationConfig& b) {
  if (!std::holds_alternative<eprb::optics::IsotropicOrthogonalPairs>(src)) return std::nullopt;
  if (a.noise_sigma > 0.0 || b.noise_sigma > 0.0 || a.threshold < 0.5 || b.threshold < 0.5) {
    return std::nullopt;
  }
  const double pa = eprb::optics::single_detection_probability(a.threshold) * a.efficiency;
  const double pb = eprb::optics::single_detection_probability(b.threshold) * b.efficiency;
  if (pa <= 0.0) return std::nullopt;
  return pb / pa;
}

eprb::disks::KnowledgePolicy policy_from(const std::string& name, eprb::Angle fixed) {
  using namespace eprb::disks;
  if (name == "both-known") return BothKnown{};
  if (name == "assume-zero") return AssumeZero{};
  if (name == "assume-fixed") return AssumeFixed{fixed};
  if (name == "assume-random") return AssumeRandom{};
  if (name == "integrate") return IntegrateOver{};
  throw UsageError("policy: expected both-known | assume-zero | assume-fixed | assume-random | "
                   "integrate, got '" + name + "'");
}

eprb::SingletKind kind_from(const std::string& name) {
  if (name == "anticorrelated") return eprb::SingletKind::Anticorrelated;
  if (name == "correlated") return eprb::SingletKind::Correlated;
  throw UsageError("kind: expected anticorrelated | correlated, got '" + name + "'");
}

eprb::CountTable sample_joint_disk(const eprb::disks::DiskPreparation& disk, std::uint64_t n,
                                   std::uint64_t seed) {
  eprb::Rng rng(eprb::derive_seed(seed, 0));
  eprb::CountTable t;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto [a, b] =
        eprb::disks::sample_disk(disk, eprb::Angle::radians(eprb::uniform01(rng) * eprb::kTwoPi));
    t.add_coincidence(a, b);
  }
  t.singles_a = t.singles_b = t.n_pairs = n;
  return t;
}

}  // namespace

Command make_disk_demo() {
  std::vector<Knob> knobs{
      {"disk.figure", "--figure", "2",
       "Construction: 1 joint disk | 2 split, shared lambda | 3 split, independent lambdas | "
       "4 two parameters, both known | 5 two parameters, knowledge policies | special"},
      {"disk.kind", "--kind", "anticorrelated", "Singlet kind: anticorrelated | correlated"},
      {"disk.theta", "--theta", "pi/8", "Relative angle for constructions 1-3"},
      {"disk.alpha", "--alpha", "0", "A parameter for constructions 4, 5 and special"},
      {"disk.beta", "--beta", "pi/4", "B parameter for constructions 4 and 5"},
      {"disk.policy", "--policy", "",
       "Knowledge policy for both sides (overrides policy_a/policy_b when set)"},
      {"disk.policy_a", "--policy-a", "assume-zero",
       "A's treatment of beta: both-known | assume-zero | assume-fixed | assume-random | "
       "integrate"},
      {"disk.policy_b", "--policy-b", "assume-zero", "B's treatment of alpha (same choices)"},
      {"disk.assumed_beta", "--assumed-beta", "0", "A's assumed beta under assume-fixed"},
      {"disk.assumed_alpha", "--assumed-alpha", "0", "B's assumed alpha under assume-fixed"},
      {"disk.n", "--n", "1000000", "Number of trials"},
  };
  Command c{"disk-demo", "Disk constructions for sampling a joint pmf under separation",
            RunConfig("disk-demo", knobs, {}), {}};
  c.run = [](RunConfig& cfg) -> std::vector<std::string> {
    using namespace eprb::disks;
    const std::string figure = cfg.get("disk.figure");
    const eprb::SingletKind kind = kind_from(cfg.get("disk.kind"));
    for (const char* k : {"disk.theta", "disk.alpha", "disk.beta", "disk.assumed_beta",
                          "disk.assumed_alpha"}) {
      cfg.canonicalize_angle(k);
    }
    const eprb::Angle theta = cfg.get_angle("disk.theta");
    const eprb::Angle alpha = cfg.get_angle("disk.alpha");
    const eprb::Angle beta = cfg.get_angle("disk.beta");
    const std::uint64_t n = cfg.get_u64("disk.n");
    if (n == 0) throw UsageError("disk.n must be positive");
    const std::uint64_t seed = cfg.seed();

    std::vector<std::string> files;
    std::optional<DiskPreparation> joint;
    std::optional<std::pair<SplitDisk, SplitDisk>> splits;
    eprb::CountTable counts;
    eprb::JointPmf target, exact;
    std::string label;

    if (figure == "1" || figure == "2" || figure == "3") {
      joint = build_singlet_disk(theta, kind);
      target = joint->pmf();
      if (figure == "1") {
        label = "joint disk";
        counts = sample_joint_disk(*joint, n, seed);
        exact = target;
      } else {
        splits = split(*joint);
        const bool shared = figure == "2";
        label = shared ? "split disks, shared lambda" : "split disks, independent lambdas";
        counts = sample_separated(splits->first, splits->second,
                                  shared ? SamplingMode::SharedLambda
                                         : SamplingMode::IndependentLambdas,
                                  n, seed);
        exact = shared ? shared_lambda_pmf(splits->first, splits->second)
                       : independent_lambda_pmf(splits->first, splits->second);
      }
    } else if (figure == "4" || figure == "5") {
      KnowledgePolicy pa = BothKnown{}, pb = BothKnown{};
      if (figure == "5") {
        if (!cfg.get("disk.policy").empty()) {
          cfg.set("disk.policy_a", cfg.get("disk.policy"));
          cfg.set("disk.policy_b", cfg.get("disk.policy"));
        }
        pa = policy_from(cfg.get("disk.policy_a"), cfg.get_angle("disk.assumed_beta"));
        pb = policy_from(cfg.get("disk.policy_b"), cfg.get_angle("disk.assumed_alpha"));
      }
      const ParamDisks pd(alpha, beta, pa, pb, kind);
      label = figure == "4" ? "two parameters, both known" : "two parameters, knowledge policies";
      if (pd.is_static()) splits = pd.static_disks();
      joint = build_singlet_disk(alpha - beta, kind);
      target = pd.target_pmf();
      exact = pd.expected_pmf();
      counts = pd.sample(n, seed);
    } else if (figure == "special") {
      label = "beta fixed at 0, A plus arc offset by pi cos^2(alpha)";
      splits = build_bell_special(alpha);
      target = build_singlet_disk(alpha, eprb::SingletKind::Anticorrelated).pmf();
      exact = shared_lambda_pmf(splits->first, splits->second);
      counts = sample_separated(splits->first, splits->second, SamplingMode::SharedLambda, n, seed);
    } else {
      throw UsageError("figure: expected 1, 2, 3, 4, 5 or special, got '" + figure + "'");
    }

    if (joint) {
      auto os = open_out(cfg, "disk.txt");
      write_disk_table(os, *joint);
      files.push_back("disk.txt");
    }
    if (splits) {
      auto oa = open_out(cfg, "split_a.txt");
      write_split_table(oa, splits->first);
      auto ob = open_out(cfg, "split_b.txt");
      write_split_table(ob, splits->second);
      files.push_back("split_a.txt");
      files.push_back("split_b.txt");
    }
    const eprb::JointPmf empirical = counts.empirical_pmf();
    {
      auto os = open_out(cfg, "pmf.csv");
      os << "outcome_a,outcome_b,count,empirical,exact,target\n";
      const std::uint64_t cells[4] = {counts.n_pp, counts.n_pm, counts.n_mp, counts.n_mm};
      const int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
      for (int i = 0; i < 4; ++i) {
        const int a = signs[i][0], b = signs[i][1];
        os << a << ',' << b << ',' << cells[i] << ',' << fmt(empirical.cell(a, b)) << ','
           << fmt(exact.cell(a, b)) << ',' << fmt(target.cell(a, b)) << '\n';
      }
      files.push_back("pmf.csv");
    }
    write_summary(cfg.out_dir() / "summary.txt",
                  {{"construction", label},
                   {"trials", fmt(n)},
                   {"tv_empirical_vs_target", fmt(eprb::total_variation(empirical, target))},
                   {"tv_exact_vs_target", fmt(eprb::total_variation(exact, target))},
                   {"tv_empirical_vs_exact", fmt(eprb::total_variation(empirical, exact))},
                   {"seed", fmt(seed)},
                   {"config_hash", hex(cfg.config_hash())}});
    files.push_back("summary.txt");
    return files;
  };
  return c;
}

Command make_scan() {
  auto knobs = concat(source_knobs(), station_knobs("a", true, "0.5"),
                      station_knobs("b", false, "0.5"),
                      std::vector<Knob>{
                          {"scan.steps", "--steps", "33", "Number of B angles"},
                          {"scan.b_min", "--b-min", "0", "First B angle"},
                          {"scan.b_max", "--b-max", "pi", "Last B angle"},
                          {"scan.pairs_per_step", "--pairs", "100000", "Pairs emitted per B angle"},
                          {"threads", "--threads", "1", "Worker threads (results do not depend on it)"},
                      });
  std::map<std::string, Preset> presets{
      {"figure6", {{"station_a.threshold", "0.5"}, {"station_b.threshold", "0.5"}, {"station_a.angle", "0"}}},
      {"figure7", {{"station_a.threshold", "0.5"}, {"station_b.threshold", "0.92"}, {"station_a.angle", "0"}}},
      {"figure8-left", {{"station_a.threshold", "0.5"}, {"station_b.threshold", "0.75"}, {"station_a.angle", "0"}}},
      {"figure8-right", {{"station_a.threshold", "0.5"}, {"station_b.threshold", "0.75"}, {"station_a.angle", "pi/4"}}},
  };
  Command c{"scan", "Fix A, scan B over a range of angles, tabulate every step",
            RunConfig("scan", knobs, presets), {}};
  c.run = [](RunConfig& cfg) -> std::vector<std::string> {
    eprb::scan::ScanConfig sc;
    sc.source = source_from(cfg);
    sc.station_a = station_from(cfg, "a", true);
    sc.station_b = station_from(cfg, "b", false);
    sc.b_angles = scan_angles(cfg);
    sc.pairs_per_step = cfg.get_u64("scan.pairs_per_step");
    if (sc.pairs_per_step == 0) throw UsageError("scan.pairs_per_step must be positive");
    sc.seed = cfg.seed();
    sc.threads = threads_from(cfg);
    const auto result = eprb::scan::run_scan(sc);
    {
      auto os = open_out(cfg, "scan.csv");
      eprb::scan::write_scan_csv(os, result);
    }
    const auto totals = result.totals();
    write_summary(cfg.out_dir() / "summary.txt",
                  {{"singles_ratio", fmt_opt(result.singles_ratio)},
                   {"predicted_singles_ratio",
                    fmt_opt(predicted_singles_ratio(sc.source, sc.station_a, sc.station_b))},
                   {"modulation", fmt_opt(result.coincidence_modulation)},
                   {"pairs", fmt(totals.n_pairs)},
                   {"coincidences", fmt(totals.coincidences())},
                   {"doubles_a", fmt(totals.doubles_a)},
                   {"doubles_b", fmt(totals.doubles_b)},
                   {"misses_a", fmt(totals.misses_a)},
                   {"misses_b", fmt(totals.misses_b)},
                   {"seed", fmt(sc.seed)},
                   {"config_hash", hex(cfg.config_hash())}});
    return {"scan.csv", "summary.txt"};
  };
  return c;
}

Command make_chsh() {
  auto knobs = concat(source_knobs(), station_knobs("a", false, "0.5"),
                      station_knobs("b", false, "0.5"),
                      std::vector<Knob>{
                          {"chsh.a", "--a", "0", "A setting a"},
                          {"chsh.a_prime", "--a-prime", "pi/4", "A setting a'"},
                          {"chsh.b", "--b", "pi/8", "B setting b"},
                          {"chsh.b_prime", "--b-prime", "3pi/8", "B setting b'"},
                          {"chsh.pairs", "--pairs", "1000000", "Pairs per setting combination"},
                      });
  Command c{"chsh", "Four-setting CHSH run", RunConfig("chsh", knobs, {}), {}};
  c.run = [](RunConfig& cfg) -> std::vector<std::string> {
    const auto source = source_from(cfg);
    const auto a = station_from(cfg, "a", false);
    const auto b = station_from(cfg, "b", false);
    eprb::scan::ChshSettings st;
    for (const char* k : {"chsh.a", "chsh.a_prime", "chsh.b", "chsh.b_prime"}) {
      cfg.canonicalize_angle(k);
    }
    st.a = cfg.get_angle("chsh.a");
    st.a_prime = cfg.get_angle("chsh.a_prime");
    st.b = cfg.get_angle("chsh.b");
    st.b_prime = cfg.get_angle("chsh.b_prime");
    const std::uint64_t pairs = cfg.get_u64("chsh.pairs");
    if (pairs == 0) throw UsageError("chsh.pairs must be positive");
    const auto report = eprb::scan::run_chsh(source, a, b, st, pairs, cfg.seed());
    {
      auto os = open_out(cfg, "chsh.csv");
      os << "a_rad,b_rad,";
      write_counts_header(os);
      os << ",E,se\n";
      for (const auto& t : report.terms) {
        os << fmt(t.a.value()) << ',' << fmt(t.b.value()) << ',';
        write_counts(os, t.counts);
        os << ',' << fmt(t.correlation.e) << ',' << fmt(t.correlation.standard_error()) << '\n';
      }
    }
    std::optional<double> analytic;
    if (std::holds_alternative<eprb::optics::IsotropicOrthogonalPairs>(source) &&
        a.noise_sigma == 0.0 && b.noise_sigma == 0.0 && a.threshold >= 0.5 && b.threshold >= 0.5) {
      try {
        const auto e = [&](eprb::Angle x, eprb::Angle y) {
          return eprb::scan::analytic_correlation(y - x, a.threshold, b.threshold);
        };
        analytic = eprb::chsh(e(st.a, st.b), e(st.a, st.b_prime), e(st.a_prime, st.b),
                              e(st.a_prime, st.b_prime))
                       .abs_s;
      } catch (const eprb::NoCoincidences&) {
      }
    }
    write_summary(cfg.out_dir() / "summary.txt",
                  {{"S", fmt(report.value.s)},
                   {"abs_S", fmt(report.value.abs_s)},
                   {"se_S", fmt(report.standard_error)},
                   {"analytic_abs_S", fmt_opt(analytic)},
                   {"seed", fmt(cfg.seed())},
                   {"config_hash", hex(cfg.config_hash())}});
    return {"chsh.csv", "summary.txt"};
  };
  return c;
}

Command make_pathology() {
  auto knobs = concat(std::vector<Knob>{
                          {"basis", "--basis", "0", "H/V basis angle of the fixed-basis source"},
                          {"alpha", "--alpha", "pi/4", "Fixed analyzer angle at A"},
                      },
                      station_knobs("a", false, "0.5"), station_knobs("b", false, "0.5"),
                      std::vector<Knob>{
                          {"scan.steps", "--steps", "33", "Number of B angles"},
                          {"scan.b_min", "--b-min", "0", "First B angle"},
                          {"scan.b_max", "--b-max", "pi", "Last B angle"},
                          {"scan.pairs_per_step", "--pairs", "100000", "Pairs emitted per B angle"},
                          {"threads", "--threads", "1", "Worker threads (results do not depend on it)"},
                      });
  Command c{"pathology", "Fixed H/V basis source versus isotropic source, A at a fixed angle",
            RunConfig("pathology", knobs, {}), {}};
  c.run = [](RunConfig& cfg) -> std::vector<std::string> {
    eprb::scan::PathologyConfig pc;
    cfg.canonicalize_angle("basis");
    cfg.canonicalize_angle("alpha");
    pc.basis = cfg.get_angle("basis");
    pc.alpha = cfg.get_angle("alpha");
    pc.station_a = station_from(cfg, "a", false);
    pc.station_b = station_from(cfg, "b", false);
    pc.b_angles = scan_angles(cfg);
    pc.pairs_per_step = cfg.get_u64("scan.pairs_per_step");
    if (pc.pairs_per_step == 0) throw UsageError("scan.pairs_per_step must be positive");
    pc.seed = cfg.seed();
    pc.threads = threads_from(cfg);
    const auto r = eprb::scan::pathology_probe(pc);
    {
      auto os = open_out(cfg, "scan_fixed.csv");
      eprb::scan::write_scan_csv(os, r.fixed_basis);
      auto oi = open_out(cfg, "scan_isotropic.csv");
      eprb::scan::write_scan_csv(oi, r.isotropic);
    }
    write_summary(cfg.out_dir() / "summary.txt",
                  {{"a_single_rate", fmt(r.a_single_rate)},
                   {"a_double_rate", fmt(r.a_double_rate)},
                   {"a_miss_rate", fmt(r.a_miss_rate)},
                   {"max_match_deviation", fmt_opt(r.max_match_deviation)},
                   {"seed", fmt(pc.seed)},
                   {"config_hash", hex(cfg.config_hash())}});
    return {"scan_fixed.csv", "scan_isotropic.csv", "summary.txt"};
  };
  return c;
}

Command make_events_gen() {
  auto knobs = concat(source_knobs(), station_knobs("a", false, "0.5"),
                      station_knobs("b", false, "0.75"),
                      std::vector<Knob>{
                          {"events.rate", "--rate", "10000", "Mean pair emission rate (1/s)"},
                          {"events.jitter_ns", "--jitter-ns", "10", "Per-side timing jitter sigma (ns)"},
                          {"events.duration", "--duration", "1", "Duration (s)"},
                          {"events.a0", "--a0", "0", "A setting 0"},
                          {"events.a1", "--a1", "pi/4", "A setting 1"},
                          {"events.b0", "--b0", "pi/8", "B setting 0"},
                          {"events.b1", "--b1", "3pi/8", "B setting 1"},
                      });
  Command c{"events gen", "Generate time-tagged per-side event files",
            RunConfig("events gen", knobs, {}), {}};
  c.run = [](RunConfig& cfg) -> std::vector<std::string> {
    eprb::eventio::GeneratorConfig g;
    g.source = source_from(cfg);
    g.station_a = station_from(cfg, "a", false);
    g.station_b = station_from(cfg, "b", false);
    for (const char* k : {"events.a0", "events.a1", "events.b0", "events.b1"}) {
      cfg.canonicalize_angle(k);
    }
    g.settings_a = {cfg.get_angle("events.a0"), cfg.get_angle("events.a1")};
    g.settings_b = {cfg.get_angle("events.b0"), cfg.get_angle("events.b1")};
    g.mean_rate = cfg.get_double("events.rate");
    g.jitter_sigma = cfg.get_double("events.jitter_ns") * 1e-9;
    const double duration = cfg.get_double("events.duration");
    try {
      g.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (!(duration > 0.0)) throw UsageError("events.duration must be positive");
    const auto streams = eprb::eventio::generate_streams(g, duration, cfg.seed());
    eprb::eventio::write_generated(cfg.out_dir(), streams);
    eprb::CountTable ground;
    for (const auto& row : streams.ground_counts) {
      for (const auto& t : row) ground += t;
    }
    write_summary(cfg.out_dir() / "summary.txt",
                  {{"pairs", fmt(streams.n_pairs)},
                   {"records_a", fmt(static_cast<std::uint64_t>(streams.a.size()))},
                   {"records_b", fmt(static_cast<std::uint64_t>(streams.b.size()))},
                   {"true_pairs", fmt(static_cast<std::uint64_t>(streams.truth.size()))},
                   {"doubles_a", fmt(ground.doubles_a)},
                   {"doubles_b", fmt(ground.doubles_b)},
                   {"seed", fmt(cfg.seed())},
                   {"config_hash", hex(cfg.config_hash())}});
    return {"events_a.csv", "events_b.csv", "truth.csv", "summary.txt"};
  };
  return c;
}

Command make_events_match() {
  std::vector<Knob> knobs{
      {"match.a", "--a", "events_a.csv", "A event file"},
      {"match.b", "--b", "events_b.csv", "B event file"},
      {"match.truth", "--truth", "", "Optional ground-truth file to score the matching"},
      {"match.window_ns", "--window", "100", "Coincidence window half-width (ns)"},
  };
  Command c{"events match", "Recover coincidences from two event files by window matching",
            RunConfig("events match", knobs, {}), {}};
  c.run = [](RunConfig& cfg) -> std::vector<std::string> {
    namespace ev = eprb::eventio;
    const auto a = ev::read_events_file(cfg.get("match.a"));
    const auto b = ev::read_events_file(cfg.get("match.b"));
    const std::uint64_t window = cfg.get_u64("match.window_ns");
    const auto m = ev::match_coincidences(a, b, window);
    {
      auto os = open_out(cfg, "counts.csv");
      os << "setting_a,setting_b,";
      write_counts_header(os);
      os << ",E,se\n";
      for (int sa = 0; sa < 2; ++sa) {
        for (int sb = 0; sb < 2; ++sb) {
          const auto& t = m.tables[sa][sb];
          os << sa << ',' << sb << ',';
          write_counts(os, t);
          if (t.coincidences() > 0) {
            const auto corr = eprb::correlation(t);
            os << ',' << fmt(corr.e) << ',' << fmt(corr.standard_error()) << '\n';
          } else {
            os << ",nan,nan\n";
          }
        }
      }
    }
    std::vector<std::pair<std::string, std::string>> summary{
        {"matched", fmt(static_cast<std::uint64_t>(m.pairs.size()))},
        {"unmatched_a", fmt(static_cast<std::uint64_t>(m.unmatched_a))},
        {"unmatched_b", fmt(static_cast<std::uint64_t>(m.unmatched_b))}};
    try {
      const auto r = eprb::scan::chsh_from_tables(
          eprb::scan::ChshSettings{},
          {m.tables[0][0], m.tables[0][1], m.tables[1][0], m.tables[1][1]});
      summary.push_back({"S", fmt(r.value.s)});
      summary.push_back({"abs_S", fmt(r.value.abs_s)});
      summary.push_back({"se_S", fmt(r.standard_error)});
    } catch (const eprb::NoCoincidences&) {
      summary.push_back({"S", "nan"});
    }
    if (!cfg.get("match.truth").empty()) {
      std::ifstream in(cfg.get("match.truth"), std::ios::binary);
      if (!in) throw std::runtime_error("cannot open " + cfg.get("match.truth"));
      const auto stats = ev::compare_with_truth(m, ev::read_truth(in));
      summary.push_back({"true_pairs", fmt(static_cast<std::uint64_t>(stats.true_pairs))});
      summary.push_back({"recovered", fmt(static_cast<std::uint64_t>(stats.recovered))});
      summary.push_back({"recovered_fraction", fmt(stats.recovered_fraction())});
      summary.push_back({"accidental_fraction", fmt(stats.accidental_fraction(m.pairs.size()))});
    }
    summary.push_back({"config_hash", hex(cfg.config_hash())});
    write_summary(cfg.out_dir() / "summary.txt", summary);
    return {"counts.csv", "summary.txt"};
  };
  return c;
}

}  // namespace eprbsim

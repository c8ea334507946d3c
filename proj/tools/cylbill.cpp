// cylbill: command-line front end for building, classifying and simulating
// cylindric billiards.

#include "cylbill/builders.hpp"
#include "cylbill/classifier.hpp"
#include "cylbill/diagnostics.hpp"
#include "cylbill/euclid_paths.hpp"
#include "cylbill/system_io.hpp"
#include "cylbill/torus_flow.hpp"

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

using namespace cylbill;

namespace {

enum Exit { kOk = 0, kNegative = 1, kValidation = 2, kDegenerate = 3, kUsage = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Report {
  YAML::Emitter out;
  std::vector<std::string> summary;
  Report() {
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
  }
  template <typename T>
  Report& kv(const std::string& k, const T& v) {
    out << YAML::Key << k << YAML::Value << v;
    return *this;
  }
  Report& vec(const std::string& k, const Vec& v) {
    out << YAML::Key << k << YAML::Value << YAML::Flow << std::vector<double>(v.data(), v.data() + v.size());
    return *this;
  }
  std::string str() {
    out << YAML::EndMap;
    std::string s = fmt::format("# cylbill report {:%Y-%m-%dT%H:%M:%SZ}\n",
                                std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
    s += out.c_str();
    s += "\n";
    for (const auto& line : summary) s += "# " + line + "\n";
    return s;
  }
};

void emit(Report& r, const std::string& path) {
  const std::string text = r.str();
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

CylindricBilliardSystem load_valid(const std::string& path) {
  auto system = read_system(path);
  const auto report = validate(system);
  if (!report.ok()) throw ParseError(path, 1, 1, "system does not validate:\n" + report.to_string());
  return system;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "'");
    }
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  return fmt::format("{}", fmt::join(v, ","));
}

void emit_subspace(Report& r, const std::string& key, const Subspace& s) {
  r.out << YAML::Key << key << YAML::Value << YAML::BeginSeq;
  for (int j = 0; j < s.dim(); ++j) {
    const Vec c = s.basis().col(j);
    r.out << YAML::Flow << std::vector<double>(c.data(), c.data() + c.size());
  }
  r.out << YAML::EndSeq;
}

void emit_witness(Report& r, const SplittingWitness& w) {
  r.out << YAML::Key << "witness" << YAML::Value << YAML::BeginMap;
  emit_subspace(r, "b1", w.b1);
  emit_subspace(r, "b2", w.b2);
  r.out << YAML::Key << "assignment" << YAML::Value << YAML::Flow << w.assignment;
  r.kv("degenerate", w.degenerate);
  r.out << YAML::EndMap;
}

// ---------------------------------------------------------------------------

struct Common {
  std::string system;
  std::string out;
  std::uint64_t seed = 1;
  bool serial = false;
  Exec exec() const { return serial ? Exec::serial : Exec::parallel; }
};

int cmd_classify(const Common& c) {
  const auto system = load_valid(c.system);
  const auto bases = system.base_spaces();
  Report r;
  const auto tr = is_transitive(bases, system.dim());
  const int commutant = commutant_dimension(bases);
  const auto graph = non_orthogonality_graph(bases);
  r.kv("dim", system.dim()).kv("cylinders", system.size());
  r.kv("transitive", tr.transitive);
  if (tr.witness) emit_witness(r, *tr.witness);
  r.kv("commutant_dimension", commutant);
  r.out << YAML::Key << "graph_components" << YAML::Value << graph.components();
  bool transverse = false;
  try {
    const auto tv = is_transverse(system, c.exec());
    transverse = tv.transverse;
    r.kv("transverse", tv.transverse);
    if (tv.counterexample) r.out << YAML::Key << "counterexample" << YAML::Value << YAML::Flow << *tv.counterexample;
    r.kv("distinct_spans", static_cast<long long>(tv.distinct_spans));
  } catch (const EnumerationGuardError& e) {
    r.kv("transverse", "refused").kv("transverse_note", std::string(e.what()));
  }
  r.summary.push_back(fmt::format("transitive: {}; transverse: {}", tr.transitive ? "yes" : "no",
                                  transverse ? "yes" : "no"));
  emit(r, c.out);
  return kOk;
}

int finish_build(const CylindricBilliardSystem& system, const std::vector<std::string>& notes, const Common& c) {
  const auto report = validate(system);
  std::string text = format_system(system);
  for (const auto& n : notes) text += "# note: " + n + "\n";
  if (!report.ok()) text += "# validation: " + report.to_string() + "\n";
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
  } else {
    write_file(c.out, text);
  }
  return report.ok() ? kOk : kValidation;
}

struct HardBallArgs {
  int n = 2;
  int nu = 2;
  std::string masses;
  double r = 0.1;
  HardBallParams params() const {
    HardBallParams p;
    p.n = n;
    p.nu = nu;
    p.r = r;
    p.masses = masses.empty() ? std::vector<double>(static_cast<std::size_t>(n), 1.0) : parse_list(masses);
    return p;
  }
};

int cmd_build_hardball(const HardBallArgs& a, const Common& c) {
  const auto build = hard_ball_system(a.params());
  return finish_build(build.system, build.notes, c);
}

int cmd_build_directsum(const std::string& blocks_path, const Common& c) {
  const std::string text = read_file(blocks_path);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(blocks_path, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  if (!root["blocks"] || !root["blocks"].IsSequence()) throw ParseError(blocks_path, 1, 1, "missing 'blocks' list");
  std::vector<Subspace> bases;
  std::vector<double> radii;
  std::vector<Vec> translations;
  std::vector<int> dims;
  for (const auto& b : root["blocks"]) {
    try {
      std::vector<Vec> vecs;
      for (const auto& v : b["basis"]) {
        const auto xs = v.as<std::vector<double>>();
        vecs.push_back(Eigen::Map<const Vec>(xs.data(), static_cast<long>(xs.size())));
      }
      if (vecs.empty()) throw ParseError(blocks_path, b.Mark().line + 1, b.Mark().column + 1, "block without basis");
      bases.push_back(orthonormalize(vecs));
      dims.push_back(static_cast<int>(vecs.size()));
      radii.push_back(b["radius"].as<double>());
      if (b["translation"]) {
        const auto xs = b["translation"].as<std::vector<double>>();
        translations.push_back(Eigen::Map<const Vec>(xs.data(), static_cast<long>(xs.size())));
      }
    } catch (const YAML::Exception& e) {
      throw ParseError(blocks_path, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
  }
  if (!translations.empty() && translations.size() != bases.size())
    throw ParseError(blocks_path, 1, 1, "give a translation for every block or for none");
  const auto build = direct_sum_system(dims, bases, radii, translations);
  std::vector<std::string> notes;
  for (const auto& comp : build.graph.components()) notes.push_back("graph component: " + join(comp));
  return finish_build(build.system, notes, c);
}

int cmd_build_subbilliard(const std::string& indices, const Common& c) {
  const auto system = load_valid(c.system);
  std::vector<int> idx;
  for (double v : parse_list(indices)) idx.push_back(static_cast<int>(v));
  for (int i : idx)
    if (i < 0 || i >= system.size()) throw UsageError(fmt::format("index {} out of range", i));
  auto sub = sub_billiard(system, idx);
  sub.notes.push_back(fmt::format("retained cylinders {}; dim E+ = {}, dim E0 = {}", join(sub.indices),
                                  sub.e_plus.dim(), sub.e0.dim()));
  return finish_build(sub.system, sub.notes, c);
}

struct SampleArgs {
  std::string sigma;
  int samples = 200;
  double box = 0.0;
  std::string measure = "box";
  SamplingOptions options(const Common& c) const {
    SamplingOptions o;
    o.box_half_width = box;
    o.measure = measure == "constructive" ? SamplingMeasure::constructive : SamplingMeasure::box;
    o.exec = c.exec();
    return o;
  }
};

int cmd_delta(const SampleArgs& a, const Common& c, bool rich_mode) {
  const auto system = load_valid(c.system);
  const auto sigma = read_sigma(a.sigma);
  if (sigma.empty()) throw UsageError("empty symbolic sequence");
  for (int l : sigma)
    if (l < 0 || l >= system.size()) throw ParseError(a.sigma, 1, 1, fmt::format("label {} out of range", l));
  DeltaResult res;
  try {
    res = delta_sigma(system, sigma, a.samples, c.seed, a.options(c));
  } catch (const NoValidPath& e) {
    throw DegenerateError(e.what());
  }
  const bool rich = res.delta == system.dim() - 1;
  Report r;
  r.kv("generator", std::string(kSamplerName)).kv("seed", c.seed).kv("samples", res.samples);
  r.kv("delta", res.delta).kv("d_minus_one", res.d_minus_one).kv("neutral_bound", res.neutral_bound);
  r.kv("constrained_manifold_dim", res.constrained_manifold_dim);
  r.kv("successful_samples", res.successes).kv("trace_failures", res.trace_failures);
  r.kv("rich", rich);
  r.summary.push_back(fmt::format("delta = {} (d-1 = {}); {}", res.delta, res.d_minus_one, rich ? "rich" : "not rich"));
  emit(r, c.out);
  return rich_mode && !rich ? kNegative : kOk;
}

int cmd_trace(const std::string& sigma_path, const std::string& spec_path, const Common& c) {
  const auto system = load_valid(c.system);
  const auto sigma = read_sigma(sigma_path);
  const auto spec = read_spec(spec_path);
  const std::string problem = check_spec(system, sigma, spec);
  if (!problem.empty()) throw ParseError(spec_path, 1, 1, problem);
  const auto res = trace(system, sigma, spec);
  std::string text = format_path_result(sigma, res);
  int code = kOk;
  if (res.ok()) {
    try {
      const auto ns = neutral_space(system, sigma, spec);
      const auto th = theta_rank(system, sigma, spec);
      text += fmt::format("# w_plus_dim: {}\n# neutral_dim: {}\n# prop37_residual: {:.3e}\n# theta_rank: {} of {}\n",
                          ns.w_plus.dim(), ns.kernel.dim(), ns.orthogonality_residual, th.rank, th.expected);
    } catch (const PathError& e) {
      text += fmt::format("# derivatives unavailable: {}\n", e.what());
      code = kDegenerate;
    }
  } else {
    code = kDegenerate;
  }
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
  } else {
    write_file(c.out, text);
  }
  return code;
}

struct InitArgs {
  std::string init;
  bool random = false;
  PhasePoint phase(const FlowGeometry& geom, std::uint64_t seed) const {
    if (!init.empty()) {
      PhasePoint p = read_phase(init);
      if (p.q.size() != geom.lattice().dim()) throw ParseError(init, 1, 1, "phase dimension does not match system");
      p.q = geom.lattice().wrap(p.q);
      return p;
    }
    if (!random) throw UsageError("give --init FILE or --random");
    Rng rng(sample_seed(seed, 0));
    return random_phase(geom, rng);
  }
};

int cmd_simulate(const InitArgs& init, long long collisions, double time, const std::string& csv, const Common& c) {
  const auto system = load_valid(c.system);
  const FlowGeometry geom(system);
  const PhasePoint start = init.phase(geom, c.seed);
  FlowStop stop;
  stop.max_collisions = collisions;
  if (time > 0.0) stop.max_time = time;
  if (collisions < 0 && !(time > 0.0)) throw UsageError("give --collisions or --time");
  const auto rec = flow(geom, start, stop);
  const std::string text = format_trajectory(rec) +
                           fmt::format("# {} collisions, stopped by {}\n", rec.events.size(), to_string(rec.termination));
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
  } else {
    write_file(c.out, text);
  }
  if (!csv.empty()) write_file(csv, format_trajectory_csv(rec));
  return rec.degenerate() ? kDegenerate : kOk;
}

int cmd_lyapunov(const InitArgs& init, const LyapunovOptions& base, const Common& c) {
  const auto system = load_valid(c.system);
  const FlowGeometry geom(system);
  LyapunovOptions opt = base;
  opt.seed = c.seed;
  const PhasePoint start = init.phase(geom, c.seed);
  const auto res = lyapunov_max(system, start, opt);
  Report r;
  r.kv("seed", c.seed).kv("total_time", opt.total_time).kv("renorm_dt", opt.renorm_dt).kv("d0", opt.d0);
  r.kv("estimate", res.estimate).kv("std_error", res.std_error);
  r.kv("accepted_windows", res.accepted).kv("discarded_windows", res.discarded).kv("unreliable", res.unreliable);
  r.summary.push_back(fmt::format("lyapunov estimate {:.6g} +- {:.2g}{}", res.estimate, res.std_error,
                                  res.unreliable ? " (unreliable)" : ""));
  emit(r, c.out);
  return res.reference_failed ? kDegenerate : kOk;
}

struct ScanArgs {
  int orbits = 100;
  std::string checkpoints = "20,200";
  std::string ensemble = "uniform";
  HardBallArgs hb;
};

int cmd_splitting_scan(const ScanArgs& a, const Common& c) {
  ScanOptions opt;
  opt.orbits = a.orbits;
  opt.seed = c.seed;
  opt.exec = c.exec();
  opt.checkpoints.clear();
  for (double v : parse_list(a.checkpoints)) opt.checkpoints.push_back(std::llround(v));
  ScanResult res;
  if (a.ensemble == "near-splitting") {
    const auto build = hard_ball_system(a.hb.params());
    res = splitting_scan(build.system, [&](Rng& rng) { return near_splitting_hard_ball_phase(build, rng); }, opt);
  } else if (a.ensemble == "uniform") {
    if (c.system.empty()) throw UsageError("the uniform ensemble needs --system");
    const auto system = load_valid(c.system);
    const FlowGeometry geom(system);
    res = splitting_scan(system, [&](Rng& rng) { return random_phase(geom, rng); }, opt);
  } else {
    throw UsageError("unknown ensemble " + a.ensemble);
  }
  Report r;
  r.kv("seed", c.seed).kv("ensemble", a.ensemble).kv("orbits", a.orbits);
  r.kv("valid_orbits", res.valid).kv("degenerate_orbits", res.degenerate);
  r.out << YAML::Key << "checkpoints" << YAML::Value << YAML::BeginSeq;
  const auto fr = res.fractions();
  for (std::size_t i = 0; i < res.checkpoints.size(); ++i) {
    r.out << YAML::BeginMap;
    r.kv("collisions", res.checkpoints[i]).kv("splitting", res.split[i]).kv("fraction", fr[i]);
    r.out << YAML::EndMap;
    r.summary.push_back(fmt::format("{} collisions: splitting fraction {:.4f}", res.checkpoints[i], fr[i]));
  }
  r.out << YAML::EndSeq;
  emit(r, c.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cylindric billiards on flat tori"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_system) {
    auto* opt = sub->add_option("--system", common.system, "system file");
    if (needs_system) opt->required();
    sub->add_option("-o,--out", common.out, "output file (default stdout)");
    sub->add_option("--seed", common.seed, "master seed");
    sub->add_flag("--serial", common.serial, "use the serial kernels");
  };

  auto* classify = app.add_subcommand("classify", "transitivity, transverseness, commutant");
  add_common(classify, true);

  auto* build = app.add_subcommand("build", "construct a system file");
  build->require_subcommand(1);
  HardBallArgs hb;
  auto* hardball = build->add_subcommand("hardball", "hard-ball system");
  add_common(hardball, false);
  hardball->add_option("--n", hb.n, "number of balls");
  hardball->add_option("--nu", hb.nu, "torus dimension");
  hardball->add_option("--masses", hb.masses, "comma-separated masses (default all 1)");
  hardball->add_option("--r", hb.r, "ball radius");
  std::string blocks;
  auto* directsum = build->add_subcommand("directsum", "direct-sum system from a blocks file");
  add_common(directsum, false);
  directsum->add_option("--blocks", blocks, "blocks file")->required();
  std::string indices;
  auto* subbilliard = build->add_subcommand("subbilliard", "factor system of a cylinder subset");
  add_common(subbilliard, true);
  subbilliard->add_option("--indices", indices, "comma-separated 0-based cylinder indices")->required();

  SampleArgs sa;
  auto add_sampling = [&](CLI::App* sub) {
    add_common(sub, true);
    sub->add_option("--sigma", sa.sigma, "symbolic sequence file")->required();
    sub->add_option("--samples", sa.samples, "number of sampled paths")->check(CLI::PositiveNumber);
    sub->add_option("--box", sa.box, "offset box half-width (default 3 max r)");
    sub->add_option("--measure", sa.measure, "box or constructive")->check(CLI::IsMember({"box", "constructive"}));
  };
  auto* delta = app.add_subcommand("delta", "typical dimension of W+");
  add_sampling(delta);
  auto* rich = app.add_subcommand("rich", "richness test; exit 1 when not rich");
  add_sampling(rich);

  std::string sigma_path, spec_path;
  auto* tr = app.add_subcommand("trace", "trace one Euclidean path");
  add_common(tr, true);
  tr->add_option("--sigma", sigma_path, "symbolic sequence file")->required();
  tr->add_option("--spec", spec_path, "path spec file")->required();

  InitArgs init;
  long long collisions = -1;
  double time = 0.0;
  std::string csv;
  auto* simulate = app.add_subcommand("simulate", "toroidal flow");
  add_common(simulate, true);
  simulate->add_option("--init", init.init, "phase file");
  simulate->add_flag("--random", init.random, "random initial phase from --seed");
  simulate->add_option("--collisions", collisions, "stop after this many collisions");
  simulate->add_option("--time", time, "stop at this time");
  simulate->add_option("--csv", csv, "flat event table");

  LyapunovOptions lo;
  auto* lyap = app.add_subcommand("lyapunov", "largest Lyapunov exponent");
  add_common(lyap, true);
  lyap->add_option("--init", init.init, "phase file");
  lyap->add_flag("--random", init.random, "random initial phase from --seed");
  lyap->add_option("--time", lo.total_time, "total time")->check(CLI::PositiveNumber);
  lyap->add_option("--dt", lo.renorm_dt, "renormalisation interval")->check(CLI::PositiveNumber);
  lyap->add_option("--d0", lo.d0, "initial separation (<= 1e-8)");

  ScanArgs scan;
  auto* sc = app.add_subcommand("splitting-scan", "fraction of orbits admitting a splitting");
  add_common(sc, false);
  sc->add_option("--orbits", scan.orbits, "number of orbits")->check(CLI::PositiveNumber);
  sc->add_option("--checkpoints", scan.checkpoints, "comma-separated collision counts");
  sc->add_option("--ensemble", scan.ensemble, "uniform (needs --system) or near-splitting (hard balls)");
  sc->add_option("--n", scan.hb.n, "near-splitting: number of balls");
  sc->add_option("--masses", scan.hb.masses, "near-splitting: masses");
  sc->add_option("--r", scan.hb.r, "near-splitting: ball radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*classify) return cmd_classify(common);
    if (*hardball) return cmd_build_hardball(hb, common);
    if (*directsum) return cmd_build_directsum(blocks, common);
    if (*subbilliard) return cmd_build_subbilliard(indices, common);
    if (*delta) return cmd_delta(sa, common, false);
    if (*rich) return cmd_delta(sa, common, true);
    if (*tr) return cmd_trace(sigma_path, spec_path, common);
    if (*simulate) return cmd_simulate(init, collisions, time, csv, common);
    if (*lyap) return cmd_lyapunov(init, lo, common);
    if (*sc) return cmd_splitting_scan(scan, common);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const BuildError& e) {
    std::cerr << "build error: " << e.what() << "\n";
    return kValidation;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const DegenerateError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << "\n";
    return kDegenerate;
  } catch (const PathError& e) {
    std::cerr << "numerical degeneracy: " << e.what() << "\n";
    return kDegenerate;
  } catch (const EnumerationGuardError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kDegenerate;
  }
  return kUsage;
}

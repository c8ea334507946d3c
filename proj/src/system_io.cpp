#include "cylbill/system_io.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace cylbill {

ParseError::ParseError(const std::string& source, int line, int column, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}:{}: {}", source, line, column, message)), line(line), column(column) {}

namespace {

struct Doc {
  std::string source;
  YAML::Node root;

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const auto m = at.Mark();
    if (m.is_null()) throw ParseError(source, 1, 1, msg);
    throw ParseError(source, m.line + 1, m.column + 1, msg);
  }

  YAML::Node require(const YAML::Node& map, const char* key) const {
    if (!map.IsMap()) fail(map, "expected a mapping");
    YAML::Node n = map[key];
    if (!n) fail(map, fmt::format("missing field '{}'", key));
    return n;
  }

  template <typename T>
  T scalar(const YAML::Node& n, const char* what) const {
    if (!n.IsScalar()) fail(n, fmt::format("{}: expected a scalar", what));
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, fmt::format("{}: cannot read '{}'", what, n.Scalar()));
    }
  }

  Vec real_vector(const YAML::Node& n, const char* what, long expected = -1) const {
    if (!n.IsSequence()) fail(n, fmt::format("{}: expected a list", what));
    if (expected >= 0 && static_cast<long>(n.size()) != expected)
      fail(n, fmt::format("{}: expected {} entries, found {}", what, expected, n.size()));
    Vec v(static_cast<long>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) v(static_cast<long>(i)) = scalar<double>(n[i], what);
    return v;
  }

  IntVec int_vector(const YAML::Node& n, const char* what, long expected) const {
    if (!n.IsSequence()) fail(n, fmt::format("{}: expected a list", what));
    if (static_cast<long>(n.size()) != expected)
      fail(n, fmt::format("{}: expected {} entries, found {}", what, expected, n.size()));
    IntVec v(expected);
    for (std::size_t i = 0; i < n.size(); ++i) v(static_cast<long>(i)) = scalar<long long>(n[i], what);
    return v;
  }
};

Doc load(const std::string& text, const std::string& source) {
  Doc doc{source, {}};
  try {
    doc.root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  if (!doc.root || !doc.root.IsMap()) throw ParseError(source, 1, 1, "expected a mapping at top level");
  return doc;
}

void emit_vector(YAML::Emitter& out, const Vec& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (long i = 0; i < v.size(); ++i) out << v(i);
  out << YAML::EndSeq;
}

void emit_vector(YAML::Emitter& out, const IntVec& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (long i = 0; i < v.size(); ++i) out << v(i);
  out << YAML::EndSeq;
}

YAML::Emitter& emitter(YAML::Emitter& out) {
  out.SetDoublePrecision(17);
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

CylindricBilliardSystem parse_system(const std::string& text, const std::string& source) {
  const Doc doc = load(text, source);
  const YAML::Node dim_node = doc.require(doc.root, "dim");
  const int d = doc.scalar<int>(dim_node, "dim");
  if (d < 1) doc.fail(dim_node, "dim must be positive");

  const YAML::Node lb = doc.require(doc.root, "lattice_basis");
  if (!lb.IsSequence() || static_cast<int>(lb.size()) != d)
    doc.fail(lb, fmt::format("lattice_basis: expected {} rows", d));
  Mat basis(d, d);
  for (int i = 0; i < d; ++i) basis.row(i) = doc.real_vector(lb[static_cast<std::size_t>(i)], "lattice_basis row", d);
  Lattice lattice;
  try {
    lattice = Lattice(basis);
  } catch (const std::exception& e) {
    doc.fail(lb, e.what());
  }

  bool asserted = false;
  if (const YAML::Node a = doc.root["interior_connected_asserted"])
    asserted = doc.scalar<bool>(a, "interior_connected_asserted");

  std::vector<CylinderSpec> cylinders;
  const YAML::Node cyls = doc.require(doc.root, "cylinders");
  if (!cyls.IsSequence()) doc.fail(cyls, "cylinders: expected a list");
  for (const auto& node : cyls) {
    if (!node.IsMap()) doc.fail(node, "cylinder: expected a mapping");
    CylinderSpec c;
    const YAML::Node coeffs = node["generator_coeffs"];
    const YAML::Node real = node["generator_real"];
    if (coeffs && real) doc.fail(node, "cylinder: give generator_coeffs or generator_real, not both");
    if (coeffs) {
      if (!coeffs.IsSequence()) doc.fail(coeffs, "generator_coeffs: expected a list of integer vectors");
      for (const auto& g : coeffs) c.generator_coeffs.push_back(doc.int_vector(g, "generator_coeffs", d));
    } else if (real) {
      if (!real.IsSequence()) doc.fail(real, "generator_real: expected a list of vectors");
      Mat cols(d, static_cast<long>(real.size()));
      for (std::size_t j = 0; j < real.size(); ++j)
        cols.col(static_cast<long>(j)) = doc.real_vector(real[j], "generator_real", d);
      c.generator_real = cols;
    }
    const YAML::Node radius = doc.require(node, "radius");
    c.radius = doc.scalar<double>(radius, "radius");
    if (const YAML::Node t = node["translation"]) c.translation = doc.real_vector(t, "translation", d);
    if (const YAML::Node p = node["provenance"]) c.provenance = doc.scalar<std::string>(p, "provenance");
    cylinders.push_back(std::move(c));
  }
  try {
    return CylindricBilliardSystem(std::move(lattice), std::move(cylinders), asserted);
  } catch (const std::exception& e) {
    doc.fail(cyls, e.what());
  }
}

CylindricBilliardSystem read_system(const std::string& path) { return parse_system(read_file(path), path); }

std::string format_system(const CylindricBilliardSystem& system) {
  YAML::Emitter out;
  emitter(out);
  const int d = system.dim();
  out << YAML::BeginMap;
  out << YAML::Key << "dim" << YAML::Value << d;
  out << YAML::Key << "lattice_basis" << YAML::Value << YAML::BeginSeq;
  for (int i = 0; i < d; ++i) emit_vector(out, Vec(system.lattice().basis().row(i).transpose()));
  out << YAML::EndSeq;
  out << YAML::Key << "interior_connected_asserted" << YAML::Value << system.interior_connected_asserted();
  out << YAML::Key << "cylinders" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : system.cylinders()) {
    out << YAML::BeginMap;
    if (c.generator_real) {
      out << YAML::Key << "generator_real" << YAML::Value << YAML::BeginSeq;
      for (long j = 0; j < c.generator_real->cols(); ++j) emit_vector(out, Vec(c.generator_real->col(j)));
      out << YAML::EndSeq;
    } else {
      out << YAML::Key << "generator_coeffs" << YAML::Value << YAML::BeginSeq;
      for (const auto& g : c.generator_coeffs) emit_vector(out, g);
      out << YAML::EndSeq;
    }
    out << YAML::Key << "radius" << YAML::Value << c.radius;
    out << YAML::Key << "translation" << YAML::Value;
    emit_vector(out, c.translation);
    if (!c.provenance.empty()) out << YAML::Key << "provenance" << YAML::Value << c.provenance;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

SymbolicSequence parse_sigma(const std::string& text, const std::string& source) {
  const Doc doc = load(text, source);
  const YAML::Node labels = doc.require(doc.root, "labels");
  if (!labels.IsSequence()) doc.fail(labels, "labels: expected a list");
  SymbolicSequence out;
  for (const auto& l : labels) out.push_back(doc.scalar<int>(l, "label"));
  return out;
}

SymbolicSequence read_sigma(const std::string& path) { return parse_sigma(read_file(path), path); }

std::string format_sigma(const SymbolicSequence& sigma) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "labels" << YAML::Value << YAML::Flow << sigma << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

EuclideanPathSpec parse_spec(const std::string& text, const std::string& source) {
  const Doc doc = load(text, source);
  EuclideanPathSpec spec;
  spec.v0 = doc.real_vector(doc.require(doc.root, "v0"), "v0");
  const YAML::Node offsets = doc.require(doc.root, "offsets");
  if (!offsets.IsSequence()) doc.fail(offsets, "offsets: expected a list");
  for (const auto& o : offsets) spec.offsets.push_back(doc.real_vector(o, "offset"));
  return spec;
}

EuclideanPathSpec read_spec(const std::string& path) { return parse_spec(read_file(path), path); }

std::string format_spec(const EuclideanPathSpec& spec) {
  YAML::Emitter out;
  emitter(out);
  out << YAML::BeginMap << YAML::Key << "v0" << YAML::Value;
  emit_vector(out, spec.v0);
  out << YAML::Key << "offsets" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : spec.offsets) emit_vector(out, o);
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

PhasePoint parse_phase(const std::string& text, const std::string& source) {
  const Doc doc = load(text, source);
  PhasePoint p;
  p.q = doc.real_vector(doc.require(doc.root, "q"), "q");
  const YAML::Node vn = doc.require(doc.root, "v");
  p.v = doc.real_vector(vn, "v", p.q.size());
  const double n = p.v.norm();
  if (!(n > 0.0)) doc.fail(vn, "v must be nonzero");
  p.v /= n;
  return p;
}

PhasePoint read_phase(const std::string& path) { return parse_phase(read_file(path), path); }

std::string format_path_result(std::span<const int> sigma, const EuclideanPathResult& result) {
  YAML::Emitter out;
  emitter(out);
  out << YAML::BeginMap;
  out << YAML::Key << "status" << YAML::Value << to_string(result.status);
  if (!result.ok()) out << YAML::Key << "failed_at" << YAML::Value << result.failed_at;
  out << YAML::Key << "labels" << YAML::Value << YAML::Flow << std::vector<int>(sigma.begin(), sigma.end());
  out << YAML::Key << "collisions" << YAML::Value << YAML::BeginSeq;
  for (std::size_t j = 0; j < result.times.size(); ++j) {
    out << YAML::BeginMap;
    out << YAML::Key << "time" << YAML::Value << result.times[j];
    out << YAML::Key << "point" << YAML::Value;
    emit_vector(out, result.points[j]);
    out << YAML::Key << "normal" << YAML::Value;
    emit_vector(out, result.normals[j]);
    out << YAML::Key << "velocity" << YAML::Value;
    emit_vector(out, result.velocities[j + 1]);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string format_trajectory(const TrajectoryRecord& record) {
  YAML::Emitter out;
  emitter(out);
  out << YAML::BeginMap;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "q" << YAML::Value;
  emit_vector(out, record.initial.q);
  out << YAML::Key << "v" << YAML::Value;
  emit_vector(out, record.initial.v);
  out << YAML::Key << "cell" << YAML::Value;
  emit_vector(out, record.initial_unwrap);
  out << YAML::EndMap;
  out << YAML::Key << "termination" << YAML::Value << to_string(record.termination);
  out << YAML::Key << "flags" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tangential_encountered" << YAML::Value << record.tangential_encountered;
  out << YAML::Key << "simultaneous_encountered" << YAML::Value << record.simultaneous_encountered;
  out << YAML::Key << "start_inside" << YAML::Value << record.start_inside;
  out << YAML::Key << "cascade_capped" << YAML::Value << record.cascade_capped;
  out << YAML::EndMap;
  out << YAML::Key << "final_time" << YAML::Value << record.final_time;
  out << YAML::Key << "symbolic" << YAML::Value << YAML::Flow << record.symbolic;
  out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
  for (const auto& ev : record.events) {
    out << YAML::BeginMap;
    out << YAML::Key << "time" << YAML::Value << ev.time;
    out << YAML::Key << "cylinder" << YAML::Value << ev.cylinder;
    out << YAML::Key << "image" << YAML::Value;
    emit_vector(out, ev.lattice_image);
    out << YAML::Key << "normal" << YAML::Value;
    emit_vector(out, ev.normal);
    out << YAML::Key << "position" << YAML::Value;
    emit_vector(out, ev.position);
    out << YAML::Key << "velocity" << YAML::Value;
    emit_vector(out, ev.v_after);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string format_trajectory_csv(const TrajectoryRecord& record) {
  std::string out;
  const long d = record.initial.q.size();
  out += "index,time,cylinder";
  for (const char* p : {"image", "normal", "position", "velocity"})
    for (long k = 0; k < d; ++k) out += fmt::format(",{}{}", p, k);
  out += '\n';
  for (std::size_t i = 0; i < record.events.size(); ++i) {
    const auto& ev = record.events[i];
    out += fmt::format("{},{:.17g},{}", i, ev.time, ev.cylinder);
    for (long k = 0; k < d; ++k) out += fmt::format(",{}", ev.lattice_image(k));
    for (const Vec* v : {&ev.normal, &ev.position, &ev.v_after})
      for (long k = 0; k < d; ++k) out += fmt::format(",{:.17g}", (*v)(k));
    out += '\n';
  }
  return out;
}

}  // namespace cylbill

#include "cylbill/classifier.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace cylbill {

namespace {

int ambient_of(std::span<const Subspace> bases, int ambient_dim) {
  if (bases.empty()) {
    if (ambient_dim < 1) throw DimensionError("empty base-space list needs an ambient dimension");
    return ambient_dim;
  }
  const int d = bases.front().ambient_dim();
  for (const auto& b : bases)
    if (b.ambient_dim() != d) throw DimensionError("base spaces have different ambient dimensions");
  if (ambient_dim >= 1 && ambient_dim != d) throw DimensionError("ambient dimension mismatch");
  return d;
}

Subspace first_axis(int d) {
  Mat e = Mat::Zero(d, 1);
  e(0, 0) = 1.0;
  return Subspace::from_orthonormal(e);
}

// P_E(A) == E, i.e. E ∩ A^⊥ = {0}.
bool projection_covers(const Subspace& e, const Subspace& a) {
  if (e.dim() == 0) return true;
  if (a.dim() < e.dim()) return false;
  Eigen::JacobiSVD<Mat> svd(e.basis().transpose() * a.basis());
  return svd.singularValues()(e.dim() - 1) >= tol::rank_rel;
}

std::vector<long long> fingerprint(const Subspace& s) {
  const Mat p = s.projector();
  std::vector<long long> key;
  key.reserve(static_cast<std::size_t>(p.size()) + 1);
  key.push_back(s.dim());
  for (long j = 0; j < p.cols(); ++j)
    for (long i = 0; i <= j; ++i) key.push_back(std::llround(p(i, j) / tol::containment));
  return key;
}

bool induced_connected(const Graph& g, const std::vector<int>& members) {
  if (members.size() <= 1) return true;
  std::vector<char> in(static_cast<std::size_t>(g.vertices), 0), seen(in.size(), 0);
  for (int m : members) in[static_cast<std::size_t>(m)] = 1;
  std::vector<int> stack{members.front()};
  seen[static_cast<std::size_t>(members.front())] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
      if (in[static_cast<std::size_t>(w)] && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == members.size();
}

std::vector<int> mask_members(unsigned long mask, int k) {
  std::vector<int> out;
  for (int i = 0; i < k; ++i)
    if ((mask >> i) & 1ul) out.push_back(i);
  return out;
}

struct SubsetScan {
  std::optional<std::vector<int>> smallest_violation;
  std::set<std::vector<long long>> spans;
};

void keep_smaller(std::optional<std::vector<int>>& best, std::vector<int> candidate) {
  if (!best || std::lexicographical_compare(candidate.begin(), candidate.end(), best->begin(), best->end()))
    best = std::move(candidate);
}

// Scans masks in [begin, end) with a private memo keyed on span(E+).
SubsetScan scan_subsets(std::span<const Subspace> bases, const std::vector<Subspace>& generators,
                        const Graph& graph, unsigned long begin, unsigned long end, unsigned long stride) {
  const int k = static_cast<int>(bases.size());
  const int d = bases.front().ambient_dim();
  SubsetScan out;
  std::map<std::vector<long long>, bool> memo;
  std::vector<Subspace> chosen;
  for (unsigned long mask = begin; mask < end; mask += stride) {
    std::vector<int> members = mask_members(mask, k);
    chosen.clear();
    for (int m : members) chosen.push_back(bases[static_cast<std::size_t>(m)]);
    const Subspace e_plus = span_of(chosen, d);
    bool ok;
    if (e_plus.dim() == d) {
      // Full span: transitive iff connected; otherwise no j0 can exist
      // because dim A_j <= d - 2.
      ok = induced_connected(graph, members);
    } else {
      auto key = fingerprint(e_plus);
      auto it = memo.find(key);
      if (it != memo.end()) {
        ok = it->second;
      } else {
        ok = false;
        for (const auto& a : generators) {
          if (projection_covers(e_plus, a)) {
            ok = true;
            break;
          }
        }
        memo.emplace(key, ok);
        out.spans.insert(std::move(key));
      }
    }
    if (!ok) keep_smaller(out.smallest_violation, std::move(members));
  }
  return out;
}

}  // namespace

void check_witness(const SplittingWitness& w, std::span<const Subspace> bases) {
  const int d = w.b1.ambient_dim();
  if (w.b2.ambient_dim() != d) throw std::logic_error("witness: parts live in different spaces");
  if (w.b1.dim() < 1 || w.b2.dim() < 1 || w.b1.dim() + w.b2.dim() != d)
    throw std::logic_error("witness: parts are not a non-trivial decomposition");
  if (!orthogonal(w.b1, w.b2)) throw std::logic_error("witness: parts are not orthogonal");
  for (const auto& [i, part] : w.assignment) {
    if (i < 0 || i >= static_cast<int>(bases.size())) throw std::logic_error("witness: bad index");
    const Subspace& host = part == 1 ? w.b1 : w.b2;
    if (!host.contains(bases[static_cast<std::size_t>(i)]))
      throw std::logic_error("witness: base space " + std::to_string(i) + " is not inside its part");
  }
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < vertices; ++i)
    for (int j : adjacency[static_cast<std::size_t>(i)])
      if (i < j) out.emplace_back(i, j);
  return out;
}

std::vector<std::vector<int>> Graph::components() const {
  std::vector<int> comp(static_cast<std::size_t>(vertices), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < vertices; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      out.back().push_back(v);
      for (int w : adjacency[static_cast<std::size_t>(v)]) {
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = id;
          stack.push_back(w);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

Graph non_orthogonality_graph(std::span<const Subspace> bases) {
  Graph g;
  g.vertices = static_cast<int>(bases.size());
  g.adjacency.assign(bases.size(), {});
  for (int i = 0; i < g.vertices; ++i) {
    for (int j = i + 1; j < g.vertices; ++j) {
      if (max_cosine(bases[static_cast<std::size_t>(i)], bases[static_cast<std::size_t>(j)]) >
          tol::containment) {
        g.adjacency[static_cast<std::size_t>(i)].push_back(j);
        g.adjacency[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  }
  return g;
}

TransitivityResult is_transitive(std::span<const Subspace> bases, int ambient_dim) {
  const int d = ambient_of(bases, ambient_dim);
  TransitivityResult out;
  SplittingWitness w;
  if (bases.empty()) {
    w.b1 = first_axis(d);
    w.b2 = complement(w.b1);
    w.degenerate = true;
    out.witness = std::move(w);
    return out;
  }
  const Subspace span = span_of(bases, d);
  if (span.dim() < d) {
    w.b1 = span.dim() > 0 ? span : first_axis(d);
    w.b2 = complement(w.b1);
    for (std::size_t i = 0; i < bases.size(); ++i)
      w.assignment[static_cast<int>(i)] = w.b1.contains(bases[i]) ? 1 : 2;
    check_witness(w, bases);
    out.witness = std::move(w);
    return out;
  }
  const auto comps = non_orthogonality_graph(bases).components();
  if (comps.size() == 1) {
    out.transitive = true;
    return out;
  }
  std::vector<Subspace> first;
  for (int i : comps.front()) first.push_back(bases[static_cast<std::size_t>(i)]);
  w.b1 = span_of(first, d);
  w.b2 = complement(w.b1);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (int i : comps[c]) w.assignment[i] = c == 0 ? 1 : 2;
  check_witness(w, bases);
  out.witness = std::move(w);
  return out;
}

int commutant_dimension(std::span<const Subspace> bases) {
  const int d = ambient_of(bases, -1);
  const int p = d * (d + 1) / 2;
  std::vector<std::pair<int, int>> params;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) params.emplace_back(i, j);

  // One block of p rows (upper triangle of XE - EX) per rotation generator E.
  std::vector<Mat> generators;
  for (const auto& b : bases) {
    const Mat& u = b.basis();
    for (long a = 0; a < u.cols(); ++a)
      for (long c = a + 1; c < u.cols(); ++c)
        generators.push_back(u.col(a) * u.col(c).transpose() - u.col(c) * u.col(a).transpose());
  }
  if (generators.empty()) return p;
  Mat constraints(static_cast<long>(generators.size()) * p, p);
  for (int col = 0; col < p; ++col) {
    Mat x = Mat::Zero(d, d);
    x(params[static_cast<std::size_t>(col)].first, params[static_cast<std::size_t>(col)].second) = 1.0;
    x(params[static_cast<std::size_t>(col)].second, params[static_cast<std::size_t>(col)].first) = 1.0;
    for (std::size_t g = 0; g < generators.size(); ++g) {
      const Mat c = x * generators[g] - generators[g] * x;
      for (int row = 0; row < p; ++row)
        constraints(static_cast<long>(g) * p + row, col) =
            c(params[static_cast<std::size_t>(row)].first, params[static_cast<std::size_t>(row)].second);
    }
  }
  // Triangularise first so the SVD runs on a p x p factor.
  Eigen::HouseholderQR<Mat> qr(constraints);
  const long rows = std::min<long>(constraints.rows(), p);
  const Mat r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
  return p - numerical_rank(r);
}

TransverseResult is_transverse(const CylindricBilliardSystem& system, Exec exec) {
  const auto bases = system.base_spaces();
  if (system.size() > kTransverseEnumerationGuard)
    throw EnumerationGuardError("is_transverse: " + std::to_string(system.size()) +
                                " cylinders exceed the enumeration guard of " +
                                std::to_string(kTransverseEnumerationGuard));
  return is_transverse(std::span<const Subspace>(bases), exec);
}

TransverseResult is_transverse(std::span<const Subspace> bases, Exec exec) {
  const int k = static_cast<int>(bases.size());
  if (k > kTransverseEnumerationGuard)
    throw EnumerationGuardError("is_transverse: " + std::to_string(k) +
                                " base spaces exceed the enumeration guard of " +
                                std::to_string(kTransverseEnumerationGuard));
  TransverseResult out;
  if (k == 0) return out;  // the empty system is not transitive
  ambient_of(bases, -1);
  std::vector<Subspace> generators;
  for (const auto& b : bases) generators.push_back(complement(b));
  const Graph graph = non_orthogonality_graph(bases);
  const unsigned long end = 1ul << k;

  SubsetScan merged;
  if (exec == Exec::serial) {
    merged = scan_subsets(bases, generators, graph, 1, end, 1);
  } else {
    const int threads = thread_budget();
    std::vector<SubsetScan> partial(static_cast<std::size_t>(threads));
#pragma omp parallel for num_threads(threads) schedule(static, 1)
    for (int t = 0; t < threads; ++t)
      partial[static_cast<std::size_t>(t)] =
          scan_subsets(bases, generators, graph, 1ul + static_cast<unsigned long>(t), end,
                       static_cast<unsigned long>(threads));
    for (auto& part : partial) {
      if (part.smallest_violation) keep_smaller(merged.smallest_violation, *part.smallest_violation);
      merged.spans.merge(part.spans);
    }
  }
  out.counterexample = merged.smallest_violation;
  out.transverse = !out.counterexample.has_value();
  out.distinct_spans = merged.spans.size();
  return out;
}

std::vector<int> distinct_labels(std::span<const int> labels) {
  std::vector<int> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<Subspace> bases_for(std::span<const int> labels, const CylindricBilliardSystem& system) {
  std::vector<Subspace> out;
  for (int l : labels) out.push_back(system.base_space(l));
  return out;
}

}  // namespace

bool is_transitive_sequence(std::span<const int> labels, const CylindricBilliardSystem& system) {
  const auto distinct = distinct_labels(labels);
  const auto bases = bases_for(distinct, system);
  return is_transitive(bases, system.dim()).transitive;
}

int count_transitive_blocks(std::span<const int> labels, const CylindricBilliardSystem& system) {
  int count = 0;
  std::set<int> current;
  for (int l : labels) {
    if (!current.insert(l).second) continue;
    const std::vector<int> members(current.begin(), current.end());
    if (is_transitive(bases_for(members, system), system.dim()).transitive) {
      ++count;
      current.clear();
    }
  }
  return count;
}

bool splits_according_to(std::span<const int> collided, const Subspace& b1, const Subspace& b2,
                         const CylindricBilliardSystem& system) {
  const int d = system.dim();
  if (b1.ambient_dim() != d || b2.ambient_dim() != d)
    throw std::invalid_argument("splitting: parts have the wrong ambient dimension");
  if (b1.dim() < 1 || b2.dim() < 1 || b1.dim() + b2.dim() != d || !orthogonal(b1, b2))
    throw std::invalid_argument("splitting: (B1, B2) is not a non-trivial orthogonal decomposition");
  for (int l : distinct_labels(collided)) {
    const Subspace& base = system.base_space(l);
    if (!b1.contains(base) && !b2.contains(base)) return false;
  }
  return true;
}

OrthogonalDecomposition orthogonal_decomposition(std::span<const int> labels,
                                                 const CylindricBilliardSystem& system) {
  const int d = system.dim();
  OrthogonalDecomposition out;
  const auto distinct = distinct_labels(labels);
  const auto bases = bases_for(distinct, system);
  for (const auto& comp : non_orthogonality_graph(bases).components()) {
    std::vector<int> group;
    std::vector<Subspace> members;
    for (int i : comp) {
      group.push_back(distinct[static_cast<std::size_t>(i)]);
      members.push_back(bases[static_cast<std::size_t>(i)]);
    }
    out.groups.push_back(std::move(group));
    out.parts.push_back(span_of(members, d));
  }
  out.e0 = complement(span_of(out.parts, d));
  return out;
}

}  // namespace cylbill

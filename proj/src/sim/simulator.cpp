#include "duphist/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "duphist/core/errors.hpp"
#include "duphist/subst/hky.hpp"

namespace duphist {

std::optional<DrawnEvent> draw_event(long len, const ModelParams& params, const SimSettings& settings,
                                     std::mt19937_64& rng) {
  if (len < 1) return std::nullopt;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<long> centroid(0, len - 1);
  std::geometric_distribution<long> dup_len(1.0 / params.mean_dup_length);
  std::geometric_distribution<long> dup_dist(1.0 / params.mean_dup_distance);
  std::geometric_distribution<long> del_len(1.0 / params.mean_del_length);
  DrawnEvent out;
  for (int restart = 0; restart < settings.max_event_restarts; ++restart) {
    const bool deletion = unif(rng) < params.p_deletion;
    for (int attempt = 0; attempt < settings.max_event_tries; ++attempt) {
      ++out.tries;
      BpEvent e;
      e.len_before = len;
      e.centroid = centroid(rng);
      if (deletion) {
        e.kind = BpEvent::Kind::deletion;
        long l = del_len(rng) + 1;
        e.begin = e.centroid - l / 2;
        e.end = e.begin + l;
        if (e.begin < 0 || e.end > len || l >= len) continue;
        out.event = e;
        return out;
      }
      e.kind = BpEvent::Kind::duplication;
      long l = dup_len(rng) + 1;
      long d = dup_dist(rng) + 1;
      e.inverted = unif(rng) < params.p_inversion;
      bool left_to_right = unif(rng) < 0.5;
      long width = l + d - 1;
      long left = e.centroid - width / 2;
      if (left < 0 || left + width > len) continue;
      e.distance = d;
      if (left_to_right) {
        e.begin = left;
        e.end = left + l;
        e.target = left + width;
      } else {
        e.target = left;
        e.begin = left + d - 1;
        e.end = e.begin + l;
      }
      out.event = e;
      return out;
    }
  }
  return std::nullopt;
}

namespace {

struct Piece {
  long anc_begin = 0;
  long anc_end = 0;
  bool reverse = false;
  long size() const { return anc_end - anc_begin; }
};

using Pieces = std::vector<Piece>;

// Splits pieces so that bp position p is a piece boundary; returns the index
// of the first piece at or after p. Inner cut points are recorded.
std::size_t cut(Pieces& pieces, long p, std::set<long>& breakpoints) {
  long offset = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (offset == p) return i;
    const Piece pc = pieces[i];
    if (p < offset + pc.size()) {
      long k = p - offset;
      Piece a = pc;
      Piece b = pc;
      if (!pc.reverse) {
        a.anc_end = pc.anc_begin + k;
        b.anc_begin = a.anc_end;
        breakpoints.insert(a.anc_end);
      } else {
        a.anc_begin = pc.anc_end - k;
        b.anc_end = a.anc_begin;
        breakpoints.insert(a.anc_begin);
      }
      pieces[i] = a;
      pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(i) + 1, b);
      return i + 1;
    }
    offset += pc.size();
  }
  if (offset == p) return pieces.size();
  throw InternalError("cut position beyond sequence end");
}

long total(const Pieces& pieces) {
  long n = 0;
  for (const auto& p : pieces) n += p.size();
  return n;
}

void apply_bp(Pieces& pieces, const BpEvent& e, std::set<long>& breakpoints) {
  if (e.kind == BpEvent::Kind::deletion) {
    std::size_t i = cut(pieces, e.begin, breakpoints);
    std::size_t j = cut(pieces, e.end, breakpoints);
    pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(i), pieces.begin() + static_cast<std::ptrdiff_t>(j));
    return;
  }
  cut(pieces, e.begin, breakpoints);
  cut(pieces, e.end, breakpoints);
  cut(pieces, e.target, breakpoints);
  std::size_t i = cut(pieces, e.begin, breakpoints);
  std::size_t j = cut(pieces, e.end, breakpoints);
  Pieces copy(pieces.begin() + static_cast<std::ptrdiff_t>(i), pieces.begin() + static_cast<std::ptrdiff_t>(j));
  if (e.inverted) {
    std::reverse(copy.begin(), copy.end());
    for (auto& p : copy) p.reverse = !p.reverse;
  }
  std::size_t t = cut(pieces, e.target, breakpoints);
  pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(t), copy.begin(), copy.end());
}

std::vector<double> node_times(const SpeciesTree& tree, double root_branch_length) {
  std::vector<double> bottom(static_cast<std::size_t>(tree.size()), 0.0);
  for (int v = 0; v < tree.size(); ++v) {
    int p = tree.node(v).parent;
    bottom[static_cast<std::size_t>(v)] =
        (p < 0 ? 0.0 : bottom[static_cast<std::size_t>(p)]) + tree.branch_length(v, root_branch_length);
  }
  return bottom;
}

// Index of the atom boundary at bp offset `bp` (must exist).
int boundary_index(const AtomicSequence& seq, const AtomCatalog& cat, long bp) {
  long offset = 0;
  for (int i = 0; i <= seq.size(); ++i) {
    if (offset == bp) return i;
    if (i == seq.size() || offset > bp) break;
    offset += cat.length(seq[i].type);
  }
  throw InternalError("event endpoint " + std::to_string(bp) + " is not an atom boundary");
}

}  // namespace

TruthAtomization truth_atomize(std::shared_ptr<const SpeciesTree> tree, long ancestral_length,
                               const std::vector<BpEvent>& events, double root_branch_length) {
  TruthAtomization out;
  // Breakpoints: replay the bp events over pieces, collecting cut points.
  std::set<long> bps{0, ancestral_length};
  {
    std::vector<Pieces> bottom(static_cast<std::size_t>(tree->size()));
    std::vector<Pieces> top(static_cast<std::size_t>(tree->size()));
    top[0] = Pieces{Piece{0, ancestral_length, false}};
    std::size_t k = 0;
    for (int v = 0; v < tree->size(); ++v) {
      Pieces seq = top[static_cast<std::size_t>(v)];
      for (; k < events.size() && events[k].branch == v; ++k) apply_bp(seq, events[k], bps);
      for (int c : tree->node(v).children) top[static_cast<std::size_t>(c)] = seq;
      bottom[static_cast<std::size_t>(v)] = std::move(seq);
    }
    if (k != events.size()) throw InternalError("bp events must be grouped by branch in preorder");
  }
  out.breakpoints.assign(bps.begin(), bps.end());
  std::vector<long> lengths;
  for (std::size_t i = 0; i + 1 < out.breakpoints.size(); ++i) lengths.push_back(out.breakpoints[i + 1] - out.breakpoints[i]);
  out.catalog = AtomCatalog(lengths);
  out.node_time = node_times(*tree, root_branch_length);

  AtomicSequence anc{tree->root(), {}};
  auto mint = [&](InstanceId parent, double birth) {
    auto id = static_cast<InstanceId>(out.lineage_parent.size());
    out.lineage_parent.push_back(parent);
    out.lineage_birth.push_back(birth);
    return id;
  };
  for (TypeId t = 0; t < out.catalog.type_count(); ++t) anc.atoms.push_back({mint(-1, 0.0), t, Strand::forward});
  out.history = History::empty(tree, anc);
  std::vector<AtomicSequence> top(static_cast<std::size_t>(tree->size()));
  top[0] = anc;
  out.extant.resize(static_cast<std::size_t>(tree->size()));
  std::size_t k = 0;
  for (int v = 0; v < tree->size(); ++v) {
    AtomicSequence seq = top[static_cast<std::size_t>(v)];
    for (; k < events.size() && events[k].branch == v; ++k) {
      const auto& e = events[k];
      int b = boundary_index(seq, out.catalog, e.begin);
      int en = boundary_index(seq, out.catalog, e.end);
      if (e.kind == BpEvent::Kind::deletion) {
        Deletion d{{b, en}};
        out.history.branch_events[static_cast<std::size_t>(v)].push_back(d);
        seq = apply_deletion(seq, d);
        continue;
      }
      Duplication d{{b, en}, boundary_index(seq, out.catalog, e.target), e.inverted, {}};
      out.history.branch_events[static_cast<std::size_t>(v)].push_back(d);
      IdSource unused(0);
      AtomicSequence next = apply_duplication(seq, d, unused);
      // Lineage: source atoms continue as fresh children, copies branch off.
      const Span src = d.shifted_source();
      const Span copy = d.copy_span();
      for (int i = 0; i < d.source.size(); ++i) {
        InstanceId old = seq[d.source.begin + i].id;
        next.atoms[static_cast<std::size_t>(src.begin + i)].id = mint(old, e.time);
        int ci = d.inverted ? copy.end - 1 - i : copy.begin + i;
        next.atoms[static_cast<std::size_t>(ci)].id = mint(old, e.time);
      }
      seq = std::move(next);
    }
    const auto& node = tree->node(v);
    for (int c : node.children) {
      AtomicSequence child = seq;
      child.species = c;
      for (auto& a : child.atoms) a.id = mint(a.id, out.node_time[static_cast<std::size_t>(v)]);
      top[static_cast<std::size_t>(c)] = std::move(child);
    }
    if (node.is_leaf()) out.extant[static_cast<std::size_t>(v)] = std::move(seq);
  }
  return out;
}

namespace {

std::string evolve(const std::string& dna, double t, const HkyParams& hky, std::mt19937_64& rng) {
  if (t <= 0.0) return dna;
  auto m = hky_transition(hky, t);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::string out = dna;
  for (auto& c : out) {
    int x = nucleotide_code(c);
    double r = unif(rng);
    int y = 0;
    while (y < 3 && r >= m[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]) {
      r -= m[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      ++y;
    }
    c = nucleotide_char(y);
  }
  return out;
}

}  // namespace

SimulatedCluster simulate_cluster(std::shared_ptr<const SpeciesTree> tree, const ModelParams& params,
                                  const SimSettings& settings, std::uint64_t seed) {
  if (settings.ancestral_length < 1) throw DomainError("ancestral length must be >= 1");
  SimulatedCluster out;
  out.species_tree = tree;
  std::mt19937_64 rng(seed);
  std::mt19937_64 subst_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  std::discrete_distribution<int> base(params.hky.pi.begin(), params.hky.pi.end());
  out.ancestral_dna.reserve(static_cast<std::size_t>(settings.ancestral_length));
  for (long i = 0; i < settings.ancestral_length; ++i) out.ancestral_dna.push_back(nucleotide_char(base(subst_rng)));

  auto times = node_times(*tree, params.root_branch_length);
  std::vector<long> lengths(static_cast<std::size_t>(tree->size()), 0);
  std::set<long> scratch;
  std::vector<Pieces> top(static_cast<std::size_t>(tree->size()));
  top[0] = Pieces{Piece{0, settings.ancestral_length, false}};
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int v = 0; v < tree->size(); ++v) {
    Pieces seq = top[static_cast<std::size_t>(v)];
    const double ell = tree->branch_length(v, params.root_branch_length);
    const double start = times[static_cast<std::size_t>(v)] - ell;
    std::poisson_distribution<int> count(params.lambda * ell);
    int k = params.lambda * ell > 0.0 ? count(rng) : 0;
    std::vector<double> when;
    for (int i = 0; i < k; ++i) when.push_back(start + unif(rng) * ell);
    std::sort(when.begin(), when.end());
    int ordinal = 0;
    for (double t : when) {
      auto drawn = draw_event(total(seq), params, settings, rng);
      if (!drawn) continue;
      BpEvent e = drawn->event;
      e.branch = v;
      e.ordinal = ordinal++;
      e.time = t;
      apply_bp(seq, e, scratch);
      out.events.push_back(e);
    }
    for (int c : tree->node(v).children) top[static_cast<std::size_t>(c)] = seq;
  }

  out.truth = truth_atomize(tree, settings.ancestral_length, out.events, params.root_branch_length);
  const auto& truth = out.truth;

  // Substitutions along each lineage, type by type.
  const auto& bps = truth.breakpoints;
  std::vector<std::string> dna(truth.lineage_parent.size());
  std::vector<char> needed(truth.lineage_parent.size(), 0);
  for (int leaf : tree->leaves()) {
    for (const auto& a : truth.extant[static_cast<std::size_t>(leaf)].atoms) {
      for (InstanceId v = a.id; v >= 0 && !needed[static_cast<std::size_t>(v)]; v = truth.lineage_parent[static_cast<std::size_t>(v)]) {
        needed[static_cast<std::size_t>(v)] = 1;
      }
    }
  }
  std::vector<TypeId> lineage_type(truth.lineage_parent.size(), -1);
  for (const auto& a : truth.history.ancestral.atoms) lineage_type[static_cast<std::size_t>(a.id)] = a.type;
  for (std::size_t v = 0; v < truth.lineage_parent.size(); ++v) {
    InstanceId p = truth.lineage_parent[v];
    if (p >= 0) lineage_type[v] = lineage_type[static_cast<std::size_t>(p)];
    if (!needed[v]) continue;
    if (p < 0) {
      TypeId t = lineage_type[v];
      dna[v] = out.ancestral_dna.substr(static_cast<std::size_t>(bps[static_cast<std::size_t>(t)]),
                                        static_cast<std::size_t>(truth.catalog.length(t)));
    } else {
      dna[v] = evolve(dna[static_cast<std::size_t>(p)], truth.lineage_birth[v] - truth.lineage_birth[static_cast<std::size_t>(p)],
                      params.hky, subst_rng);
    }
  }

  long atom_id = 0;
  std::map<TypeId, std::vector<std::pair<InstanceId, long>>> leaves_by_type;
  for (int leaf : tree->leaves()) {
    const auto& seq = truth.extant[static_cast<std::size_t>(leaf)];
    const double end_time = truth.node_time[static_cast<std::size_t>(leaf)];
    FastaRecord rec{tree->name(leaf), {}};
    for (const auto& a : seq.atoms) {
      std::string s = evolve(dna[static_cast<std::size_t>(a.id)], end_time - truth.lineage_birth[static_cast<std::size_t>(a.id)],
                             params.hky, subst_rng);
      long start = static_cast<long>(rec.sequence.size());
      rec.sequence += a.strand == Strand::forward ? s : reverse_complement(s);
      out.truth_atoms.push_back(
          {atom_id, a.type, tree->name(leaf), tree->name(leaf), start, static_cast<long>(rec.sequence.size()), a.strand});
      leaves_by_type[a.type].emplace_back(a.id, atom_id);
      ++atom_id;
    }
    out.extant_fastas.push_back(std::move(rec));
  }

  // True segment trees: split times are the birth times of the split's children.
  std::vector<std::vector<InstanceId>> children(truth.lineage_parent.size());
  for (std::size_t v = 0; v < truth.lineage_parent.size(); ++v) {
    InstanceId p = truth.lineage_parent[v];
    if (p >= 0 && needed[v]) children[static_cast<std::size_t>(p)].push_back(static_cast<InstanceId>(v));
  }
  std::map<InstanceId, std::pair<long, double>> leaf_info;
  {
    std::size_t i = 0;
    for (int leaf : tree->leaves()) {
      for (const auto& a : truth.extant[static_cast<std::size_t>(leaf)].atoms) {
        leaf_info[a.id] = {out.truth_atoms[i].atom_id, truth.node_time[static_cast<std::size_t>(leaf)]};
        ++i;
      }
    }
  }
  for (const auto& [type, members] : leaves_by_type) {
    std::set<InstanceId> in_type;
    for (const auto& m : members) {
      for (InstanceId x = m.first; x >= 0 && in_type.insert(x).second; x = truth.lineage_parent[static_cast<std::size_t>(x)]) {
      }
    }
    InstanceId root = members.front().first;
    while (truth.lineage_parent[static_cast<std::size_t>(root)] >= 0) root = truth.lineage_parent[static_cast<std::size_t>(root)];
    Tree topo;
    std::function<void(InstanceId, int, double)> build = [&](InstanceId v, int parent, double parent_time) {
      std::vector<InstanceId> kids;
      while (true) {
        kids.clear();
        if (leaf_info.count(v)) break;
        for (InstanceId c : children[static_cast<std::size_t>(v)]) {
          if (in_type.count(c)) kids.push_back(c);
        }
        if (kids.size() != 1) break;
        v = kids.front();
      }
      auto it = leaf_info.find(v);
      if (it != leaf_info.end()) {
        int id = static_cast<int>(it->second.first);
        topo.add_node(parent, it->second.second - parent_time, std::to_string(id), id);
        return;
      }
      double t = truth.lineage_birth[static_cast<std::size_t>(kids.front())];
      int idx = topo.add_node(parent, parent < 0 ? t : t - parent_time, {}, -1);
      for (InstanceId c : kids) build(c, idx, t);
    };
    build(root, -1, 0.0);
    out.segment_tree_types.push_back(type);
    out.truth_segment_trees.push_back(std::move(topo));
  }
  return out;
}

std::vector<int> focal_lineage(const SpeciesTree& tree) {
  std::vector<int> out{tree.root()};
  int v = tree.root();
  while (!tree.is_leaf(v)) {
    v = tree.node(v).children.front();
    out.push_back(v);
  }
  return out;
}

}  // namespace duphist

#include "duphist/core/history.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>

#include "duphist/core/errors.hpp"

namespace duphist {

History History::empty(std::shared_ptr<const SpeciesTree> tree, AtomicSequence ancestral) {
  History h;
  const int n = tree->size();
  h.branch_events.resize(static_cast<std::size_t>(n));
  h.speciations.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const auto& node = tree->node(v);
    auto& s = h.speciations[static_cast<std::size_t>(v)];
    s.parent = v;
    if (!node.is_leaf()) {
      s.child_a = node.children[0];
      s.child_b = node.children[1];
    }
  }
  ancestral.species = tree->root();
  h.ancestral = std::move(ancestral);
  h.species_tree = std::move(tree);
  return h;
}

int History::step_count() const {
  int n = 0;
  for (const auto& events : branch_events) {
    for (const auto& e : events) n += std::holds_alternative<Duplication>(e) ? 1 : 0;
  }
  for (int v = 0; v < branch_count(); ++v) n += species_tree->is_leaf(v) ? 0 : 1;
  return n;
}

std::vector<BranchCounts> branch_counts(const History& h) {
  std::vector<BranchCounts> out(static_cast<std::size_t>(h.branch_count()));
  for (int v = 0; v < h.branch_count(); ++v) {
    auto& c = out[static_cast<std::size_t>(v)];
    for (const auto& e : h.branch_events[static_cast<std::size_t>(v)]) {
      if (const auto* d = std::get_if<Duplication>(&e)) {
        ++c.duplications;
        if (d->coupled_deletion) ++c.deletions;
      } else {
        ++c.deletions;
      }
    }
    int p = h.species_tree->node(v).parent;
    if (p >= 0) {
      const auto& s = h.speciations[static_cast<std::size_t>(p)];
      c.deletions += static_cast<int>(v == s.child_a ? s.deletions_a.size() : s.deletions_b.size());
    }
  }
  return out;
}

namespace {

class Replayer {
 public:
  explicit Replayer(Replay& r) : r_{r} {}

  InstanceId mint(InstanceId parent, TypeId type) {
    auto id = static_cast<InstanceId>(r_.parent.size());
    r_.parent.push_back(parent);
    r_.type.push_back(type);
    return id;
  }

  AtomicSequence duplicate(const AtomicSequence& seq, const Duplication& d) {
    check_duplication(seq.size(), d);
    AtomicSequence relabeled = seq;
    for (int i = d.source.begin; i < d.source.end; ++i) {
      auto& a = relabeled.atoms[static_cast<std::size_t>(i)];
      a.id = mint(a.id, a.type);
    }
    std::vector<AtomInstance> copy(seq.atoms.begin() + d.source.begin, seq.atoms.begin() + d.source.end);
    if (d.inverted) {
      std::reverse(copy.begin(), copy.end());
      for (auto& a : copy) a.strand = flip(a.strand);
    }
    for (auto& a : copy) a.id = mint(a.id, a.type);
    AtomicSequence out{seq.species, {}};
    out.atoms.insert(out.atoms.end(), relabeled.atoms.begin(), relabeled.atoms.begin() + d.target);
    out.atoms.insert(out.atoms.end(), copy.begin(), copy.end());
    out.atoms.insert(out.atoms.end(), relabeled.atoms.begin() + d.target, relabeled.atoms.end());
    if (d.coupled_deletion) {
      out.atoms.erase(out.atoms.begin() + d.coupled_deletion->begin, out.atoms.begin() + d.coupled_deletion->end);
    }
    return out;
  }

  AtomicSequence speciate(const AtomicSequence& parent, int child, const std::vector<Span>& deletions) {
    AtomicSequence out = parent;
    out.species = child;
    for (auto& a : out.atoms) a.id = mint(a.id, a.type);
    return apply_speciation_deletions(out, deletions);
  }

 private:
  Replay& r_;
};

}  // namespace

AtomicSequence root_node_sequence(const History& h) {
  const auto& tree = *h.species_tree;
  if (tree.is_leaf(tree.root())) return h.ancestral;
  return replay(h).bottom.at(static_cast<std::size_t>(tree.root()));
}

Replay replay(const History& h) {
  const auto& tree = *h.species_tree;
  if (h.branch_count() != tree.size() || static_cast<int>(h.speciations.size()) != tree.size()) {
    throw ValidityError("history does not match its species tree");
  }
  Replay r;
  r.top.resize(static_cast<std::size_t>(tree.size()));
  r.bottom.resize(static_cast<std::size_t>(tree.size()));
  Replayer rep{r};
  AtomicSequence anc{tree.root(), {}};
  for (const auto& a : h.ancestral.atoms) anc.atoms.push_back({rep.mint(-1, a.type), a.type, a.strand});
  r.top[static_cast<std::size_t>(tree.root())] = std::move(anc);
  // Species-tree ids are preorder, so parents are finished before children.
  for (int v = 0; v < tree.size(); ++v) {
    AtomicSequence seq = r.top[static_cast<std::size_t>(v)];
    for (const auto& e : h.branch_events[static_cast<std::size_t>(v)]) {
      if (const auto* d = std::get_if<Duplication>(&e)) {
        seq = rep.duplicate(seq, *d);
      } else {
        seq = apply_deletion(seq, std::get<Deletion>(e));
      }
    }
    const auto& node = tree.node(v);
    if (!node.is_leaf()) {
      const auto& s = h.speciations[static_cast<std::size_t>(v)];
      if (s.parent != v || s.child_a != node.children[0] || s.child_b != node.children[1]) {
        throw ValidityError("speciation at node '" + tree.name(v) + "' does not match the species tree");
      }
      r.top[static_cast<std::size_t>(s.child_a)] = rep.speciate(seq, s.child_a, s.deletions_a);
      r.top[static_cast<std::size_t>(s.child_b)] = rep.speciate(seq, s.child_b, s.deletions_b);
    }
    r.bottom[static_cast<std::size_t>(v)] = std::move(seq);
  }
  return r;
}

std::vector<Violation> validate_history(const History& h, const SequenceSet& extant) {
  std::vector<Violation> out;
  if (!h.species_tree) {
    out.push_back({"speciation-structure", "history has no species tree"});
    return out;
  }
  const auto& tree = *h.species_tree;
  std::set<TypeId> seen;
  for (const auto& a : h.ancestral.atoms) {
    if (!seen.insert(a.type).second) {
      out.push_back({"duplicate-ancestral-type", "type " + std::to_string(a.type) + " occurs twice in the ancestral sequence"});
    }
  }
  if (h.branch_count() != tree.size() || static_cast<int>(h.speciations.size()) != tree.size()) {
    out.push_back({"speciation-structure", "history branch count does not match the species tree"});
    return out;
  }
  for (int v = 0; v < tree.size(); ++v) {
    const auto& node = tree.node(v);
    if (node.is_leaf()) continue;
    const auto& s = h.speciations[static_cast<std::size_t>(v)];
    if (s.parent != v || s.child_a != node.children[0] || s.child_b != node.children[1]) {
      out.push_back({"speciation-structure", "speciation at '" + tree.name(v) + "' violates the species-tree order"});
    }
  }
  if (!out.empty()) return out;
  Replay r;
  try {
    r = replay(h);
  } catch (const Error& e) {
    out.push_back({"invalid-event", e.what()});
    return out;
  }
  for (int leaf : tree.leaves()) {
    auto it = extant.find(leaf);
    if (it == extant.end()) {
      out.push_back({"replay-mismatch", "no extant sequence for species '" + tree.name(leaf) + "'"});
      continue;
    }
    const auto& got = r.bottom[static_cast<std::size_t>(leaf)];
    if (!same_layout(got, it->second)) {
      out.push_back({"replay-mismatch", "species '" + tree.name(leaf) + "': replay gives [" + layout_string(got) +
                                            "], expected [" + layout_string(it->second) + "]"});
    }
  }
  return out;
}

Tree lineage_tree(const std::vector<InstanceId>& parent, const std::vector<InstanceId>& leaves,
                  const std::vector<int>& labels) {
  Tree out;
  if (leaves.empty()) return out;
  std::unordered_map<InstanceId, std::vector<InstanceId>> children;
  std::unordered_map<InstanceId, int> label_of;
  std::set<InstanceId> marked;
  InstanceId root = -1;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    label_of[leaves[i]] = labels[i];
    InstanceId v = leaves[i];
    while (marked.insert(v).second) {
      InstanceId p = parent[static_cast<std::size_t>(v)];
      if (p < 0) {
        if (root >= 0 && root != v) throw InternalError("lineage leaves do not share an ancestral atom");
        root = v;
        break;
      }
      children[p].push_back(v);
      v = p;
    }
  }
  for (auto& [v, ch] : children) std::sort(ch.begin(), ch.end());
  auto skip_unary = [&](InstanceId v) {
    while (!label_of.count(v) && children[v].size() == 1) v = children[v].front();
    return v;
  };
  std::function<void(InstanceId, int)> build = [&](InstanceId v, int tree_parent) {
    v = skip_unary(v);
    auto it = label_of.find(v);
    int idx = out.add_node(tree_parent, 0.0, {}, it != label_of.end() ? it->second : -1);
    if (it != label_of.end()) {
      out.node(idx).label = std::to_string(it->second);
      return;
    }
    for (InstanceId c : children[v]) build(c, idx);
  };
  build(root, -1);
  return out;
}

double log_unwind_orders(const History& h) {
  const auto& tree = *h.species_tree;
  // below[v]: steps that must be unwound before the first step of branch v.
  std::vector<double> below(static_cast<std::size_t>(tree.size()), 0.0);
  std::vector<double> total(static_cast<std::size_t>(tree.size()), 0.0);
  double log_denominator = 0.0;
  auto postorder = [&] {
    std::vector<int> order(static_cast<std::size_t>(tree.size()));
    for (int v = 0; v < tree.size(); ++v) order[static_cast<std::size_t>(v)] = tree.size() - 1 - v;
    return order;
  }();
  for (int v : postorder) {
    const auto& node = tree.node(v);
    double b = 0.0;
    if (!node.is_leaf()) {
      b = 1.0 + total[static_cast<std::size_t>(node.children[0])] + total[static_cast<std::size_t>(node.children[1])];
      log_denominator += std::log(b);
    }
    int k = 0;
    for (const auto& e : h.branch_events[static_cast<std::size_t>(v)]) k += std::holds_alternative<Duplication>(e) ? 1 : 0;
    for (int j = 1; j <= k; ++j) log_denominator += std::log(b + j);
    below[static_cast<std::size_t>(v)] = b;
    total[static_cast<std::size_t>(v)] = b + k;
  }
  double n = total[static_cast<std::size_t>(tree.root())];
  return std::lgamma(n + 1.0) - log_denominator;
}

}  // namespace duphist

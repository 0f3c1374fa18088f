#include "duphist/io/tubetree.hpp"

#include <fmt/format.h>

#include <cmath>

#include "duphist/core/events.hpp"

namespace duphist {

namespace {

struct Row {
  std::string name;
  AtomicSequence seq;
  std::vector<int> origin;  // index in the previous row, -1 for none
};

std::string fill(TypeId t) {
  double hue = std::fmod(static_cast<double>(t) * 0.618033988749895, 1.0);
  return fmt::format("{:.3f} 0.45 0.95", hue);
}

std::vector<int> duplication_origins(int pre_size, const Duplication& d) {
  const int len = d.source.size();
  const Span copy = d.copy_span();
  std::vector<int> mid;
  for (int p = 0; p < pre_size + len; ++p) {
    if (copy.contains(p)) {
      int k = p - copy.begin;
      mid.push_back(d.source.begin + (d.inverted ? len - 1 - k : k));
    } else {
      mid.push_back(p < copy.begin ? p : p - len);
    }
  }
  if (d.coupled_deletion) mid.erase(mid.begin() + d.coupled_deletion->begin, mid.begin() + d.coupled_deletion->end);
  return mid;
}

std::vector<int> kept_positions(int n, const std::vector<Span>& deletions) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    bool gone = false;
    for (const auto& s : deletions) gone = gone || s.contains(i);
    if (!gone) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string tube_tree_dot(const History& h) {
  const SpeciesTree& tree = *h.species_tree;
  std::vector<std::vector<Row>> rows(static_cast<std::size_t>(tree.size()));
  std::vector<AtomicSequence> top(static_cast<std::size_t>(tree.size()));
  std::vector<std::vector<int>> top_origin(static_cast<std::size_t>(tree.size()));
  top[0] = h.ancestral;
  IdSource ids(1 << 24);
  for (int v = 0; v < tree.size(); ++v) {
    auto& r = rows[static_cast<std::size_t>(v)];
    r.push_back({"entry", top[static_cast<std::size_t>(v)], top_origin[static_cast<std::size_t>(v)]});
    const auto& events = h.branch_events[static_cast<std::size_t>(v)];
    for (std::size_t k = 0; k < events.size(); ++k) {
      const AtomicSequence& pre = r.back().seq;
      if (const auto* d = std::get_if<Duplication>(&events[k])) {
        r.push_back({fmt::format("dup {}", k), apply_duplication(pre, *d, ids), duplication_origins(pre.size(), *d)});
      } else {
        const auto& del = std::get<Deletion>(events[k]);
        r.push_back({fmt::format("del {}", k), apply_deletion(pre, del), kept_positions(pre.size(), {del.span})});
      }
    }
    if (tree.is_leaf(v)) continue;
    const auto& s = h.speciations[static_cast<std::size_t>(v)];
    const auto& bottom = r.back().seq;
    for (auto [child, dels] : {std::pair{s.child_a, &s.deletions_a}, std::pair{s.child_b, &s.deletions_b}}) {
      top[static_cast<std::size_t>(child)] = apply_speciation_deletions(bottom, *dels);
      top[static_cast<std::size_t>(child)].species = child;
      top_origin[static_cast<std::size_t>(child)] = kept_positions(bottom.size(), *dels);
    }
  }

  auto node_id = [](int v, std::size_t row, int pos) { return fmt::format("n{}_{}_{}", v, row, pos); };
  std::string out = "digraph tubetree {\n  rankdir=TB;\n  node [shape=box, style=filled, fontsize=10];\n";
  std::string edges;
  for (int v = 0; v < tree.size(); ++v) {
    const auto& r = rows[static_cast<std::size_t>(v)];
    out += fmt::format("  subgraph cluster_{} {{\n    label=\"{}\";\n", v, tree.name(v));
    for (std::size_t k = 0; k < r.size(); ++k) {
      const auto& seq = r[k].seq;
      out += fmt::format("    {{ rank=same; r{}_{} [shape=plaintext, style=\"\", label=\"{}\"];", v, k, r[k].name);
      for (int i = 0; i < seq.size(); ++i) {
        out += fmt::format(" {} [label=\"{}{}\", fillcolor=\"{}\"];", node_id(v, k, i), seq[i].type, strand_char(seq[i].strand),
                           fill(seq[i].type));
      }
      out += " }\n";
      std::string chain = fmt::format("r{}_{}", v, k);
      for (int i = 0; i < seq.size(); ++i) chain += " -> " + node_id(v, k, i);
      if (seq.size() > 0) out += "    " + chain + " [style=invis];\n";
      for (int i = 0; i < static_cast<int>(r[k].origin.size()); ++i) {
        int o = r[k].origin[static_cast<std::size_t>(i)];
        if (k > 0) {
          edges += fmt::format("  {} -> {};\n", node_id(v, k - 1, o), node_id(v, k, i));
        } else {
          int p = tree.node(v).parent;
          edges += fmt::format("  {} -> {};\n", node_id(p, rows[static_cast<std::size_t>(p)].size() - 1, o), node_id(v, k, i));
        }
      }
    }
    out += "  }\n";
  }
  return out + edges + "}\n";
}

}  // namespace duphist

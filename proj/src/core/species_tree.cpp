#include "duphist/core/species_tree.hpp"

#include <set>

#include "duphist/core/errors.hpp"

namespace duphist {

SpeciesTree SpeciesTree::single(std::string name) {
  SpeciesTree t;
  Node n;
  n.name = std::move(name);
  t.nodes_.push_back(std::move(n));
  return t;
}

SpeciesTree SpeciesTree::from_newick(std::string_view text) { return from_tree(parse_newick(text)); }

SpeciesTree SpeciesTree::from_tree(const Tree& tree) {
  if (tree.empty()) throw DataError("species tree: empty tree");
  SpeciesTree out;
  std::vector<int> map(static_cast<std::size_t>(tree.size()), -1);
  std::set<std::string> names;
  int anonymous = 0;
  for (int v : tree.preorder()) {
    const auto& src = tree.node(v);
    Node n;
    n.name = src.label;
    if (n.name.empty()) {
      if (src.is_leaf()) throw DataError("species tree: unnamed leaf");
      n.name = "anc" + std::to_string(anonymous++);
    }
    if (!names.insert(n.name).second) throw DataError("species tree: duplicate node name '" + n.name + "'");
    n.branch_length = src.length;
    if (!src.is_leaf() && src.children.size() != 2) {
      throw DataError("species tree: node '" + n.name + "' is not bifurcating");
    }
    if (v != tree.root() && !(n.branch_length > 0.0)) {
      throw DataError("species tree: branch above '" + n.name + "' must have positive length");
    }
    int id = static_cast<int>(out.nodes_.size());
    map[static_cast<std::size_t>(v)] = id;
    if (v != tree.root()) {
      n.parent = map[static_cast<std::size_t>(src.parent)];
      out.nodes_[static_cast<std::size_t>(n.parent)].children.push_back(id);
    }
    out.nodes_.push_back(std::move(n));
  }
  return out;
}

int SpeciesTree::find(std::string_view name) const {
  for (int v = 0; v < size(); ++v) {
    if (nodes_[static_cast<std::size_t>(v)].name == name) return v;
  }
  return -1;
}

std::vector<int> SpeciesTree::leaves() const {
  std::vector<int> out;
  for (int v = 0; v < size(); ++v) {
    if (is_leaf(v)) out.push_back(v);
  }
  return out;
}

std::string SpeciesTree::to_newick() const {
  Tree t;
  for (int v = 0; v < size(); ++v) {
    const auto& n = node(v);
    t.add_node(n.parent, v == root() ? 0.0 : n.branch_length, n.name);
  }
  return duphist::to_newick(t);
}

}  // namespace duphist

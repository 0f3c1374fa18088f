#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "duphist/core/tree.hpp"

namespace duphist {

// Rooted, bifurcating species tree. Node ids are preorder indices; the branch
// "above" node v is identified with v, so the root id also names the branch
// leading into the root from the ancestral sequence.
class SpeciesTree {
 public:
  struct Node {
    std::string name;
    int parent = -1;
    std::vector<int> children;
    double branch_length = 0.0;

    bool is_leaf() const { return children.empty(); }
  };

  SpeciesTree() = default;
  // A single species (no speciations).
  static SpeciesTree single(std::string name);
  static SpeciesTree from_newick(std::string_view text);
  static SpeciesTree from_tree(const Tree& tree);

  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return 0; }
  const Node& node(int v) const { return nodes_.at(static_cast<std::size_t>(v)); }
  const std::string& name(int v) const { return node(v).name; }
  // Returns -1 when absent.
  int find(std::string_view name) const;
  std::vector<int> leaves() const;
  bool is_leaf(int v) const { return node(v).is_leaf(); }

  // Branch length above v, substituting the synthetic root branch for the root.
  double branch_length(int v, double root_branch_length) const {
    return v == root() ? root_branch_length : node(v).branch_length;
  }

  std::string to_newick() const;

 private:
  std::vector<Node> nodes_;
};

}  // namespace duphist

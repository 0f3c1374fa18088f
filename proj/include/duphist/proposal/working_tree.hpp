#pragma once

#include <unordered_map>
#include <vector>

#include "duphist/core/atoms.hpp"
#include "duphist/core/tree.hpp"

namespace duphist {

// Mutable unrooted guide tree for one atom type. Leaves are instance ids;
// two leaves form a cherry when they hang off the same node.
class WorkingTree {
 public:
  WorkingTree() = default;
  explicit WorkingTree(const Tree& tree);

  bool has_leaf(InstanceId id) const { return leaf_node_.count(id) > 0; }
  int leaf_count() const { return static_cast<int>(leaf_node_.size()); }
  bool cherry(InstanceId a, InstanceId b) const;
  // Sum of the two pendant branch lengths.
  double cherry_distance(InstanceId a, InstanceId b) const;
  // Removes a leaf, suppressing nodes left with one child and keeping the
  // root on a node of degree >= 3 where possible.
  void remove_leaf(InstanceId id);

  // Current tree (for tests and diagnostics).
  Tree to_tree() const;

 private:
  struct Node {
    int parent = -1;
    std::vector<int> children;
    double length = 0.0;
    InstanceId leaf = -1;
  };

  int node_of(InstanceId id) const;
  void detach(int child);
  void normalize_root();

  std::vector<Node> nodes_;
  int root_ = -1;
  std::unordered_map<InstanceId, int> leaf_node_;
};

}  // namespace duphist

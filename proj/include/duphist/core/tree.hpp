#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace duphist {

struct TreeNode {
  int parent = -1;
  std::vector<int> children;
  double length = 0.0;  // branch above this node
  std::string label;
  int id = -1;  // instance id for atom trees, -1 otherwise

  bool is_leaf() const { return children.empty(); }
};

// Rooted tree stored as a node vector. Unrooted trees use the same storage with
// the root placed on an internal node of degree >= 3 (or on the only edge when
// there are two leaves).
class Tree {
 public:
  Tree() = default;

  int add_node(int parent, double length = 0.0, std::string label = {}, int id = -1);

  int root() const { return root_; }
  void set_root(int r) { root_ = r; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }
  TreeNode& node(int i) { return nodes_.at(static_cast<std::size_t>(i)); }
  const TreeNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  std::vector<int> preorder() const;
  std::vector<int> postorder() const;
  std::vector<int> leaves() const;
  int leaf_count() const;

  // Drops nodes unreachable from the root and renumbers in preorder.
  Tree compacted() const;

 private:
  std::vector<TreeNode> nodes_;
  int root_ = -1;
};

// Newick with optional labels and branch lengths; multifurcations allowed.
// Throws ParseError with the offending position.
Tree parse_newick(std::string_view text);

// Key identifying the unrooted topology over leaf ids (TreeNode::id);
// independent of rooting, child order and degree-2 nodes.
std::string unrooted_topology_key(const Tree& tree);

// Labels are written verbatim; branch lengths with the given significant digits.
std::string to_newick(const Tree& tree, int precision = 10);

}  // namespace duphist

#include "duphist/proposal/working_tree.hpp"

#include <algorithm>
#include <functional>

#include "duphist/core/errors.hpp"

namespace duphist {

WorkingTree::WorkingTree(const Tree& tree) {
  if (tree.empty()) return;
  std::function<int(int, int, double)> copy = [&](int v, int parent, double extra) -> int {
    const auto& n = tree.node(v);
    if (!n.is_leaf() && n.children.size() == 1 && parent >= 0) return copy(n.children.front(), parent, extra + n.length);
    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back({parent, {}, n.length + extra, n.is_leaf() ? n.id : -1});
    if (n.is_leaf()) {
      if (n.id < 0) throw DataError("guide tree leaf without an instance id");
      if (!leaf_node_.emplace(n.id, idx).second) throw DataError("guide tree repeats instance " + std::to_string(n.id));
    }
    for (int c : n.children) {
      int ci = copy(c, idx, 0.0);
      nodes_[static_cast<std::size_t>(idx)].children.push_back(ci);
    }
    return idx;
  };
  root_ = copy(tree.root(), -1, 0.0);
  nodes_[static_cast<std::size_t>(root_)].length = 0.0;
  // A unary root is dropped.
  while (nodes_[static_cast<std::size_t>(root_)].children.size() == 1) {
    int c = nodes_[static_cast<std::size_t>(root_)].children.front();
    nodes_[static_cast<std::size_t>(root_)].children.clear();
    root_ = c;
    nodes_[static_cast<std::size_t>(c)].parent = -1;
    nodes_[static_cast<std::size_t>(c)].length = 0.0;
  }
  normalize_root();
}

int WorkingTree::node_of(InstanceId id) const {
  auto it = leaf_node_.find(id);
  return it == leaf_node_.end() ? -1 : it->second;
}

bool WorkingTree::cherry(InstanceId a, InstanceId b) const {
  if (a == b) return false;
  int x = node_of(a);
  int y = node_of(b);
  return x >= 0 && y >= 0 && nodes_[static_cast<std::size_t>(x)].parent == nodes_[static_cast<std::size_t>(y)].parent &&
         nodes_[static_cast<std::size_t>(x)].parent >= 0;
}

double WorkingTree::cherry_distance(InstanceId a, InstanceId b) const {
  if (!cherry(a, b)) throw InternalError("cherry distance of a non-cherry");
  return nodes_[static_cast<std::size_t>(node_of(a))].length + nodes_[static_cast<std::size_t>(node_of(b))].length;
}

void WorkingTree::detach(int child) {
  auto& n = nodes_[static_cast<std::size_t>(child)];
  if (n.parent < 0) return;
  auto& ch = nodes_[static_cast<std::size_t>(n.parent)].children;
  ch.erase(std::find(ch.begin(), ch.end(), child));
  n.parent = -1;
}

void WorkingTree::remove_leaf(InstanceId id) {
  int v = node_of(id);
  if (v < 0) throw InternalError("instance " + std::to_string(id) + " is not in the working tree");
  leaf_node_.erase(id);
  int p = nodes_[static_cast<std::size_t>(v)].parent;
  if (p < 0) {
    root_ = -1;
    return;
  }
  detach(v);
  auto& pn = nodes_[static_cast<std::size_t>(p)];
  if (pn.children.size() == 1) {
    int c = pn.children.front();
    if (p == root_) {
      if (!nodes_[static_cast<std::size_t>(c)].children.empty()) {
        detach(c);
        root_ = c;
        nodes_[static_cast<std::size_t>(c)].length = 0.0;
      }
    } else {
      int g = pn.parent;
      auto& gc = nodes_[static_cast<std::size_t>(g)].children;
      *std::find(gc.begin(), gc.end(), p) = c;
      nodes_[static_cast<std::size_t>(c)].parent = g;
      nodes_[static_cast<std::size_t>(c)].length += pn.length;
      pn.children.clear();
      pn.parent = -1;
    }
  }
  normalize_root();
}

void WorkingTree::normalize_root() {
  if (root_ < 0) return;
  auto& r = nodes_[static_cast<std::size_t>(root_)];
  if (r.children.size() != 2) return;
  int inner = -1;
  for (int c : r.children) {
    if (!nodes_[static_cast<std::size_t>(c)].children.empty()) {
      inner = c;
      break;
    }
  }
  if (inner < 0) return;
  int other = r.children[0] == inner ? r.children[1] : r.children[0];
  const double l = nodes_[static_cast<std::size_t>(inner)].length;
  r.children.clear();
  nodes_[static_cast<std::size_t>(inner)].parent = -1;
  nodes_[static_cast<std::size_t>(inner)].length = 0.0;
  nodes_[static_cast<std::size_t>(other)].parent = inner;
  nodes_[static_cast<std::size_t>(other)].length += l;
  nodes_[static_cast<std::size_t>(inner)].children.push_back(other);
  root_ = inner;
}

Tree WorkingTree::to_tree() const {
  Tree out;
  if (root_ < 0) return out;
  std::function<void(int, int)> build = [&](int v, int parent) {
    const auto& n = nodes_[static_cast<std::size_t>(v)];
    int idx = out.add_node(parent, n.length, n.leaf >= 0 ? std::to_string(n.leaf) : std::string{}, static_cast<int>(n.leaf));
    for (int c : n.children) build(c, idx);
  };
  build(root_, -1);
  return out;
}

}  // namespace duphist

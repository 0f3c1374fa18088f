#include "duphist/core/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "duphist/core/errors.hpp"

namespace duphist {

int Tree::add_node(int parent, double length, std::string label, int id) {
  auto index = static_cast<int>(nodes_.size());
  TreeNode n;
  n.parent = parent;
  n.length = length;
  n.label = std::move(label);
  n.id = id;
  nodes_.push_back(std::move(n));
  if (parent >= 0) {
    node(parent).children.push_back(index);
  } else if (root_ < 0) {
    root_ = index;
  }
  return index;
}

std::vector<int> Tree::preorder() const {
  std::vector<int> order;
  if (root_ < 0) return order;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    const auto& ch = node(v).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::vector<int> Tree::postorder() const {
  auto order = preorder();
  // Reverse preorder visits children before parents, which is all pruning needs.
  std::reverse(order.begin(), order.end());
  return order;
}

std::vector<int> Tree::leaves() const {
  std::vector<int> out;
  for (int v : preorder()) {
    if (node(v).is_leaf()) out.push_back(v);
  }
  return out;
}

int Tree::leaf_count() const { return static_cast<int>(leaves().size()); }

Tree Tree::compacted() const {
  Tree out;
  if (root_ < 0) return out;
  std::vector<int> map(nodes_.size(), -1);
  for (int v : preorder()) {
    const auto& n = node(v);
    int parent = n.parent >= 0 && v != root_ ? map[static_cast<std::size_t>(n.parent)] : -1;
    map[static_cast<std::size_t>(v)] = out.add_node(parent, n.length, n.label, n.id);
  }
  return out;
}

namespace {

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_{text} {}

  Tree parse() {
    skip_ws();
    parse_subtree(-1);
    skip_ws();
    if (peek() != ';') fail("expected ';'");
    ++pos_;
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after ';'");
    return std::move(tree_);
  }

 private:
  void parse_subtree(int parent) {
    int self = tree_.add_node(parent);
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      for (;;) {
        parse_subtree(self);
        skip_ws();
        char c = peek();
        if (c == ',') {
          ++pos_;
          continue;
        }
        if (c == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    skip_ws();
    tree_.node(self).label = parse_label();
    skip_ws();
    if (peek() == ':') {
      ++pos_;
      skip_ws();
      tree_.node(self).length = parse_number();
    }
  }

  std::string parse_label() {
    std::string label;
    if (peek() == '\'') {
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '\'') label.push_back(text_[pos_++]);
      if (pos_ >= text_.size()) fail("unterminated quoted label");
      ++pos_;
      return label;
    }
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ':' || c == ',' || c == ')' || c == '(' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      label.push_back(c);
      ++pos_;
    }
    return label;
  }

  double parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E') {
        ++pos_;
      } else {
        break;
      }
    }
    if (start == pos_) fail("expected branch length");
    std::string token(text_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      double value = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return value;
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed branch length '" + token + "'");
    }
    return 0.0;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  [[noreturn]] void fail(const std::string& what) const {
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("newick: " + what, line, column);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Tree tree_;
};

bool needs_quotes(const std::string& label) {
  return label.find_first_of(" :,();'[]") != std::string::npos;
}

void write_node(const Tree& tree, int v, std::ostringstream& out, int precision) {
  const auto& n = tree.node(v);
  if (!n.children.empty()) {
    out << '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) out << ',';
      write_node(tree, n.children[i], out, precision);
    }
    out << ')';
  }
  if (needs_quotes(n.label)) {
    out << '\'' << n.label << '\'';
  } else {
    out << n.label;
  }
  if (v != tree.root() || n.length != 0.0) {
    out << ':' << std::setprecision(precision) << n.length;
  }
}

}  // namespace

Tree parse_newick(std::string_view text) { return NewickParser(text).parse(); }

std::string to_newick(const Tree& tree, int precision) {
  std::ostringstream out;
  if (tree.root() >= 0) write_node(tree, tree.root(), out, precision);
  out << ';';
  return out.str();
}

}  // namespace duphist

namespace duphist {

std::string unrooted_topology_key(const Tree& tree) {
  const int n = tree.size();
  if (n == 0) return "";
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    int p = tree.node(v).parent;
    if (p >= 0 && v != tree.root()) {
      adj[static_cast<std::size_t>(v)].push_back(p);
      adj[static_cast<std::size_t>(p)].push_back(v);
    }
  }
  int start = -1;
  for (int v = 0; v < n; ++v) {
    if (tree.node(v).is_leaf() && (start < 0 || tree.node(v).id < tree.node(start).id)) start = v;
  }
  if (adj[static_cast<std::size_t>(start)].empty()) return std::to_string(tree.node(start).id);
  auto canon = [&](auto&& self, int u, int from) -> std::string {
    std::vector<std::string> parts;
    for (int w : adj[static_cast<std::size_t>(u)]) {
      if (w != from) parts.push_back(self(self, w, u));
    }
    if (parts.empty()) return std::to_string(tree.node(u).id);
    if (parts.size() == 1) return parts.front();
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
    return s + ")";
  };
  // A leaf used as root has exactly one neighbour.
  return std::to_string(tree.node(start).id) + ":" + canon(canon, adj[static_cast<std::size_t>(start)].front(), start);
}

}  // namespace duphist

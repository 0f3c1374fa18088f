#include "duphist/subst/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <boost/math/tools/minima.hpp>

#include "duphist/core/errors.hpp"
#include "duphist/subst/hky.hpp"

namespace duphist {

PatternAlignment compress_patterns(const std::vector<std::string>& rows) {
  PatternAlignment aln;
  aln.taxa = static_cast<int>(rows.size());
  if (rows.empty()) return aln;
  const std::size_t len = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != len) throw DataError("alignment rows differ in length");
  }
  aln.sites = static_cast<long>(len);
  std::map<std::vector<signed char>, double> counts;
  std::vector<signed char> column(rows.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t t = 0; t < rows.size(); ++t) column[t] = static_cast<signed char>(nucleotide_code(rows[t][i]));
    counts[column] += 1.0;
  }
  for (auto& [pattern, w] : counts) {
    aln.patterns.push_back(pattern);
    aln.weights.push_back(w);
  }
  return aln;
}

namespace {

using Vec4 = std::array<double, 4>;

struct Partial {
  std::vector<Vec4> v;
  std::vector<double> scale;
};

Partial leaf_partial(int taxon, const PatternAlignment& aln) {
  if (taxon < 0 || taxon >= aln.taxa) throw DataError("tree leaf " + std::to_string(taxon) + " has no alignment row");
  Partial p;
  p.v.resize(aln.patterns.size());
  p.scale.assign(aln.patterns.size(), 0.0);
  for (std::size_t k = 0; k < aln.patterns.size(); ++k) {
    int c = aln.patterns[k][static_cast<std::size_t>(taxon)];
    for (int x = 0; x < 4; ++x) p.v[k][static_cast<std::size_t>(x)] = (c < 0 || c == x) ? 1.0 : 0.0;
  }
  return p;
}

Partial ones(std::size_t n) {
  Partial p;
  p.v.assign(n, Vec4{1.0, 1.0, 1.0, 1.0});
  p.scale.assign(n, 0.0);
  return p;
}

// Returns P * d (state at the top of the branch).
Partial propagate(const Matrix4& m, const Partial& d) {
  Partial out;
  out.v.resize(d.v.size());
  out.scale = d.scale;
  for (std::size_t k = 0; k < d.v.size(); ++k) {
    for (int x = 0; x < 4; ++x) {
      const auto& row = m[static_cast<std::size_t>(x)];
      out.v[k][static_cast<std::size_t>(x)] = row[0] * d.v[k][0] + row[1] * d.v[k][1] + row[2] * d.v[k][2] + row[3] * d.v[k][3];
    }
  }
  return out;
}

// Returns d^T P (used to push an outside vector down a branch).
Partial propagate_down(const Matrix4& m, const Partial& d) {
  Partial out;
  out.v.resize(d.v.size());
  out.scale = d.scale;
  for (std::size_t k = 0; k < d.v.size(); ++k) {
    for (int y = 0; y < 4; ++y) {
      double s = 0.0;
      for (int x = 0; x < 4; ++x) s += d.v[k][static_cast<std::size_t>(x)] * m[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      out.v[k][static_cast<std::size_t>(y)] = s;
    }
  }
  return out;
}

void multiply_into(Partial& acc, const Partial& f) {
  for (std::size_t k = 0; k < acc.v.size(); ++k) {
    double mx = 0.0;
    for (int x = 0; x < 4; ++x) {
      acc.v[k][static_cast<std::size_t>(x)] *= f.v[k][static_cast<std::size_t>(x)];
      mx = std::max(mx, acc.v[k][static_cast<std::size_t>(x)]);
    }
    acc.scale[k] += f.scale[k];
    if (mx > 0.0 && mx < 1e-150) {
      for (auto& x : acc.v[k]) x /= mx;
      acc.scale[k] += std::log(mx);
    }
  }
}

double root_log_likelihood(const Partial& d, const PatternAlignment& aln, const HkyParams& params) {
  double ll = 0.0;
  for (std::size_t k = 0; k < d.v.size(); ++k) {
    double s = 0.0;
    for (int x = 0; x < 4; ++x) s += params.pi[static_cast<std::size_t>(x)] * d.v[k][static_cast<std::size_t>(x)];
    ll += aln.weights[k] * (std::log(s) + d.scale[k]);
  }
  return ll;
}

Partial pi_partial(std::size_t n, const HkyParams& params) {
  Partial p;
  p.v.assign(n, params.pi);
  p.scale.assign(n, 0.0);
  return p;
}

void check_leaves(const Tree& tree, const PatternAlignment& aln) {
  std::vector<int> seen(static_cast<std::size_t>(aln.taxa), 0);
  int count = 0;
  for (int v : tree.leaves()) {
    int id = tree.node(v).id;
    if (id < 0 || id >= aln.taxa) throw DataError("tree leaf " + std::to_string(id) + " has no alignment row");
    if (seen[static_cast<std::size_t>(id)]++) throw DataError("taxon " + std::to_string(id) + " appears twice in tree");
    ++count;
  }
  if (count != aln.taxa) throw DataError("tree leaves do not cover the alignment");
}

class Optimizer {
 public:
  Optimizer(Tree& tree, const PatternAlignment& aln, const HkyParams& params)
      : tree_{tree}, aln_{aln}, params_{params}, down_(static_cast<std::size_t>(tree.size())),
        up_(static_cast<std::size_t>(tree.size())) {}

  double run(int max_passes) {
    for (int v : tree_.postorder()) refresh_down(v);
    double prev = total();
    for (int pass = 0; pass < max_passes; ++pass) {
      visit(tree_.root(), pi_partial(aln_.patterns.size(), params_));
      double now = total();
      bool done = now - prev < 1e-8;
      prev = now;
      if (done) break;
    }
    return prev;
  }

 private:
  // down_[v]: conditional likelihood of v's subtree given the state at v.
  // up_[v]: the same vector pushed through v's branch (state at parent).
  void refresh_down(int v) {
    const auto& n = tree_.node(v);
    if (n.is_leaf()) {
      down_[static_cast<std::size_t>(v)] = leaf_partial(n.id, aln_);
    } else {
      Partial acc = ones(aln_.patterns.size());
      for (int c : n.children) multiply_into(acc, up_[static_cast<std::size_t>(c)]);
      down_[static_cast<std::size_t>(v)] = std::move(acc);
    }
    up_[static_cast<std::size_t>(v)] = propagate(hky_transition(params_, n.length), down_[static_cast<std::size_t>(v)]);
  }

  double total() const {
    return root_log_likelihood(down_[static_cast<std::size_t>(tree_.root())], aln_, params_);
  }

  double edge_log_likelihood(const Partial& outside, const Partial& below, double t) const {
    Matrix4 m = hky_transition(params_, t);
    double ll = 0.0;
    for (std::size_t k = 0; k < below.v.size(); ++k) {
      double s = 0.0;
      for (int x = 0; x < 4; ++x) {
        double inner = 0.0;
        for (int y = 0; y < 4; ++y) inner += m[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] * below.v[k][static_cast<std::size_t>(y)];
        s += outside.v[k][static_cast<std::size_t>(x)] * inner;
      }
      ll += aln_.weights[k] * (std::log(std::max(s, 1e-300)) + outside.scale[k] + below.scale[k]);
    }
    return ll;
  }

  // `above`: outside vector at u, including the root prior.
  void visit(int u, const Partial& above) {
    const auto children = tree_.node(u).children;
    for (int c : children) {
      Partial outside = above;
      for (int s : children) {
        if (s != c) multiply_into(outside, up_[static_cast<std::size_t>(s)]);
      }
      const Partial& below = down_[static_cast<std::size_t>(c)];
      auto objective = [&](double t) { return -edge_log_likelihood(outside, below, t); };
      auto best = boost::math::tools::brent_find_minima(objective, 1e-9, 10.0, 30);
      double t = best.first;
      if (edge_log_likelihood(outside, below, tree_.node(c).length) > -best.second) t = tree_.node(c).length;
      tree_.node(c).length = t;
      if (!tree_.node(c).is_leaf()) {
        visit(c, propagate_down(hky_transition(params_, t), outside));
        refresh_down(c);
      } else {
        up_[static_cast<std::size_t>(c)] = propagate(hky_transition(params_, t), below);
      }
    }
    if (u == tree_.root()) refresh_down(u);
  }

  Tree& tree_;
  const PatternAlignment& aln_;
  const HkyParams& params_;
  std::vector<Partial> down_;
  std::vector<Partial> up_;
};

// Compacts the tree, suppresses unary nodes and moves a degree-2 root onto an
// internal child, so every branch length is identifiable.
Tree unrooted_form(const Tree& in) {
  Tree out;
  if (in.empty()) return out;
  auto skip = [&](int v, double& len) {
    while (in.node(v).children.size() == 1) {
      v = in.node(v).children.front();
      len += in.node(v).length;
    }
    return v;
  };
  double dummy = 0.0;
  int root = skip(in.root(), dummy);
  const auto& rc = in.node(root).children;
  auto add = [&](auto&& self, int v, int parent, double len) -> void {
    v = skip(v, len);
    int idx = out.add_node(parent, len, in.node(v).label, in.node(v).id);
    for (int c : in.node(v).children) self(self, c, idx, in.node(c).length);
  };
  if (rc.size() == 2 && (!in.node(rc[0]).is_leaf() || !in.node(rc[1]).is_leaf())) {
    double l0 = 0.0;
    double l1 = 0.0;
    int a = skip(rc[0], l0);
    int b = skip(rc[1], l1);
    l0 += in.node(rc[0]).length;
    l1 += in.node(rc[1]).length;
    if (in.node(a).is_leaf()) {
      std::swap(a, b);
      std::swap(l0, l1);
    }
    int idx = out.add_node(-1, 0.0, in.node(a).label, in.node(a).id);
    for (int c : in.node(a).children) add(add, c, idx, in.node(c).length);
    add(add, b, idx, l0 + l1);
    return out;
  }
  add(add, root, -1, 0.0);
  return out;
}

}  // namespace

double pruning_log_likelihood(const Tree& tree, const PatternAlignment& aln, const HkyParams& params) {
  check_leaves(tree, aln);
  std::vector<Partial> down(static_cast<std::size_t>(tree.size()));
  for (int v : tree.postorder()) {
    const auto& n = tree.node(v);
    if (n.is_leaf()) {
      down[static_cast<std::size_t>(v)] = leaf_partial(n.id, aln);
      continue;
    }
    Partial acc = ones(aln.patterns.size());
    for (int c : n.children) {
      multiply_into(acc, propagate(hky_transition(params, tree.node(c).length), down[static_cast<std::size_t>(c)]));
    }
    down[static_cast<std::size_t>(v)] = std::move(acc);
  }
  return root_log_likelihood(down[static_cast<std::size_t>(tree.root())], aln, params);
}

double pruning_log_likelihood(const Tree& tree, const std::vector<std::string>& rows, const HkyParams& params) {
  return pruning_log_likelihood(tree, compress_patterns(rows), params);
}

double single_taxon_log_likelihood(const PatternAlignment& aln, const HkyParams& params) {
  double ll = 0.0;
  for (std::size_t k = 0; k < aln.patterns.size(); ++k) {
    int c = aln.patterns[k][0];
    if (c >= 0) ll += aln.weights[k] * std::log(params.pi[static_cast<std::size_t>(c)]);
  }
  return ll;
}

double optimize_branch_lengths(Tree& tree, const PatternAlignment& aln, const HkyParams& params, int max_passes) {
  check_leaves(tree, aln);
  if (tree.size() == 1) return single_taxon_log_likelihood(aln, params);
  return Optimizer{tree, aln, params}.run(max_passes);
}

double profile_log_likelihood(const Tree& tree, const PatternAlignment& aln, const HkyParams& params) {
  Tree work = unrooted_form(tree);
  for (int v = 0; v < work.size(); ++v) {
    if (v != work.root()) work.node(v).length = 0.01;
  }
  return optimize_branch_lengths(work, aln, params);
}

}  // namespace duphist

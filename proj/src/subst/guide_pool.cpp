#include "duphist/subst/guide_pool.hpp"

#include <cmath>
#include <future>
#include <random>

#include "duphist/core/errors.hpp"
#include "duphist/data/dataset.hpp"

namespace duphist {

Tree collapse_short_branches(const Tree& tree, long atom_length_bp, double threshold) {
  Tree out;
  if (tree.empty()) return out;
  auto short_internal = [&](int v) {
    const auto& n = tree.node(v);
    return !n.is_leaf() && n.length * static_cast<double>(atom_length_bp) < threshold;
  };
  auto attach = [&](auto&& self, int v, int parent) -> void {
    for (int c : tree.node(v).children) {
      if (short_internal(c)) {
        self(self, c, parent);
      } else {
        const auto& n = tree.node(c);
        int idx = out.add_node(parent, n.length, n.label, n.id);
        self(self, c, idx);
      }
    }
  };
  const auto& r = tree.node(tree.root());
  int root = out.add_node(-1, r.length, r.label, r.id);
  attach(attach, tree.root(), root);
  return out;
}

namespace {

Tree starting_tree(int n, double length) {
  Tree t;
  if (n == 1) {
    t.add_node(-1, 0.0, {}, 0);
    return t;
  }
  int root = t.add_node(-1);
  t.add_node(root, length, {}, 0);
  t.add_node(root, length, {}, 1);
  int attach = root;
  for (int i = 2; i < n; ++i) {
    if (i == n - 1) {
      t.add_node(attach, length, {}, i);
    } else {
      int inner = t.add_node(attach, length);
      t.add_node(inner, length, {}, i);
      attach = inner;
    }
  }
  return t;
}

void replace_child(Tree& t, int parent, int old_child, int new_child) {
  for (auto& c : t.node(parent).children) {
    if (c == old_child) c = new_child;
  }
  t.node(new_child).parent = parent;
}

}  // namespace

GuideTreePool sample_guide_tree_pool(TypeId type, const std::vector<InstanceId>& instance_ids,
                                     const PatternAlignment& aln, long atom_length_bp, const HkyParams& hky,
                                     const PoolSettings& settings, std::uint64_t seed) {
  GuideTreePool pool;
  pool.type = type;
  const int n = static_cast<int>(instance_ids.size());
  if (n == 0) throw DataError("guide tree pool for a type without instances");
  if (aln.taxa != n) throw DataError("alignment does not match instance list");
  auto relabel = [&](Tree t) {
    for (int v = 0; v < t.size(); ++v) {
      auto& node = t.node(v);
      if (node.is_leaf() && node.id >= 0) {
        node.id = instance_ids[static_cast<std::size_t>(node.id)];
        node.label = std::to_string(node.id);
      }
    }
    return t;
  };
  if (n == 1) {
    pool.samples.push_back(relabel(starting_tree(1, 0.0)));
    return pool;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double prior_rate = 1.0 / settings.branch_prior_mean;
  const double tuning = 2.0 * std::log(1.5);

  Tree tree = starting_tree(n, 0.05);
  auto log_prior = [&](const Tree& t) {
    double s = 0.0;
    for (int v = 0; v < t.size(); ++v) {
      if (v != t.root()) s -= prior_rate * t.node(v).length;
    }
    return s;
  };
  double log_post = pruning_log_likelihood(tree, aln, hky) + log_prior(tree);

  std::vector<int> internal_edges;
  for (int it = 0; it < settings.iterations; ++it) {
    internal_edges.clear();
    for (int v = 0; v < tree.size(); ++v) {
      if (v != tree.root() && !tree.node(v).is_leaf()) internal_edges.push_back(v);
    }
    Tree proposal = tree;
    double log_hastings = 0.0;
    if (!internal_edges.empty() && unif(rng) < 0.5) {
      int v = internal_edges[static_cast<std::size_t>(rng() % internal_edges.size())];
      int u = proposal.node(v).parent;
      const auto vch = proposal.node(v).children;
      std::vector<int> sibs;
      for (int c : proposal.node(u).children) {
        if (c != v) sibs.push_back(c);
      }
      int a = vch[static_cast<std::size_t>(rng() % vch.size())];
      int s = sibs[static_cast<std::size_t>(rng() % sibs.size())];
      replace_child(proposal, v, a, s);
      replace_child(proposal, u, s, a);
    } else {
      int v = static_cast<int>(rng() % static_cast<std::uint64_t>(tree.size() - 1));
      if (v >= tree.root()) ++v;
      double old_len = proposal.node(v).length;
      double factor = std::exp(tuning * (unif(rng) - 0.5));
      proposal.node(v).length = old_len * factor;
      log_hastings = std::log(factor);
    }
    double prop_post = pruning_log_likelihood(proposal, aln, hky) + log_prior(proposal);
    if (std::log(unif(rng)) < prop_post - log_post + log_hastings) {
      tree = std::move(proposal);
      log_post = prop_post;
    }
    if (it >= settings.burn_in && (it - settings.burn_in) % settings.thin == settings.thin - 1) {
      pool.samples.push_back(relabel(collapse_short_branches(tree, atom_length_bp, settings.collapse_substitutions)));
    }
  }
  if (pool.samples.empty()) {
    pool.samples.push_back(relabel(collapse_short_branches(tree, atom_length_bp, settings.collapse_substitutions)));
  }
  return pool;
}

std::vector<GuideTreePool> build_pools(const Dataset& data, const HkyParams& hky, const PoolSettings& settings,
                                       std::uint64_t seed, int threads) {
  std::vector<GuideTreePool> out(static_cast<std::size_t>(data.type_count()));
  auto one = [&](TypeId t) {
    auto ut = static_cast<std::size_t>(t);
    return sample_guide_tree_pool(t, data.type_instances[ut], data.alignments[ut], data.catalog.length(t), hky, settings,
                                  seed + static_cast<std::uint64_t>(t));
  };
  const int workers = std::max(1, threads);
  for (TypeId first = 0; first < data.type_count(); first += workers) {
    std::vector<std::future<GuideTreePool>> running;
    for (TypeId t = first; t < std::min(data.type_count(), first + workers); ++t) {
      running.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, one, t));
    }
    for (std::size_t i = 0; i < running.size(); ++i) out[static_cast<std::size_t>(first) + i] = running[i].get();
  }
  return out;
}

}  // namespace duphist

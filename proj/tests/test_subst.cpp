#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "duphist/core/errors.hpp"
#include "duphist/subst/guide_pool.hpp"
#include "duphist/subst/hky.hpp"
#include "duphist/subst/likelihood.hpp"
#include "subst_oracles.hpp"

using namespace duphist;

using namespace duphist::testing;


TEST_CASE("hky_transition closed form") {
  HkyParams p = skewed();
  auto id = hky_transition(p, 0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(id[i][j] == doctest::Approx(i == j ? 1.0 : 0.0));
  auto far = hky_transition(p, 100.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(far[i][j] - p.pi[static_cast<std::size_t>(j)]) < 1e-8);
  HkyParams jc;
  jc.pi = {0.25, 0.25, 0.25, 0.25};
  jc.kappa = 1.0;
  auto m = hky_transition(jc, 0.3);
  CHECK(m[0][0] == doctest::Approx(0.25 + 0.75 * std::exp(-4.0 * 0.3 / 3.0)).epsilon(1e-14));
  CHECK(m[0][1] == doctest::Approx(0.25 - 0.25 * std::exp(-4.0 * 0.3 / 3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(hky_transition(p, -0.1), DomainError);

  for (double t : {0.01, 0.2, 1.7}) {
    auto a = hky_transition(p, t);
    auto b = expm_hky(p, t);
    for (int i = 0; i < 4; ++i) {
      double row = 0.0;
      for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(a[i][j] - b[i][j]) < 1e-12);
        CHECK(a[i][j] >= 0.0);
        row += a[i][j];
        // detailed balance
        CHECK(std::abs(p.pi[static_cast<std::size_t>(i)] * a[i][j] - p.pi[static_cast<std::size_t>(j)] * a[j][i]) < 1e-12);
      }
      CHECK(std::abs(row - 1.0) < 1e-12);
    }
  }
  // Chapman-Kolmogorov
  auto ps = hky_transition(p, 0.13);
  auto pt = hky_transition(p, 0.41);
  auto pst = hky_transition(p, 0.54);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += ps[i][k] * pt[k][j];
      CHECK(std::abs(s - pst[i][j]) < 1e-10);
    }
}

TEST_CASE("pruning likelihood examples") {
  HkyParams p = skewed();
  Tree two;
  int r = two.add_node(-1);
  two.add_node(r, 0.0, {}, 0);
  two.add_node(r, 0.0, {}, 1);
  std::string s = "ACGTTGCA";
  double expected = 0.0;
  for (char c : s) expected += std::log(p.pi[static_cast<std::size_t>(nucleotide_code(c))]);
  CHECK(pruning_log_likelihood(two, {s, s}, p) == doctest::Approx(expected).epsilon(1e-12));

  two.node(1).length = 0.3;
  two.node(2).length = 0.05;
  std::vector<std::string> rows{"ACGTA", "ACTTG"};
  double oracle = 0.0;
  auto m1 = hky_transition(p, 0.3);
  auto m2 = hky_transition(p, 0.05);
  for (int i = 0; i < 5; ++i) {
    int a = nucleotide_code(rows[0][static_cast<std::size_t>(i)]);
    int b = nucleotide_code(rows[1][static_cast<std::size_t>(i)]);
    double site = 0.0;
    for (int x = 0; x < 4; ++x) site += p.pi[static_cast<std::size_t>(x)] * m1[x][a] * m2[x][b];
    oracle += std::log(site);
  }
  CHECK(pruning_log_likelihood(two, rows, p) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(pruning_log_likelihood(two, {"ACG", "AC"}, p), DataError);
}

TEST_CASE("pruning matches brute force over internal states") {
  std::mt19937_64 rng(11);
  HkyParams p = skewed();
  for (int trial = 0; trial < 100; ++trial) {
    int leaves = 2 + static_cast<int>(rng() % 3);
    Tree t = random_tree(rng, leaves);
    int sites = 1 + static_cast<int>(rng() % 20);
    std::vector<std::string> rows;
    for (int i = 0; i < leaves; ++i) rows.push_back(random_dna(rng, sites, trial % 3 == 0));
    double got = pruning_log_likelihood(t, rows, p);
    double want = brute_force(t, rows, p);
    CHECK(std::abs(got - want) <= 1e-10 * std::abs(want));
  }
}

TEST_CASE("pruning likelihood is invariant to rerooting") {
  std::mt19937_64 rng(5);
  HkyParams p = skewed();
  // ((0:a,1:b):c,2:d) rooted above c versus rooted at the cherry node
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> len(0.01, 0.5);
    double a = len(rng), b = len(rng), c = len(rng), d = len(rng), split = len(rng);
    std::vector<std::string> rows{random_dna(rng, 30), random_dna(rng, 30), random_dna(rng, 30)};
    Tree t1;
    int r = t1.add_node(-1);
    int x = t1.add_node(r, c);
    t1.add_node(x, a, {}, 0);
    t1.add_node(x, b, {}, 1);
    t1.add_node(r, d, {}, 2);
    Tree t2;
    int r2 = t2.add_node(-1);
    t2.add_node(r2, a, {}, 0);
    t2.add_node(r2, b, {}, 1);
    t2.add_node(r2, c + d, {}, 2);
    Tree t3;  // root in the middle of the branch to leaf 0
    int r3 = t3.add_node(-1);
    t3.add_node(r3, split * a, {}, 0);
    int y = t3.add_node(r3, (1 - split) * a);
    t3.add_node(y, b, {}, 1);
    t3.add_node(y, c + d, {}, 2);
    double l1 = pruning_log_likelihood(t1, rows, p);
    CHECK(std::abs(l1 - pruning_log_likelihood(t2, rows, p)) < 1e-10 * std::abs(l1));
    CHECK(std::abs(l1 - pruning_log_likelihood(t3, rows, p)) < 1e-10 * std::abs(l1));
  }
}

TEST_CASE("branch-length optimization reaches the grid optimum") {
  std::mt19937_64 rng(3);
  HkyParams p = skewed();
  std::string a = random_dna(rng, 200);
  std::string b = a;
  for (int i = 0; i < 200; i += 9) b[static_cast<std::size_t>(i)] = "ACGT"[(nucleotide_code(b[static_cast<std::size_t>(i)]) + 1) % 4];
  auto aln = compress_patterns({a, b});
  Tree t;
  int r = t.add_node(-1);
  t.add_node(r, 0.01, {}, 0);
  t.add_node(r, 0.01, {}, 1);
  double best = -1e300;
  for (int i = 1; i <= 20000; ++i) {
    Tree g = t;
    g.node(1).length = i * 1e-5;
    g.node(2).length = 0.0;
    best = std::max(best, pruning_log_likelihood(g, aln, p));
  }
  double ml = profile_log_likelihood(t, aln, p);
  CHECK(ml >= best - 1e-6);
  CHECK(ml <= best + 1e-3);

  // three taxa: ML at least as good as any random branch lengths
  std::vector<std::string> rows{a, b, random_dna(rng, 200)};
  auto aln3 = compress_patterns(rows);
  Tree star;
  int s = star.add_node(-1);
  for (int i = 0; i < 3; ++i) star.add_node(s, 0.1, {}, i);
  double ml3 = profile_log_likelihood(star, aln3, p);
  std::uniform_real_distribution<double> len(0.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    Tree g = star;
    for (int v = 1; v < 4; ++v) g.node(v).length = len(rng);
    CHECK(pruning_log_likelihood(g, aln3, p) <= ml3 + 1e-9);
  }
}

TEST_CASE("collapse_short_branches") {
  Tree t;
  int r = t.add_node(-1);
  t.add_node(r, 0.1, {}, 0);
  int x = t.add_node(r, 0.009);
  t.add_node(x, 0.1, {}, 1);
  t.add_node(x, 0.1, {}, 2);
  int y = t.add_node(r, 0.02);
  t.add_node(y, 0.0, {}, 3);
  t.add_node(y, 0.0, {}, 4);
  // 0.009 * 500 = 4.5 expected substitutions -> collapsed; 0.02 * 500 = 10 kept
  Tree c = collapse_short_branches(t, 500);
  CHECK(c.leaf_count() == 5);
  CHECK(c.node(c.root()).children.size() == 4);
  CHECK(collapse_short_branches(t, 1000).size() == t.size());
  Tree zero = t;
  zero.node(x).length = 0.0;
  zero.node(y).length = 0.0;
  Tree st = collapse_short_branches(zero, 500);
  CHECK(st.size() == 6);
  CHECK(st.node(st.root()).children.size() == 5);
}

namespace {

// Evolve a sequence down a rooted tree with the closed-form transition matrices.
void evolve(const Tree& t, int v, const std::string& seq, const HkyParams& p, std::mt19937_64& rng,
            std::vector<std::string>& rows) {
  if (t.node(v).is_leaf()) {
    rows[static_cast<std::size_t>(t.node(v).id)] = seq;
    return;
  }
  for (int c : t.node(v).children) {
    auto m = hky_transition(p, t.node(c).length);
    std::string child = seq;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& ch : child) {
      int x = nucleotide_code(ch);
      double r = u(rng);
      int y = 0;
      while (y < 3 && r > m[x][y]) r -= m[x][y++];
      ch = nucleotide_char(y);
    }
    evolve(t, c, child, p, rng, rows);
  }
}

std::set<int> split_of(const Tree& t, int v) {
  std::set<int> out;
  std::function<void(int)> walk = [&](int u) {
    if (t.node(u).is_leaf()) out.insert(t.node(u).id);
    for (int c : t.node(u).children) walk(c);
  };
  walk(v);
  return out;
}

bool has_split(const Tree& t, const std::set<int>& side, int n) {
  for (int v = 0; v < t.size(); ++v) {
    if (v == t.root() || t.node(v).is_leaf()) continue;
    auto s = split_of(t, v);
    if (s == side) return true;
    std::set<int> comp;
    for (int i = 0; i < n; ++i)
      if (!s.count(i)) comp.insert(i);
    if (comp == side) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("guide tree pools") {
  HkyParams p;
  PoolSettings settings;
  std::mt19937_64 rng(21);
  {
    auto aln = compress_patterns({random_dna(rng, 100), random_dna(rng, 100)});
    auto pool = sample_guide_tree_pool(3, {10, 11}, aln, 100, p, settings, 1);
    CHECK(pool.samples.size() == 750);
    std::set<std::string> topologies;
    for (const auto& t : pool.samples) topologies.insert(unrooted_topology_key(t));
    CHECK(topologies.size() == 1);
  }
  {
    auto aln = compress_patterns({random_dna(rng, 100), random_dna(rng, 100), random_dna(rng, 100)});
    auto pool = sample_guide_tree_pool(3, {4, 5, 6}, aln, 100, p, settings, 2);
    std::set<std::string> topologies;
    for (const auto& t : pool.samples) {
      topologies.insert(unrooted_topology_key(t));
      CHECK(t.leaf_count() == 3);
    }
    CHECK(topologies.size() == 1);
  }
  {
    auto single = compress_patterns({random_dna(rng, 50)});
    auto pool = sample_guide_tree_pool(0, {9}, single, 50, p, settings, 3);
    REQUIRE(pool.samples.size() == 1);
    CHECK(pool.samples[0].size() == 1);
  }
  // deep split {0,1,2} | {3,4}
  Tree truth;
  int r = truth.add_node(-1);
  int x = truth.add_node(r, 0.15);
  truth.add_node(x, 0.02, {}, 0);
  truth.add_node(x, 0.02, {}, 1);
  truth.add_node(x, 0.02, {}, 2);
  int y = truth.add_node(r, 0.15);
  truth.add_node(y, 0.02, {}, 3);
  truth.add_node(y, 0.02, {}, 4);
  std::string root;
  for (int i = 0; i < 2000; ++i) root.push_back("ACGT"[rng() % 4]);
  std::vector<std::string> rows(5);
  evolve(truth, truth.root(), root, p, rng, rows);
  auto aln = compress_patterns(rows);
  std::vector<InstanceId> ids{0, 1, 2, 3, 4};
  auto pool = sample_guide_tree_pool(1, ids, aln, 2000, p, settings, 4);
  int hits = 0;
  for (const auto& t : pool.samples) {
    std::multiset<int> leaves;
    for (int v : t.leaves()) leaves.insert(t.node(v).id);
    CHECK(leaves == std::multiset<int>{0, 1, 2, 3, 4});
    hits += has_split(t, {3, 4}, 5);
  }
  CHECK(hits >= 0.9 * static_cast<double>(pool.samples.size()));
}

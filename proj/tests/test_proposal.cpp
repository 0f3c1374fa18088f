#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <random>

#include "duphist/core/adjacency.hpp"
#include "duphist/core/errors.hpp"
#include "duphist/model/distributions.hpp"
#include "duphist/proposal/proposal.hpp"
#include "test_util.hpp"

using namespace duphist;
using namespace duphist::testing;

namespace {

struct Fixture {
  Dataset data;
  ModelParams params;
  ProposalSettings settings;
  std::vector<Tree> trees;

  Fixture(std::shared_ptr<const SpeciesTree> tree, const std::vector<std::string>& layouts, std::vector<long> lengths,
          double p_deletion = 0.0)
      : data(layout_dataset(tree, layouts, std::move(lengths))) {
    params.p_deletion = p_deletion;
    trees = star_trees(data);
  }
  ProposalContext ctx() const { return {&data, &params, &settings}; }
  UnwindState state() const { return initial_state(data, pointers(trees)); }
};

std::string describe(const Duplication& d) {
  std::string s = std::to_string(d.source.begin) + ":" + std::to_string(d.source.end) + ">" + std::to_string(d.target) +
                  (d.inverted ? "i" : "f");
  if (d.coupled_deletion) s += "/" + std::to_string(d.coupled_deletion->begin) + ":" + std::to_string(d.coupled_deletion->end);
  return s;
}

// Every duplication (no coupled deletion) whose forward application to some
// pre-sequence yields `seq`, with matched atoms cherries in `state`.
std::set<std::string> brute_force_duplications(const AtomicSequence& seq, const UnwindState& state) {
  std::set<std::string> out;
  const int n = seq.size();
  for (int c = 0; c < n; ++c) {
    for (int len = 1; c + len <= n; ++len) {
      AtomicSequence pre{seq.species, {}};
      for (int i = 0; i < n; ++i) {
        if (i < c || i >= c + len) pre.atoms.push_back(seq[i]);
      }
      for (int s = 0; s + len <= pre.size(); ++s) {
        for (int t = 0; t <= pre.size(); ++t) {
          if (t > s && t < s + len) continue;
          for (bool inv : {false, true}) {
            Duplication d{{s, s + len}, t, inv, {}};
            if (d.copy_span().begin != c) continue;
            IdSource ids(1000);
            auto post = apply_duplication(pre, d, ids);
            if (!same_layout(post, seq)) continue;
            // Source atoms after insertion sit at shifted_source.
            bool ok = true;
            Span src = d.shifted_source();
            for (int k = 0; k < len && ok; ++k) {
              const auto& a = seq[src.begin + k];
              const auto& b = seq[inv ? c + len - 1 - k : c + k];
              ok = state.trees[static_cast<std::size_t>(a.type)].cherry(a.id, b.id);
            }
            if (ok) out.insert(describe(d));
          }
        }
      }
    }
  }
  return out;
}

std::set<std::string> described(const std::vector<Candidate>& cands, bool coupled) {
  std::set<std::string> out;
  for (const auto& c : cands) {
    if (const auto* d = std::get_if<Duplication>(&c.event); d && d->coupled_deletion.has_value() == coupled) out.insert(describe(*d));
  }
  return out;
}

}  // namespace

TEST_CASE("working tree cherries and leaf removal") {
  Tree t = id_tree("((0:0.1,1:0.2):0.3,(2:0.4,3:0.5):0.6);");
  WorkingTree w(t);
  CHECK(w.leaf_count() == 4);
  CHECK(w.cherry(0, 1));
  CHECK(w.cherry(2, 3));
  CHECK_FALSE(w.cherry(0, 2));
  CHECK_FALSE(w.cherry(0, 0));
  CHECK(w.cherry_distance(0, 1) == doctest::Approx(0.3));
  CHECK(w.cherry_distance(2, 3) == doctest::Approx(0.9));
  w.remove_leaf(1);
  // Three leaves left: an unrooted star.
  CHECK(w.cherry(0, 2));
  CHECK(w.cherry(2, 3));
  CHECK(w.cherry(0, 3));
  CHECK(w.cherry_distance(0, 2) == doctest::Approx(0.1 + 0.3 + 0.6 + 0.4));
  w.remove_leaf(3);
  CHECK(w.cherry(0, 2));
  w.remove_leaf(0);
  CHECK(w.leaf_count() == 1);
  CHECK_THROWS_AS(w.remove_leaf(7), InternalError);

  WorkingTree rooted(id_tree("(0:1,(1:1,(2:1,3:1):1):1);"));
  // Unrooted, 0 and 1 hang off the same node.
  CHECK(rooted.cherry(2, 3));
  CHECK(rooted.cherry(0, 1));
  CHECK_FALSE(rooted.cherry(0, 2));
  rooted.remove_leaf(2);
  CHECK(rooted.cherry(1, 3));
  CHECK(rooted.cherry(0, 1));
  CHECK(rooted.cherry_distance(1, 3) == doctest::Approx(3.0));
}

TEST_CASE("duplication candidates match a brute-force enumeration") {
  SUBCASE("example with star trees") {
    Fixture f(single_species(), {"0+ 1+ 2+ 3+ 1+ 2+"}, {100, 100, 100, 100});
    auto st = f.state();
    auto cands = enumerate_duplications(st, f.ctx(), {});
    auto got = described(cands, false);
    CHECK(got.count("1:3>4f"));  // remove the second "b c"
    CHECK(got.count("2:4>1f"));  // remove the first
    CHECK(got == brute_force_duplications(st.seqs.at(0), st));
    // Run pairs: bc/bc, b/b, c/c; each in both directions.
    CHECK(cands.size() == 6);
  }
  SUBCASE("cherries restrict runs") {
    Fixture f(single_species(), {"0+ 1+ 2+ 3+ 1+ 2+ 1+"}, {100, 100, 100, 100});
    // Three leaves would form a star; a phantom fourth leaf separates b1 and b2.
    f.trees[1] = id_tree("((1:0.1,6:0.1):0.1,(4:0.1,99:0.1):0.1);");
    auto st = f.state();
    auto got = described(enumerate_duplications(st, f.ctx(), {}), false);
    CHECK(got == brute_force_duplications(st.seqs.at(0), st));
    CHECK_FALSE(got.count("1:3>4f"));
  }
  SUBCASE("random layouts") {
    std::mt19937_64 rng(8);
    for (int round = 0; round < 60; ++round) {
      int n = std::uniform_int_distribution<int>(2, 7)(rng);
      std::string layout;
      for (int i = 0; i < n; ++i) {
        layout += std::to_string(std::uniform_int_distribution<int>(0, 2)(rng));
        layout += std::uniform_int_distribution<int>(0, 1)(rng) ? "+ " : "- ";
      }
      Fixture f(single_species(), {layout}, {100, 200, 300});
      auto st = f.state();
      auto cands = enumerate_duplications(st, f.ctx(), {});
      CHECK(described(cands, false) == brute_force_duplications(st.seqs.at(0), st));
    }
  }
}

TEST_CASE("coupled deletion candidates reproduce the sequence") {
  Fixture f(single_species(), {"0+ 1+ 2+ 3+ 4+ 0+ 2+ 1- 0- 5+"}, {100, 100, 100, 100, 100, 100}, 0.05);
  auto st = f.state();
  auto cands = enumerate_duplications(st, f.ctx(), {});
  int coupled = 0;
  for (const auto& c : cands) {
    const auto& d = std::get<Duplication>(c.event);
    if (!d.coupled_deletion) continue;
    ++coupled;
    auto pre = unwind_duplication(st.seqs.at(0), d);
    IdSource ids(1000);
    auto mid = apply_duplication(pre, Duplication{d.source, d.target, d.inverted, {}}, ids);
    auto post = apply_deletion(mid, Deletion{*d.coupled_deletion});
    CHECK(same_layout(post, st.seqs.at(0)));
    CHECK(c.features[7] == 1.0);
    CHECK(c.features[8] < 0.0);
  }
  // "0 1 2" vs "0 2" forward and "2 1- 0-"... at least the forward pair in both roles.
  CHECK(coupled >= 2);
  f.params.p_deletion = 0.0;
  CHECK(described(enumerate_duplications(st, f.ctx(), {}), true).empty());
}

TEST_CASE("features") {
  Fixture f(single_species(), {"0+ 1+ 2+ 3+ 1+ 2+"}, {100, 300, 100, 100});
  auto st = f.state();
  auto cands = enumerate_duplications(st, f.ctx(), {});
  const Candidate* bc = nullptr;
  const Candidate* b = nullptr;
  for (const auto& c : cands) {
    auto s = describe(std::get<Duplication>(c.event));
    if (s == "1:3>4f") bc = &c;
    if (s == "1:2>4f") b = &c;
  }
  REQUIRE(bc);
  REQUIRE(b);
  CHECK(bc->features[0] == doctest::Approx(std::log(400.0)));
  CHECK(bc->features[2] == doctest::Approx(0.02));
  CHECK(bc->features[3] == doctest::Approx(0.0));
  CHECK(bc->features[4] == 0.0);
  CHECK(b->features[4] == 1.0);
  // Pair reduction against a recount.
  for (const auto& c : cands) {
    auto post = unwind_event(st.seqs, c.species, c.event);
    std::vector<AtomicSequence> before{st.seqs.at(0)};
    std::vector<AtomicSequence> after{post.at(0)};
    CHECK(c.features[6] == adjacent_pair_count(before) - adjacent_pair_count(after));
    double lw = 0.0;
    for (std::size_t i = 0; i < 10; ++i) lw += f.params.feature_weights[i] * c.features[i];
    CHECK(c.log_weight == doctest::Approx(lw));
  }
  // Unwinding "b c" at 4 heals d-b and c-end: a b c d is ancestral, all conditions hold.
  CHECK(bc->features[5] == 0.0);
  // Previously seen events get the bonus.
  auto again = enumerate_duplications(st, f.ctx(), {bc->key});
  for (const auto& c : again) {
    CHECK(c.features[1] == (c.key == bc->key ? 1.0 : 0.0));
    if (c.key == bc->key) CHECK(c.log_weight == doctest::Approx(bc->log_weight + std::log(10.0)));
  }
  // Unequal cherry distances give a variance.
  f.trees[1] = star_tree({1, 4}, 0.05);
  auto st2 = f.state();
  for (const auto& c : enumerate_duplications(st2, f.ctx(), {})) {
    if (describe(std::get<Duplication>(c.event)) == "1:3>4f") {
      double mean = (300 * 0.1 + 100 * 0.02) / 400;
      double var = (300 * (0.1 - mean) * (0.1 - mean) + 100 * (0.02 - mean) * (0.02 - mean)) / 400;
      CHECK(c.features[2] == doctest::Approx(mean));
      CHECK(c.features[3] == doctest::Approx(var));
    }
  }
}

TEST_CASE("speciation candidates") {
  auto two = std::make_shared<SpeciesTree>(SpeciesTree::from_newick("(s1:0.1,s2:0.1)r;"));
  SUBCASE("perfect match") {
    Fixture f(two, {"0+ 1+ 2+", "0+ 1+ 2+"}, {100, 100, 100}, 0.05);
    auto cands = enumerate_speciations(f.state(), f.ctx(), {});
    REQUIRE(cands.size() == 1);
    const auto& sp = std::get<Speciation>(cands[0].event);
    CHECK(sp.deletions_a.empty());
    CHECK(sp.deletions_b.empty());
    CHECK(cands[0].features[0] == doctest::Approx(std::log(300.0)));
  }
  SUBCASE("non-cherry middle atoms") {
    Fixture f(two, {"0+ 1+ 2+", "0+ 1+ 2+"}, {100, 100, 100}, 0.05);
    f.trees[1] = id_tree("((1:0.1,98:0.1):0.1,(4:0.1,99:0.1):0.1);");
    auto st = f.state();
    auto cands = enumerate_speciations(st, f.ctx(), {});
    REQUIRE(cands.size() == 2);
    std::set<std::string> parents;
    for (const auto& c : cands) {
      const auto& sp = std::get<Speciation>(c.event);
      CHECK(sp.deletions_a.size() == 1);
      CHECK(sp.deletions_b.size() == 1);
      CHECK(c.features[9] == 2.0);
      auto post = unwind_event(st.seqs, c.species, c.event);
      const auto& p = post.at(0);
      std::string ids;
      for (const auto& a : p.atoms) ids += std::to_string(a.id) + " ";
      parents.insert(ids);
      CHECK(same_layout(apply_speciation_deletions(p, sp.deletions_a), st.seqs.at(1)));
      CHECK(same_layout(apply_speciation_deletions(p, sp.deletions_b), st.seqs.at(2)));
    }
    CHECK(parents == std::set<std::string>{"0 1 4 2 ", "0 4 1 2 "});
  }
  SUBCASE("optimum equals exhaustive matching") {
    std::mt19937_64 rng(4);
    for (int round = 0; round < 80; ++round) {
      std::vector<std::string> layouts(2);
      for (auto& l : layouts) {
        int n = std::uniform_int_distribution<int>(0, 6)(rng);
        for (int i = 0; i < n; ++i) {
          l += std::to_string(std::uniform_int_distribution<int>(0, 2)(rng));
          l += std::uniform_int_distribution<int>(0, 3)(rng) ? "+ " : "- ";
        }
      }
      Fixture f(two, layouts, {100, 250, 40}, 0.05);
      f.settings.speciation_near_optimal = 1.0;
      auto st = f.state();
      const auto& s1 = st.seqs.at(1);
      const auto& s2 = st.seqs.at(2);
      // Exhaustive monotone matchings.
      std::function<long(int, int)> brute = [&](int i, int j) -> long {
        long best = 0;
        for (int x = i; x < s1.size(); ++x)
          for (int y = j; y < s2.size(); ++y)
            if (s1[x].type == s2[y].type && s1[x].strand == s2[y].strand)
              best = std::max(best, f.data.catalog.length(s1[x].type) + brute(x + 1, y + 1));
        return best;
      };
      long opt = brute(0, 0);
      auto cands = enumerate_speciations(st, f.ctx(), {});
      REQUIRE_FALSE(cands.empty());
      double top = -1;
      for (const auto& c : cands) top = std::max(top, c.features[0]);
      CHECK(top == doctest::Approx(std::log(static_cast<double>(std::max(1L, opt)))));
      for (const auto& c : cands) {
        auto post = unwind_event(st.seqs, c.species, c.event);
        const auto& sp = std::get<Speciation>(c.event);
        CHECK(same_layout(apply_speciation_deletions(post.at(0), sp.deletions_a), s1));
        CHECK(same_layout(apply_speciation_deletions(post.at(0), sp.deletions_b), s2));
      }
    }
  }
}

TEST_CASE("sample_step") {
  std::mt19937_64 rng(1);
  std::vector<Candidate> one(1);
  CHECK(sample_step(one, 1.0, rng).log_prob == 0.0);
  std::vector<Candidate> two(2);
  CHECK(sample_step(two, 1.0, rng).log_prob == doctest::Approx(std::log(0.5)));
  two[0].log_weight = std::log(100.0);
  auto lp = step_log_probs(two, 0.5);
  CHECK(std::exp(lp[0]) == doctest::Approx(10.0 / 11.0));
  CHECK(std::exp(lp[1]) == doctest::Approx(1.0 / 11.0));
  CHECK_THROWS_AS(sample_step({}, 1.0, rng), InternalError);

  std::vector<Candidate> five(5);
  std::vector<int> counts(5, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[sample_step(five, 1.0, rng).index];
  double chi = 0.0;
  for (int c : counts) chi += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
  CHECK(boost::math::gamma_q(2.0, chi / 2.0) > 0.001);
}

TEST_CASE("propose_history") {
  SUBCASE("ancestral input") {
    Fixture f(single_species(), {"0+ 1+ 2-"}, {100, 100, 100});
    std::mt19937_64 rng(1);
    auto p = propose_history(f.ctx(), pointers(f.trees), {}, 1.0, rng);
    CHECK(p.steps.empty());
    CHECK(p.log_q == 0.0);
    CHECK(layout_string(p.history.ancestral) == "0+ 1+ 2-");
  }
  SUBCASE("one duplication") {
    Fixture f(single_species(), {"0+ 1+ 2+ 3+ 1+ 2+"}, {100, 100, 100, 100});
    std::mt19937_64 rng(2);
    int single = 0;
    for (int i = 0; i < 50; ++i) {
      auto p = propose_history(f.ctx(), pointers(f.trees), {}, 1.0, rng);
      CHECK(validate_history(p.history, f.data.extant).empty());
      single += p.steps.size() == 1;
      CHECK(p.log_q == doctest::Approx(replay_log_q(f.ctx(), pointers(f.trees), p.steps, {}, 1.0)));
    }
    CHECK(single > 0);
  }
  SUBCASE("two species with deletions") {
    auto hcm = hcm_tree();
    Fixture f(hcm, {"0+ 1+ 2+ 1+", "0+ 2+ 1+ 3-", "0+ 3+ 1+ 2+"}, {100, 200, 300, 400}, 0.05);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
      auto prev = propose_history(f.ctx(), pointers(f.trees), {}, 1.0, rng);
      auto p = propose_history(f.ctx(), pointers(f.trees), step_keys(prev.steps), 0.6, rng);
      CHECK(validate_history(p.history, f.data.extant).empty());
      CHECK(p.log_q == doctest::Approx(replay_log_q(f.ctx(), pointers(f.trees), p.steps, step_keys(prev.steps), 0.6)));
      int atoms = 0;
      for (const auto& [v, s] : f.data.extant) atoms += s.size();
      CHECK(static_cast<int>(p.steps.size()) <= atoms);
    }
  }
}

TEST_CASE("proposal frequencies match computed probabilities") {
  auto two = std::make_shared<SpeciesTree>(SpeciesTree::from_newick("(s1:0.1,s2:0.1)r;"));
  Fixture f(two, {"0+ 1+ 0+", "0+ 1-"}, {100, 150}, 0.05);
  std::mt19937_64 rng(5);
  std::map<std::string, int> seen;
  std::map<std::string, double> q;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto p = propose_history(f.ctx(), pointers(f.trees), {}, 1.0, rng);
    std::string key;
    for (const auto& s : p.steps) key += s.key + ";";
    ++seen[key];
    q[key] = p.log_q;
  }
  double tv = 0.0;
  double covered = 0.0;
  for (const auto& [k, c] : seen) {
    double pk = std::exp(q[k]);
    covered += pk;
    tv += std::abs(static_cast<double>(c) / n - pk);
  }
  tv = 0.5 * (tv + std::max(0.0, 1.0 - covered));
  MESSAGE("distinct proposals " << seen.size() << ", tv " << tv);
  CHECK(seen.size() > 3);
  CHECK(tv < 0.02);
}

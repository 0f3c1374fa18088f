#include <doctest.h>

#include <cmath>
#include <map>

#include "duphist/core/errors.hpp"
#include "duphist/model/distributions.hpp"
#include "duphist/sampler/sampler.hpp"
#include "oracles.hpp"

using namespace duphist;
using namespace duphist::testing;

namespace {

PoolSettings small_pool() {
  PoolSettings p;
  p.iterations = 400;
  p.burn_in = 100;
  p.thin = 10;
  return p;
}

struct Instance {
  Dataset data;
  std::vector<GuideTreePool> pools;
  ModelParams params;
};

Instance single_instance(const std::string& layout, int types, std::uint64_t seed) {
  Instance in{dna_dataset(single_species(), {layout}, std::vector<long>(static_cast<std::size_t>(types), 30), 0, seed), {}, {}};
  in.params.mean_dup_length = 60;
  in.params.mean_dup_distance = 60;
  in.params.mean_del_length = 60;
  in.params.lambda = 20;
  in.pools = build_pools(in.data, in.params.hky, small_pool(), seed);
  return in;
}

std::map<std::string, double> exact_posterior(const Dataset& data, const ModelParams& params) {
  JointScorer scorer(data, params);
  std::map<std::string, double> logp;
  for (const auto& [key, h] : all_histories(data)) logp[key] = scorer.score(h);
  std::vector<double> all;
  for (const auto& [k, v] : logp) all.push_back(v);
  double norm = log_sum_exp(all);
  std::map<std::string, double> out;
  for (const auto& [k, v] : logp) out[k] = std::exp(v - norm);
  return out;
}

}  // namespace

TEST_CASE("mh acceptance decisions") {
  CHECK(mh_log_ratio(-5.0, -3.0, -1.0, -1.0) == doctest::Approx(2.0));
  CHECK(mh_log_ratio(-5.0, -3.0, -1.0, neg_inf) == neg_inf);
  CHECK(mh_log_ratio(-5.0, neg_inf, -1.0, -1.0) == neg_inf);
  std::mt19937_64 rng(3);
  int accepted = 0;
  for (int i = 0; i < 100; ++i) accepted += mh_accept(-5.0, -3.0, -1.0, -1.0, rng);
  CHECK(accepted == 100);
  accepted = 0;
  for (int i = 0; i < 10000; ++i) accepted += mh_accept(0.0, std::log(0.5), 0.0, 0.0, rng);
  CHECK(accepted / 10000.0 == doctest::Approx(0.5).epsilon(0.03));
  for (int i = 0; i < 100; ++i) CHECK_FALSE(mh_accept(-5.0, 10.0, -1.0, neg_inf, rng));
  CHECK(mh_decide(0.0, -1e-12));
  CHECK_FALSE(mh_decide(-1.0, -0.5));
}

TEST_CASE("history enumeration oracle") {
  auto data = layout_dataset(single_species(), {"0+ 1+ 0+"}, {10, 10});
  auto all = all_histories(data);
  // "0 1" with 0 copied to the end, or "1 0" with 0 copied to the front
  CHECK(all.size() == 2);
  for (const auto& [k, h] : all) CHECK(validate_history(h, data.extant).empty());
}

TEST_CASE("chain edge cases") {
  auto in = single_instance("0+ 1+ 2+", 3, 5);
  ChainInputs inputs{&in.data, &in.pools, in.params, {}};
  ChainConfig cfg;
  cfg.iterations = 0;
  cfg.burn_in = 0;
  CHECK(run_chain(inputs, cfg, 0).records.empty());
  cfg.iterations = 50;
  cfg.burn_in = 10;
  auto r = run_chain(inputs, cfg, 0);
  REQUIRE(r.records.size() == 50);
  CHECK(r.retained.size() == 40);
  for (const auto& rec : r.records) {
    CHECK(rec.accepted);
    CHECK(rec.log_score == doctest::Approx(r.records.front().log_score));
  }
  std::vector<GuideTreePool> missing;
  ChainInputs bad{&in.data, &missing, in.params, {}};
  CHECK_THROWS_AS(run_chain(bad, cfg, 0), InternalError);
}

TEST_CASE("acceptance replays from logged components") {
  auto in = single_instance("0+ 1+ 1- 2+ 0+", 3, 7);
  ChainInputs inputs{&in.data, &in.pools, in.params, {}};
  ChainConfig cfg;
  cfg.iterations = 300;
  cfg.burn_in = 0;
  auto r = run_chain(inputs, cfg, 0);
  int accepted = 0;
  for (const auto& rec : r.records) {
    CHECK(rec.accepted == mh_decide(mh_log_ratio(rec.log_p_cur, rec.log_p_prop, rec.log_q_fwd, rec.log_q_rev), rec.log_u));
    CHECK(rec.log_score == (rec.accepted ? rec.log_p_prop : rec.log_p_cur));
    accepted += rec.accepted;
  }
  CHECK(accepted > 0);
  CHECK(accepted < 300);
  Target target(in.data, in.params);
  for (const auto& s : r.retained) {
    CHECK(validate_history(s.history, in.data.extant).empty());
    CHECK(target(s.history) == doctest::Approx(s.log_score));
  }
}

TEST_CASE("chains are deterministic per seed") {
  auto in = single_instance("0+ 1+ 2+ 1- 0+", 3, 11);
  ChainInputs inputs{&in.data, &in.pools, in.params, {}};
  ChainConfig cfg;
  cfg.iterations = 200;
  cfg.burn_in = 0;
  cfg.chains = 2;
  auto a = run_chains(inputs, cfg);
  auto b = run_chains(inputs, cfg);
  cfg.threads = 2;
  auto c = run_chains(inputs, cfg);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < a[k].records.size(); ++i) {
      CHECK(a[k].records[i].log_score == b[k].records[i].log_score);
      CHECK(a[k].records[i].log_score == c[k].records[i].log_score);
      CHECK(a[k].retained[i].history == c[k].retained[i].history);
    }
  }
}

TEST_CASE("sampler reproduces the exact posterior") {
  auto in = single_instance("0+ 1+ 1- 2+ 0+", 3, 13);
  auto exact = exact_posterior(in.data, in.params);
  ChainInputs inputs{&in.data, &in.pools, in.params, {}};
  ChainConfig cfg;
  cfg.iterations = 40000;
  cfg.burn_in = 1000;
  auto r = run_chain(inputs, cfg, 0);
  std::map<std::string, double> freq;
  for (const auto& s : r.retained) freq[history_key(s.history)] += 1.0 / static_cast<double>(r.retained.size());
  double tv = 0.0;
  for (const auto& [k, p] : exact) tv += std::abs(p - (freq.count(k) ? freq[k] : 0.0));
  for (const auto& [k, f] : freq) {
    CHECK_MESSAGE(exact.count(k), k);
  }
  tv /= 2.0;
  MESSAGE("histories ", exact.size(), " tv ", tv);
  CHECK(tv < 0.05);
}

TEST_CASE("posterior summary arithmetic") {
  auto data = layout_dataset(single_species(), {"0+ 1+ 0+"}, {10, 10});
  auto all = all_histories(data);
  std::vector<RetainedSample> samples;
  double score = -3.0;
  for (const auto& [k, h] : all) samples.push_back({0, 0, score--, h, {}});
  samples.push_back(samples[0]);
  auto one = summarize({samples[0]}, data);
  REQUIRE(one.branches.size() == 1);
  CHECK(one.branches[0].dup_mean == 1.0);
  CHECK(one.branches[0].dup_sd == 0.0);
  CHECK_FALSE(one.expected_incorrect_breakpoints);

  auto s = summarize(samples, data, std::vector<std::pair<long, Strand>>{{0, Strand::forward}, {1, Strand::forward}});
  REQUIRE(samples[0].history.ancestral.atoms[0].type == 0);
  CHECK(s.samples == 3);
  CHECK(s.best.log_score == -3.0);
  CHECK(s.branches[0].dup_mean == 1.0);
  // ancestral "0+ 1+" twice, "1+ 0+" once
  CHECK(s.ancestral_adjacency[{0, 2}] == doctest::Approx(2.0 / 3.0));
  CHECK(s.ancestral_adjacency[{1, 3}] == doctest::Approx(1.0 / 3.0));
  CHECK(s.branches[0].dup_sd == 0.0);
  CHECK(*s.expected_incorrect_breakpoints == doctest::Approx(1.0 / 3.0));
  // truth types missing from the data are ignored
  auto t = summarize(samples, data,
                     std::vector<std::pair<long, Strand>>{{0, Strand::forward}, {7, Strand::reverse}, {1, Strand::forward}});
  CHECK(*t.expected_incorrect_breakpoints == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(summarize({}, data), DomainError);
}

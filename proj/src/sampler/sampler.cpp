#include "duphist/sampler/sampler.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <future>
#include <set>

#include "duphist/core/errors.hpp"
#include "duphist/model/distributions.hpp"

namespace duphist {

double mh_log_ratio(double log_p_cur, double log_p_prop, double log_q_fwd, double log_q_rev) {
  if (log_q_rev == neg_inf || log_p_prop == neg_inf) return neg_inf;
  return log_p_prop + log_q_rev - log_p_cur - log_q_fwd;
}

bool mh_decide(double log_ratio, double log_u) { return log_u < log_ratio; }

bool mh_accept(double log_p_cur, double log_p_prop, double log_q_fwd, double log_q_rev, std::mt19937_64& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return mh_decide(mh_log_ratio(log_p_cur, log_p_prop, log_q_fwd, log_q_rev), std::log(u));
}

double Target::operator()(const History& h) { return scorer_.score(h) - log_unwind_orders(h); }

namespace {

constexpr int max_initial_attempts = 1000;

std::vector<const Tree*> chosen_trees(const std::vector<GuideTreePool>& pools, const std::vector<std::size_t>& index) {
  std::vector<const Tree*> out;
  for (std::size_t t = 0; t < pools.size(); ++t) out.push_back(&pools[t].samples[index[t]]);
  return out;
}

}  // namespace

ChainResult run_chain(const ChainInputs& in, const ChainConfig& config, int chain_index) {
  config.validate();
  const auto& pools = *in.pools;
  if (static_cast<int>(pools.size()) != in.data->type_count()) throw InternalError("one guide tree pool per type is required");
  for (const auto& p : pools) {
    if (p.samples.empty()) throw InternalError("empty guide tree pool for type " + std::to_string(p.type));
  }
  ChainResult out;
  if (config.iterations == 0) return out;
  std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(chain_index));
  ProposalContext ctx{in.data, &in.params, &in.proposal};
  Target target(*in.data, in.params);
  const auto& heats = in.params.heats;

  std::vector<std::size_t> tree_index(pools.size(), 0);
  for (std::size_t t = 0; t < pools.size(); ++t) {
    tree_index[t] = std::uniform_int_distribution<std::size_t>(0, pools[t].samples.size() - 1)(rng);
  }
  Proposal current;
  double current_score = neg_inf;
  for (int attempt = 0; attempt < max_initial_attempts && current_score == neg_inf; ++attempt) {
    current = propose_history(ctx, chosen_trees(pools, tree_index), {}, 1.0, rng);
    current_score = target(current.history);
  }
  if (current_score == neg_inf) throw InternalError("chain " + std::to_string(chain_index) + ": no initial history with finite score");

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int it = 0; it < config.iterations; ++it) {
    const double heat = heats[static_cast<std::size_t>(it) % heats.size()];
    for (std::size_t t = 0; t < pools.size(); ++t) {
      if (pools[t].samples.size() < 2) continue;
      if (unif(rng) >= in.proposal.tree_keep_probability) {
        tree_index[t] = std::uniform_int_distribution<std::size_t>(0, pools[t].samples.size() - 1)(rng);
      }
    }
    auto trees = chosen_trees(pools, tree_index);
    SampleRecord rec;
    rec.chain = chain_index;
    rec.iteration = it;
    rec.log_p_cur = current_score;
    Proposal prop;
    try {
      prop = propose_history(ctx, trees, step_keys(current.steps), heat, rng);
    } catch (const InternalError& e) {
      throw InternalError("chain " + std::to_string(chain_index) + " iteration " + std::to_string(it) + ": " + e.what());
    }
    rec.log_q_fwd = prop.log_q;
    rec.log_p_prop = target(prop.history);
    rec.log_q_rev = rec.log_p_prop == neg_inf ? neg_inf : replay_log_q(ctx, trees, current.steps, step_keys(prop.steps), heat);
    rec.log_u = std::log(unif(rng));
    rec.accepted = mh_decide(mh_log_ratio(rec.log_p_cur, rec.log_p_prop, rec.log_q_fwd, rec.log_q_rev), rec.log_u);
    if (rec.accepted) {
      current = std::move(prop);
      current_score = rec.log_p_prop;
    }
    rec.log_score = current_score;
    rec.counts = branch_counts(current.history);
    if (it >= config.burn_in) out.retained.push_back({chain_index, it, current_score, current.history, current.steps});
    out.records.push_back(std::move(rec));
  }
  spdlog::debug("chain {} done: {} iterations", chain_index, config.iterations);
  return out;
}

std::vector<ChainResult> run_chains(const ChainInputs& in, const ChainConfig& config) {
  config.validate();
  std::vector<ChainResult> out(static_cast<std::size_t>(config.chains));
  const int threads = std::max(1, config.threads);
  for (int first = 0; first < config.chains; first += threads) {
    std::vector<std::future<ChainResult>> running;
    for (int c = first; c < std::min(config.chains, first + threads); ++c) {
      running.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                   [&in, &config, c] { return run_chain(in, config, c); }));
    }
    for (std::size_t i = 0; i < running.size(); ++i) out[static_cast<std::size_t>(first) + i] = running[i].get();
  }
  return out;
}

std::set<ExternalAdjacency> external_adjacencies(const std::vector<std::pair<long, Strand>>& atoms) {
  std::set<ExternalAdjacency> out;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    long x = 2 * atoms[i].first + (atoms[i].second == Strand::reverse);
    long y = 2 * atoms[i + 1].first + (atoms[i + 1].second == Strand::reverse);
    out.insert(std::min(ExternalAdjacency{x, y}, ExternalAdjacency{y ^ 1, x ^ 1}));
  }
  return out;
}

PosteriorSummary summarize(const std::vector<RetainedSample>& samples, const Dataset& data,
                           const std::optional<std::vector<std::pair<long, Strand>>>& truth_ancestral) {
  return summarize(samples, data.external_type, truth_ancestral);
}

PosteriorSummary summarize(const std::vector<RetainedSample>& samples, const std::vector<long>& external_type,
                           const std::optional<std::vector<std::pair<long, Strand>>>& truth_ancestral) {
  if (samples.empty()) throw DomainError("no retained samples to summarize");
  PosteriorSummary s;
  s.samples = samples.size();
  const std::size_t branches = samples.front().history.branch_events.size();
  std::vector<double> dup_sum(branches, 0.0), dup_sq(branches, 0.0), del_sum(branches, 0.0), del_sq(branches, 0.0);
  std::map<ExternalAdjacency, int> adj_count;
  std::optional<std::set<ExternalAdjacency>> truth;
  if (truth_ancestral) {
    std::set<long> present(external_type.begin(), external_type.end());
    std::vector<std::pair<long, Strand>> kept;
    for (const auto& a : *truth_ancestral) {
      if (present.count(a.first)) kept.push_back(a);
    }
    truth = external_adjacencies(kept);
  }
  double incorrect = 0.0;
  const RetainedSample* best = &samples.front();
  for (const auto& smp : samples) {
    auto counts = branch_counts(smp.history);
    for (std::size_t b = 0; b < branches; ++b) {
      dup_sum[b] += counts[b].duplications;
      dup_sq[b] += static_cast<double>(counts[b].duplications) * counts[b].duplications;
      del_sum[b] += counts[b].deletions;
      del_sq[b] += static_cast<double>(counts[b].deletions) * counts[b].deletions;
    }
    std::vector<std::pair<long, Strand>> anc;
    for (const auto& a : root_node_sequence(smp.history).atoms) anc.emplace_back(external_type.at(static_cast<std::size_t>(a.type)), a.strand);
    auto adj = external_adjacencies(anc);
    for (const auto& a : adj) ++adj_count[a];
    if (truth) {
      for (const auto& a : adj) incorrect += !truth->count(a);
    }
    if (smp.log_score > best->log_score) best = &smp;
  }
  const double n = static_cast<double>(samples.size());
  auto sd = [&](double sum, double sq) {
    if (samples.size() < 2) return 0.0;
    double var = (sq - sum * sum / n) / (n - 1.0);
    return var > 0.0 ? std::sqrt(var) : 0.0;
  };
  for (std::size_t b = 0; b < branches; ++b) {
    s.branches.push_back({dup_sum[b] / n, sd(dup_sum[b], dup_sq[b]), del_sum[b] / n, sd(del_sum[b], del_sq[b])});
  }
  for (const auto& [a, c] : adj_count) s.ancestral_adjacency[a] = c / n;
  s.best = *best;
  if (truth) s.expected_incorrect_breakpoints = incorrect / n;
  return s;
}

}  // namespace duphist

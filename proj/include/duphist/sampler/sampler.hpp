#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "duphist/core/adjacency.hpp"
#include "duphist/core/history.hpp"
#include "duphist/data/dataset.hpp"
#include "duphist/model/params.hpp"
#include "duphist/model/score.hpp"
#include "duphist/proposal/proposal.hpp"
#include "duphist/subst/guide_pool.hpp"

namespace duphist {

// log of the acceptance ratio; -inf when the reverse move is impossible.
double mh_log_ratio(double log_p_cur, double log_p_prop, double log_q_fwd, double log_q_rev);
bool mh_accept(double log_p_cur, double log_p_prop, double log_q_fwd, double log_q_rev, std::mt19937_64& rng);
// Accept iff log_u < log ratio (log_u from a uniform draw).
bool mh_decide(double log_ratio, double log_u);

// Sampling target for a (history, unwind order) state: joint score minus the
// log number of unwind orders of the history.
class Target {
 public:
  Target(const Dataset& data, const ModelParams& params) : scorer_{data, params} {}
  double operator()(const History& h);
  JointScorer& scorer() { return scorer_; }

 private:
  JointScorer scorer_;
};

struct SampleRecord {
  int chain = 0;
  int iteration = 0;
  double log_score = 0.0;  // of the state after this iteration
  bool accepted = false;
  std::vector<BranchCounts> counts;
  // Components of the acceptance decision.
  double log_u = 0.0;
  double log_p_cur = 0.0;
  double log_p_prop = 0.0;
  double log_q_fwd = 0.0;
  double log_q_rev = 0.0;
};

struct RetainedSample {
  int chain = 0;
  int iteration = 0;
  double log_score = 0.0;
  History history;
  std::vector<Step> steps;
};

struct ChainResult {
  std::vector<SampleRecord> records;
  std::vector<RetainedSample> retained;  // iterations >= burn_in
};

struct ChainInputs {
  const Dataset* data = nullptr;
  const std::vector<GuideTreePool>* pools = nullptr;  // one per type
  ModelParams params;
  ProposalSettings proposal;
};

ChainResult run_chain(const ChainInputs& in, const ChainConfig& config, int chain_index);
// All chains (seed = base + index), run on up to config.threads threads.
std::vector<ChainResult> run_chains(const ChainInputs& in, const ChainConfig& config);

struct BranchSummary {
  double dup_mean = 0.0;
  double dup_sd = 0.0;
  double del_mean = 0.0;
  double del_sd = 0.0;
};

// Adjacency of signed external type ids (2 * type_id + reverse).
using ExternalAdjacency = std::pair<long, long>;

struct PosteriorSummary {
  std::size_t samples = 0;
  std::vector<BranchSummary> branches;
  std::map<ExternalAdjacency, double> ancestral_adjacency;
  RetainedSample best;
  std::optional<double> expected_incorrect_breakpoints;
};

// Normalized ancestral adjacencies of a sequence whose types are external ids.
std::set<ExternalAdjacency> external_adjacencies(const std::vector<std::pair<long, Strand>>& atoms);

// Adjacencies are taken at the root speciation (root_node_sequence).
// `truth_ancestral` lists the true atoms there as external type ids;
// types absent from the data are dropped before comparing.
PosteriorSummary summarize(const std::vector<RetainedSample>& samples, const Dataset& data,
                           const std::optional<std::vector<std::pair<long, Strand>>>& truth_ancestral = std::nullopt);
// Same, with `external_type` mapping the samples' type ids to external ids.
PosteriorSummary summarize(const std::vector<RetainedSample>& samples, const std::vector<long>& external_type,
                           const std::optional<std::vector<std::pair<long, Strand>>>& truth_ancestral = std::nullopt);

}  // namespace duphist

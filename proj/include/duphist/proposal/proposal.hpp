#pragma once

#include <array>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "duphist/core/history.hpp"
#include "duphist/data/dataset.hpp"
#include "duphist/model/params.hpp"
#include "duphist/proposal/working_tree.hpp"

namespace duphist {

using Features = std::array<double, 10>;

struct ProposalContext {
  const Dataset* data = nullptr;
  const ModelParams* params = nullptr;
  const ProposalSettings* settings = nullptr;
};

// Active sequences and per-type working trees while extant data is unwound.
struct UnwindState {
  SequenceSet seqs;
  std::vector<WorkingTree> trees;
};

// trees[t] is the guide tree used for type t.
UnwindState initial_state(const Dataset& data, const std::vector<const Tree*>& trees);

// Single root sequence with every type present once.
bool is_ancestral(const UnwindState& state, const SpeciesTree& tree);

struct Candidate {
  int species = 0;  // sequence node for duplications, parent node for speciations
  Event event;
  std::string key;  // in instance ids, comparable across histories
  Features features{};
  double log_weight = 0.0;
};

std::vector<Candidate> enumerate_duplications(const UnwindState& state, const ProposalContext& ctx,
                                              const std::set<std::string>& prev_keys);
std::vector<Candidate> enumerate_speciations(const UnwindState& state, const ProposalContext& ctx,
                                             const std::set<std::string>& prev_keys);
// Duplications for each active sequence in node order, then speciations.
std::vector<Candidate> enumerate_candidates(const UnwindState& state, const ProposalContext& ctx,
                                            const std::set<std::string>& prev_keys);

UnwindState apply_candidate(const UnwindState& state, const Candidate& c);

struct StepChoice {
  std::size_t index = 0;
  double log_prob = 0.0;
};

// Normalized log-probability of each candidate with weights raised to `heat`.
std::vector<double> step_log_probs(const std::vector<Candidate>& candidates, double heat);
StepChoice sample_step(const std::vector<Candidate>& candidates, double heat, std::mt19937_64& rng);

struct Step {
  int species = 0;
  Event event;
  std::string key;
  double log_prob = 0.0;
};

struct Proposal {
  History history;
  std::vector<Step> steps;  // unwind order
  double log_q = 0.0;
};

std::set<std::string> step_keys(const std::vector<Step>& steps);

// Forward history from an unwind sequence ending at `ancestral`.
History history_from_steps(std::shared_ptr<const SpeciesTree> tree, const std::vector<Step>& steps,
                           const AtomicSequence& ancestral);

Proposal propose_history(const ProposalContext& ctx, const std::vector<const Tree*>& trees,
                         const std::set<std::string>& prev_keys, double heat, std::mt19937_64& rng);

// Log-probability of proposing exactly `steps`; -inf when some step is not a candidate.
double replay_log_q(const ProposalContext& ctx, const std::vector<const Tree*>& trees, const std::vector<Step>& steps,
                    const std::set<std::string>& prev_keys, double heat);

}  // namespace duphist

#include "duphist/proposal/proposal.hpp"

#include <cmath>
#include <sstream>

#include "duphist/core/errors.hpp"
#include "duphist/model/distributions.hpp"

namespace duphist {

std::vector<double> step_log_probs(const std::vector<Candidate>& candidates, double heat) {
  std::vector<double> logits;
  logits.reserve(candidates.size());
  for (const auto& c : candidates) logits.push_back(heat * c.log_weight);
  const double z = log_sum_exp(logits);
  for (auto& l : logits) l -= z;
  return logits;
}

StepChoice sample_step(const std::vector<Candidate>& candidates, double heat, std::mt19937_64& rng) {
  if (candidates.empty()) throw InternalError("no candidate event to sample");
  auto lp = step_log_probs(candidates, heat);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    acc += std::exp(lp[i]);
    if (u < acc) return {i, lp[i]};
  }
  // Rounding left u above the total; take the last candidate with positive mass.
  std::size_t i = lp.size() - 1;
  while (i > 0 && lp[i] == neg_inf) --i;
  return {i, lp[i]};
}

std::set<std::string> step_keys(const std::vector<Step>& steps) {
  std::set<std::string> out;
  for (const auto& s : steps) out.insert(s.key);
  return out;
}

History history_from_steps(std::shared_ptr<const SpeciesTree> tree, const std::vector<Step>& steps,
                           const AtomicSequence& ancestral) {
  History h = History::empty(tree, ancestral);
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    if (const auto* d = std::get_if<Duplication>(&it->event)) {
      h.branch_events[static_cast<std::size_t>(it->species)].push_back(*d);
    } else if (const auto* s = std::get_if<Speciation>(&it->event)) {
      h.speciations[static_cast<std::size_t>(s->parent)] = *s;
    } else {
      throw InternalError("unwind steps hold only duplications and speciations");
    }
  }
  return h;
}

namespace {

std::string dump_state(const UnwindState& state, const SpeciesTree& tree, const std::vector<Step>& steps) {
  std::ostringstream out;
  out << "unwind stalled after " << steps.size() << " steps\n";
  for (const auto& [v, seq] : state.seqs) out << tree.name(v) << "\t" << layout_string(seq) << "\n";
  for (const auto& s : steps) out << "step " << s.key << "\n";
  return out.str();
}

}  // namespace

Proposal propose_history(const ProposalContext& ctx, const std::vector<const Tree*>& trees,
                         const std::set<std::string>& prev_keys, double heat, std::mt19937_64& rng) {
  const auto& tree = *ctx.data->species_tree;
  UnwindState state = initial_state(*ctx.data, trees);
  Proposal out;
  while (!is_ancestral(state, tree)) {
    auto candidates = enumerate_candidates(state, ctx, prev_keys);
    if (candidates.empty()) throw InternalError(dump_state(state, tree, out.steps));
    auto choice = sample_step(candidates, heat, rng);
    auto& c = candidates[choice.index];
    state = apply_candidate(state, c);
    out.log_q += choice.log_prob;
    out.steps.push_back({c.species, std::move(c.event), std::move(c.key), choice.log_prob});
  }
  out.history = history_from_steps(ctx.data->species_tree, out.steps, state.seqs.begin()->second);
  return out;
}

double replay_log_q(const ProposalContext& ctx, const std::vector<const Tree*>& trees, const std::vector<Step>& steps,
                    const std::set<std::string>& prev_keys, double heat) {
  UnwindState state = initial_state(*ctx.data, trees);
  double lq = 0.0;
  for (const auto& step : steps) {
    auto candidates = enumerate_candidates(state, ctx, prev_keys);
    std::size_t found = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].species == step.species && candidates[i].event == step.event) {
        found = i;
        break;
      }
    }
    if (found == candidates.size()) return neg_inf;
    lq += step_log_probs(candidates, heat)[found];
    state = apply_candidate(state, candidates[found]);
  }
  if (!is_ancestral(state, *ctx.data->species_tree)) throw InternalError("replayed steps do not reach the ancestor");
  return lq;
}

}  // namespace duphist

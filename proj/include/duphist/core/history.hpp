#pragma once

#include <memory>
#include <string>
#include <vector>

#include "duphist/core/events.hpp"
#include "duphist/core/species_tree.hpp"
#include "duphist/core/tree.hpp"

namespace duphist {

// Events per species-tree branch in forward (time) order. The branch above
// node v has index v; the root's branch is the synthetic root branch. Each
// internal node carries exactly one speciation.
struct History {
  std::shared_ptr<const SpeciesTree> species_tree;
  AtomicSequence ancestral;
  std::vector<std::vector<BranchEvent>> branch_events;
  std::vector<Speciation> speciations;

  static History empty(std::shared_ptr<const SpeciesTree> tree, AtomicSequence ancestral);

  int branch_count() const { return static_cast<int>(branch_events.size()); }
  // Duplications plus speciation steps: the units the proposal unwinds.
  int step_count() const;

  friend bool operator==(const History& a, const History& b) {
    return a.ancestral == b.ancestral && a.branch_events == b.branch_events && a.speciations == b.speciations;
  }
};

struct BranchCounts {
  int duplications = 0;
  // Plain deletions, coupled deletions and speciation deletions entering the branch.
  int deletions = 0;
};

std::vector<BranchCounts> branch_counts(const History& h);

// Forward replay with lineage tracking: every duplication gives each source
// atom two fresh child ids (continuation and copy), every speciation gives
// each parent atom one fresh id per child species. Ids index `parent`/`type`.
struct Replay {
  std::vector<AtomicSequence> top;     // per node, after speciation deletions
  std::vector<AtomicSequence> bottom;  // per node, after the branch's events
  std::vector<InstanceId> parent;
  std::vector<TypeId> type;
};

// Throws CoordinateError / ValidityError on an event that does not fit.
Replay replay(const History& h);

// Sequence at the root speciation (after the root branch); the ancestral
// sequence itself for a single-species tree.
AtomicSequence root_node_sequence(const History& h);

struct Violation {
  std::string kind;  // duplicate-ancestral-type, replay-mismatch, invalid-event, speciation-structure
  std::string message;
};

// `extant` holds one sequence per leaf of the species tree, keyed by node.
std::vector<Violation> validate_history(const History& h, const SequenceSet& extant);

// Segment tree for the lineage ids in `leaves`: ancestors joined, unary nodes
// suppressed, leaf TreeNode::id set to the matching entry of `labels`.
Tree lineage_tree(const std::vector<InstanceId>& parent, const std::vector<InstanceId>& leaves,
                  const std::vector<int>& labels);

// Log number of unwind orders compatible with h (linear extensions of the
// step poset; 0 for a single species).
double log_unwind_orders(const History& h);

}  // namespace duphist

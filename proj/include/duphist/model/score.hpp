#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "duphist/core/history.hpp"
#include "duphist/data/dataset.hpp"
#include "duphist/model/params.hpp"

namespace duphist {

// bp coordinates of a duplication against its pre-event sequence. Distance is
// the gap between source and insertion point plus one (tandem copies have
// distance 1); the centroid is the floor midpoint of the covered region.
struct DuplicationGeometry {
  long length = 0;
  long distance = 0;
  long centroid = 0;
};

DuplicationGeometry duplication_geometry(const Duplication& d, const AtomicSequence& pre, const AtomCatalog& catalog);

double duplication_log_prior(long length, long distance, bool inverted, long len_before, const ModelParams& params);
double deletion_log_prior(long length, long len_before, const ModelParams& params);

// Prior of one branch event given the sequence just before it. A coupled
// deletion is scored as its own deletion right after the duplication.
double event_log_prior(const BranchEvent& e, const AtomicSequence& pre, const AtomCatalog& catalog,
                       const ModelParams& params);

// Number of scored events on a branch (coupled and speciation deletions included).
int scored_event_count(const History& h, int branch);

// Poisson count term plus the event priors along the branch; speciation
// deletions entering the branch come first.
double branch_log_prob(const History& h, const Replay& r, int branch, const AtomCatalog& catalog,
                       const ModelParams& params);
double history_log_prior(const History& h, const Replay& r, const AtomCatalog& catalog, const ModelParams& params);

// joint_log_score: history prior plus, per atom type, the log-likelihood of
// the type's sequences on the implied segment tree (branch lengths at their
// maximum-likelihood values). Topology likelihoods are cached, so one scorer
// should not be shared between threads.
class JointScorer {
 public:
  JointScorer(const Dataset& data, const ModelParams& params);

  struct Parts {
    double prior = 0.0;
    double likelihood = 0.0;
    double total() const { return prior + likelihood; }
  };

  // Throws ConsistencyError when the history does not reproduce the data.
  Parts parts(const History& h);
  double score(const History& h) { return parts(h).total(); }

  // Segment trees of h; leaf ids are dataset instance indices.
  std::vector<Tree> segment_trees(const History& h, const Replay& r) const;

 private:
  double type_log_likelihood(TypeId type, const Tree& tree);

  const Dataset& data_;
  ModelParams params_;
  std::vector<int> row_of_;
  std::vector<std::unordered_map<std::string, double>> cache_;
};

}  // namespace duphist

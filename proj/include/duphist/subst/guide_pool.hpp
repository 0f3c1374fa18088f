#pragma once

#include <cstdint>
#include <vector>

#include "duphist/core/atoms.hpp"
#include "duphist/core/tree.hpp"
#include "duphist/model/params.hpp"
#include "duphist/subst/likelihood.hpp"

namespace duphist {

// Unrooted, possibly multifurcating trees over the instances of one type,
// stored rooted at an internal node (leaf TreeNode::id = instance id).
struct GuideTreePool {
  TypeId type = -1;
  std::vector<Tree> samples;
};

// Contracts internal branches with length * atom_length_bp < threshold.
Tree collapse_short_branches(const Tree& tree, long atom_length_bp, double threshold = 5.0);

// MCMC over unrooted topologies (NNI) and branch lengths (multiplicative
// moves) under pruning likelihood, uniform topology prior and exponential
// branch-length prior; retained samples are collapsed. Row i of `aln`
// belongs to instance instance_ids[i].
GuideTreePool sample_guide_tree_pool(TypeId type, const std::vector<InstanceId>& instance_ids,
                                     const PatternAlignment& aln, long atom_length_bp, const HkyParams& hky,
                                     const PoolSettings& settings, std::uint64_t seed);

// Pools for every type of a dataset; type t uses seed + t.
struct Dataset;
std::vector<GuideTreePool> build_pools(const Dataset& data, const HkyParams& hky, const PoolSettings& settings,
                                       std::uint64_t seed, int threads = 1);

}  // namespace duphist

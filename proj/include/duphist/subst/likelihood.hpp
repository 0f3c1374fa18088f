#pragma once

#include <string>
#include <vector>

#include "duphist/core/tree.hpp"
#include "duphist/model/params.hpp"

namespace duphist {

// Distinct alignment columns with multiplicities. Codes -1 mark missing data.
struct PatternAlignment {
  int taxa = 0;
  long sites = 0;
  std::vector<std::vector<signed char>> patterns;  // [pattern][taxon]
  std::vector<double> weights;
};

// Rows must have equal length (DataError otherwise).
PatternAlignment compress_patterns(const std::vector<std::string>& rows);

// Felsenstein pruning on a rooted tree whose leaves carry taxon indices in
// TreeNode::id; the root distribution is pi. Multifurcations and unary nodes
// are allowed.
double pruning_log_likelihood(const Tree& tree, const PatternAlignment& aln, const HkyParams& params);
double pruning_log_likelihood(const Tree& tree, const std::vector<std::string>& rows, const HkyParams& params);

// Log-likelihood of the data at a single node: sum over sites of log pi.
double single_taxon_log_likelihood(const PatternAlignment& aln, const HkyParams& params);

// Replaces every branch length by its maximum-likelihood value (cyclic
// one-dimensional Brent searches) and returns the maximized log-likelihood.
double optimize_branch_lengths(Tree& tree, const PatternAlignment& aln, const HkyParams& params, int max_passes = 8);

// Log-likelihood of the unrooted topology of `tree` with ML branch lengths.
double profile_log_likelihood(const Tree& tree, const PatternAlignment& aln, const HkyParams& params);

}  // namespace duphist

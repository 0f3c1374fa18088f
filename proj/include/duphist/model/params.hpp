#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace duphist {

// Nucleotide order A, C, G, T.
struct HkyParams {
  std::array<double, 4> pi{0.295, 0.205, 0.205, 0.295};
  double kappa = 4.0;

  void validate() const;
};

inline std::array<double, 10> default_feature_weights() {
  return {1.0, std::log(10.0), -10.0, -1.0, -std::log(100.0), -std::log(10.0), std::log(10.0), -std::log(10.0), 3.0,
          -std::log(1000.0)};
}

struct ModelParams {
  double lambda = 50.0;
  double mean_dup_length = 14307.0;
  double mean_dup_distance = 306718.0;
  double p_inversion = 0.39;
  double p_deletion = 0.05;
  double mean_del_length = 14307.0;
  double root_branch_length = 0.5;
  HkyParams hky;
  std::array<double, 10> feature_weights = default_feature_weights();
  std::vector<double> heats{0.5, 0.6, 1.0, 1.2};

  void validate() const;
};

struct ChainConfig {
  int iterations = 10000;
  int burn_in = 2500;
  int chains = 2;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct PoolSettings {
  int iterations = 10000;
  int burn_in = 2500;
  int thin = 10;
  double branch_prior_mean = 0.1;
  // Internal branches with fewer expected substitutions over the atom are contracted.
  double collapse_substitutions = 5.0;
};

struct ProposalSettings {
  double tree_keep_probability = 0.95;
  int speciation_top = 20;
  int speciation_cap = 200;
  double speciation_near_optimal = 0.9;
};

struct SimSettings {
  long ancestral_length = 10000;
  long min_atom_bp = 500;
  int max_event_tries = 10000;
  int max_event_restarts = 100;
};

struct AtomizerSettings {
  long window_bp = 500;
  double identity = 0.90;
  int seed_k = 16;
};

struct RunConfig {
  ModelParams model;
  ChainConfig chain;
  PoolSettings pool;
  ProposalSettings proposal;
  SimSettings sim;
  AtomizerSettings atomizer;
};

}  // namespace duphist

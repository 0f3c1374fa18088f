#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "duphist/data/dataset.hpp"
#include "duphist/sampler/sampler.hpp"
#include "duphist/subst/guide_pool.hpp"

namespace duphist {

// Pool file: '#' header with type_id and settings, one Newick per line.
// Leaf labels are atom ids of the atoms TSV.
std::string format_pool(const GuideTreePool& pool, const Dataset& data, const PoolSettings& settings);
// Leaves are mapped back to dataset instance indices.
GuideTreePool parse_pool(std::string_view text, const Dataset& data, TypeId type);

// One line per iteration: chain, iteration, log_score, accepted, then
// dup_<node> del_<node> per species-tree branch.
std::string samples_header(const SpeciesTree& tree);
std::string format_sample_records(const std::vector<SampleRecord>& records);

struct SampleRow {
  int chain = 0;
  int iteration = 0;
  double log_score = 0.0;
  bool accepted = false;
  std::vector<BranchCounts> counts;
};
std::vector<SampleRow> parse_samples(std::string_view text, const SpeciesTree& tree);

std::string format_summary(const PosteriorSummary& s, const SpeciesTree& tree);
// typeA, typeB as signed external type ids ("3+", "5-").
std::string format_adjacency(const PosteriorSummary& s);
std::string format_metrics(const std::vector<std::pair<std::string, double>>& metrics);

std::string sha256_hex(std::string_view data);

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> inputs;   // role -> sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // relative path -> sha256
};

// JSON; the timestamp comes from SOURCE_DATE_EPOCH (0 when unset).
std::string format_manifest(const Manifest& m);

}  // namespace duphist

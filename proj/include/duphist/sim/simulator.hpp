#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "duphist/core/history.hpp"
#include "duphist/data/formats.hpp"
#include "duphist/model/params.hpp"

namespace duphist {

// One simulated event in nucleotide coordinates of the sequence it acted on.
// Duplications copy [begin,end) to before `target`; deletions remove [begin,end).
struct BpEvent {
  enum class Kind { duplication, deletion };
  int branch = 0;
  int ordinal = 0;
  double time = 0.0;  // from the top of the root branch
  Kind kind = Kind::duplication;
  long begin = 0;
  long end = 0;
  long target = 0;
  bool inverted = false;
  long len_before = 0;
  long distance = 0;  // duplications only
  long centroid = 0;

  friend bool operator==(const BpEvent&, const BpEvent&) = default;
};

struct DrawnEvent {
  BpEvent event;
  int tries = 0;
};

// Draws kind and coordinates for a sequence of `len` bp, rejecting
// combinations that do not fit. After max_event_tries rejections the event is
// redrawn from scratch (kind included); nullopt after max_event_restarts.
std::optional<DrawnEvent> draw_event(long len, const ModelParams& params, const SimSettings& settings,
                                     std::mt19937_64& rng);

// Atom-level view of a set of bp events: breakpoints are all event endpoints
// mapped back to ancestral coordinates; atom types are the ancestral
// intervals between consecutive breakpoints.
struct TruthAtomization {
  std::vector<long> breakpoints;  // ancestral coordinates, sorted, includes 0 and N
  AtomCatalog catalog;
  History history;
  // Per leaf species node: extant atoms (type, strand, lineage id).
  std::vector<AtomicSequence> extant;
  // Lineage of atom instances: parent (-1 for ancestral atoms) and birth time.
  std::vector<InstanceId> lineage_parent;
  std::vector<double> lineage_birth;
  std::vector<double> node_time;  // time at the bottom of each species branch
};

TruthAtomization truth_atomize(std::shared_ptr<const SpeciesTree> tree, long ancestral_length,
                               const std::vector<BpEvent>& events, double root_branch_length);

struct SimulatedCluster {
  std::shared_ptr<const SpeciesTree> species_tree;
  std::string ancestral_dna;
  std::vector<BpEvent> events;
  TruthAtomization truth;
  std::vector<AtomRecord> truth_atoms;  // unfiltered; atom ids index extant atoms
  std::vector<FastaRecord> extant_fastas;  // one record per leaf, named after the species
  std::vector<TypeId> segment_tree_types;
  std::vector<Tree> truth_segment_trees;  // leaf ids are truth atom ids, lengths in substitutions/site
};

SimulatedCluster simulate_cluster(std::shared_ptr<const SpeciesTree> tree, const ModelParams& params,
                                  const SimSettings& settings, std::uint64_t seed);

// Branches from the root branch down to the first leaf (the focal lineage).
std::vector<int> focal_lineage(const SpeciesTree& tree);

}  // namespace duphist

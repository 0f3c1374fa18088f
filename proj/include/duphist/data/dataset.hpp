#pragma once

#include <memory>
#include <string>
#include <vector>

#include "duphist/core/events.hpp"
#include "duphist/core/species_tree.hpp"
#include "duphist/data/formats.hpp"
#include "duphist/subst/likelihood.hpp"

namespace duphist {

// Atomized input ready for sampling. Instances are numbered 0..n-1 in
// (species node, seq_name, start) order and AtomInstance::id holds that index.
// Types are renumbered densely in increasing file type id.
struct Dataset {
  std::shared_ptr<const SpeciesTree> species_tree;
  std::vector<AtomRecord> records;
  std::vector<long> external_type;  // dense type -> type_id in the file
  AtomCatalog catalog;
  SequenceSet extant;  // one sequence per leaf
  std::vector<std::vector<InstanceId>> type_instances;
  std::vector<std::string> instance_dna;  // in the type's forward orientation
  std::vector<PatternAlignment> alignments;  // rows follow type_instances

  int instance_count() const { return static_cast<int>(records.size()); }
  int type_count() const { return catalog.type_count(); }
};

// `tree` may be null when all atoms belong to one species. Throws DataError
// listing every offending atom when atoms and sequences disagree.
Dataset build_dataset(std::vector<AtomRecord> atoms, const std::vector<FastaRecord>& fasta,
                      std::shared_ptr<const SpeciesTree> tree);

// Drops atoms of types shorter than min_bp; neighbours become adjacent.
std::vector<AtomRecord> filter_short_atoms(const std::vector<AtomRecord>& atoms, long min_bp);

}  // namespace duphist

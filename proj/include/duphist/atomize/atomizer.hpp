#pragma once

#include <string>
#include <vector>

#include "duphist/data/formats.hpp"
#include "duphist/model/params.hpp"

namespace duphist {

struct InputSequence {
  std::string species;
  std::string seq_name;
  std::string dna;
};

// FASTA records as input sequences; the record name is both species and sequence name.
std::vector<InputSequence> sequences_from_fasta(const std::vector<FastaRecord>& records);

struct WindowCopy {
  int seq = 0;
  long start = 0;
  long end = 0;
  Strand strand = Strand::forward;
  double identity = 0.0;
};

struct WindowMatch {
  int seq = 0;
  long start = 0;
  long end = 0;
  std::vector<WindowCopy> copies;  // includes the window itself; pairwise non-overlapping
};

// Tiles every sequence into windows and collects their ungapped copies
// (k-mer seeds on both strands, identity >= cutoff).
std::vector<WindowMatch> find_window_matches(const std::vector<InputSequence>& seqs, const AtomizerSettings& settings);

// Greedy assignment: windows with most copies first; a window or copy that
// overlaps an assigned atom is dropped.
std::vector<AtomRecord> window_atomize(const std::vector<InputSequence>& seqs, const AtomizerSettings& settings);

// Merges type pairs that always occur as contiguous neighbours with the same
// relative orientation, until no pair is left. Type and atom ids are renumbered.
std::vector<AtomRecord> merge_paired_atoms(const std::vector<AtomRecord>& atoms);

}  // namespace duphist

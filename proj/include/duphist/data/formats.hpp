#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "duphist/core/atoms.hpp"

namespace duphist {

// One row of an atoms TSV: atom_id, type_id, species, seq_name, start, end, strand.
struct AtomRecord {
  long atom_id = 0;
  long type_id = 0;
  std::string species;
  std::string seq_name;
  long start = 0;  // 0-based inclusive
  long end = 0;    // exclusive
  Strand strand = Strand::forward;

  long length() const { return end - start; }
  friend bool operator==(const AtomRecord&, const AtomRecord&) = default;
};

std::vector<AtomRecord> parse_atoms_tsv(std::string_view text);
std::string format_atoms_tsv(const std::vector<AtomRecord>& atoms);

struct FastaRecord {
  std::string name;
  std::string sequence;
  friend bool operator==(const FastaRecord&, const FastaRecord&) = default;
};

std::vector<FastaRecord> parse_fasta(std::string_view text);
std::string format_fasta(const std::vector<FastaRecord>& records, int width = 60);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace duphist

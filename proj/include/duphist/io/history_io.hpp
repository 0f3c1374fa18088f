#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "duphist/core/history.hpp"
#include "duphist/sim/simulator.hpp"

namespace duphist {

// History file:
//   #duphist-history v1
//   #species_tree <newick>
//   @history key=value ...
//   ancestral <type><strand> ...
//   event <branch> <ordinal> dup <src_begin> <src_end> <target> <inverted 0|1> <del_begin|-> <del_end|->
//   event <branch> <ordinal> del <begin> <end>
//   speciation <parent> <child_a> <child_b> <deletions_a> <deletions_b>   (b:e,b:e or -)
//   @end
// Fields are tab-separated; branches are species-tree node names.
struct HistoryBlock {
  std::vector<std::pair<std::string, std::string>> attributes;
  History history;

  std::string attribute(const std::string& key) const;
};

struct HistoryFile {
  std::shared_ptr<const SpeciesTree> species_tree;
  std::vector<HistoryBlock> blocks;
};

std::string history_file_header(const SpeciesTree& tree);
// `external_type` maps the history's type ids to the ids written, when given.
std::string format_history_block(const HistoryBlock& block, const std::vector<long>* external_type = nullptr);
std::string format_history_file(const HistoryFile& file, const std::vector<long>* external_type = nullptr);
// Instance ids are assigned 0.. in ancestral order. Throws ParseError.
HistoryFile parse_history_file(std::string_view text);

// Simulated events in nucleotide coordinates, one per line.
std::string format_bp_events(const SpeciesTree& tree, const std::vector<BpEvent>& events);
std::vector<BpEvent> parse_bp_events(const SpeciesTree& tree, std::string_view text);

}  // namespace duphist

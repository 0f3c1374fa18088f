#pragma once

#include <memory>
#include <sstream>
#include <string>

#include "duphist/core/atoms.hpp"
#include "duphist/core/species_tree.hpp"
#include "duphist/core/tree.hpp"
#include "duphist/data/dataset.hpp"

namespace duphist::testing {

// "0+ 1- 2+" -> atoms with ids first, first+1, ...
inline AtomicSequence seq_of(const std::string& layout, int species = 0, int first_id = 0) {
  AtomicSequence s{species, {}};
  std::istringstream in(layout);
  std::string tok;
  int id = first_id;
  while (in >> tok) {
    Strand strand = tok.back() == '-' ? Strand::reverse : Strand::forward;
    if (tok.back() == '+' || tok.back() == '-') tok.pop_back();
    s.atoms.push_back({id++, std::stoi(tok), strand});
  }
  return s;
}

inline std::shared_ptr<const SpeciesTree> single_species() {
  return std::make_shared<SpeciesTree>(SpeciesTree::single("s"));
}

inline std::shared_ptr<const SpeciesTree> hcm_tree() {
  return std::make_shared<SpeciesTree>(
      SpeciesTree::from_newick("((human:0.0067,chimp:0.0076)hominid:0.0238,macaque:0.0338)root;"));
}

// Newick whose numeric leaf labels become instance ids.
inline Tree id_tree(const std::string& newick) {
  Tree t = parse_newick(newick);
  for (int v = 0; v < t.size(); ++v) {
    if (t.node(v).is_leaf()) t.node(v).id = std::stoi(t.node(v).label);
  }
  return t;
}

// Star tree over the given instance ids.
inline Tree star_tree(const std::vector<InstanceId>& ids, double len = 0.01) {
  Tree t;
  if (ids.empty()) return t;
  if (ids.size() == 1) {
    t.add_node(-1, 0.0, std::to_string(ids[0]), ids[0]);
    return t;
  }
  int r = t.add_node(-1);
  for (auto id : ids) t.add_node(r, len, std::to_string(id), id);
  return t;
}

// Dataset without sequences: layouts per leaf species (tree leaf order),
// instance ids numbered across species in order.
inline Dataset layout_dataset(std::shared_ptr<const SpeciesTree> tree, const std::vector<std::string>& layouts,
                              std::vector<long> lengths) {
  Dataset d;
  d.species_tree = tree;
  d.catalog = AtomCatalog(lengths);
  d.type_instances.resize(lengths.size());
  for (std::size_t t = 0; t < lengths.size(); ++t) d.external_type.push_back(static_cast<long>(t));
  auto leaves = tree->leaves();
  int id = 0;
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    auto seq = seq_of(layouts[i], leaves[i], id);
    for (const auto& a : seq.atoms) {
      d.type_instances[static_cast<std::size_t>(a.type)].push_back(a.id);
      AtomRecord r;
      r.atom_id = a.id;
      r.type_id = a.type;
      r.species = tree->name(leaves[i]);
      d.records.push_back(r);
    }
    id += seq.size();
    d.extant[leaves[i]] = std::move(seq);
  }
  return d;
}

inline std::vector<Tree> star_trees(const Dataset& d, double len = 0.01) {
  std::vector<Tree> out;
  for (const auto& ids : d.type_instances) out.push_back(star_tree(ids, len));
  return out;
}

inline std::vector<const Tree*> pointers(const std::vector<Tree>& trees) {
  std::vector<const Tree*> out;
  for (const auto& t : trees) out.push_back(&t);
  return out;
}

}  // namespace duphist::testing

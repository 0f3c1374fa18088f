#include "duphist/data/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "duphist/core/errors.hpp"
#include "duphist/subst/hky.hpp"

namespace duphist {

Dataset build_dataset(std::vector<AtomRecord> atoms, const std::vector<FastaRecord>& fasta,
                      std::shared_ptr<const SpeciesTree> tree) {
  Dataset ds;
  std::vector<std::string> problems;
  if (!tree) {
    std::set<std::string> species;
    for (const auto& a : atoms) species.insert(a.species);
    if (species.size() > 1) throw DataError("atoms span several species; a species tree is required");
    tree = std::make_shared<SpeciesTree>(SpeciesTree::single(species.empty() ? "species" : *species.begin()));
  }
  ds.species_tree = tree;
  std::map<std::string, const std::string*> seqs;
  for (const auto& r : fasta) {
    if (seqs.count(r.name)) throw DataError("duplicate FASTA record " + r.name);
    seqs[r.name] = &r.sequence;
  }
  auto label = [](const AtomRecord& a) {
    return "atom " + std::to_string(a.atom_id) + " (" + a.seq_name + ":" + std::to_string(a.start) + "-" +
           std::to_string(a.end) + ")";
  };
  std::set<long> atom_ids;
  for (const auto& a : atoms) {
    int node = tree->find(a.species);
    if (node < 0 || !tree->is_leaf(node)) problems.push_back(label(a) + ": species '" + a.species + "' is not a leaf");
    auto it = seqs.find(a.seq_name);
    if (it == seqs.end()) {
      problems.push_back(label(a) + ": no FASTA record '" + a.seq_name + "'");
    } else if (a.end > static_cast<long>(it->second->size())) {
      problems.push_back(label(a) + ": extends past the end of its sequence (" + std::to_string(it->second->size()) + " bp)");
    }
    if (!atom_ids.insert(a.atom_id).second) problems.push_back(label(a) + ": duplicate atom_id");
  }
  if (!problems.empty()) {
    std::string msg = "atoms do not match the sequences:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  std::stable_sort(atoms.begin(), atoms.end(), [&](const AtomRecord& x, const AtomRecord& y) {
    int nx = tree->find(x.species);
    int ny = tree->find(y.species);
    return std::tie(nx, x.seq_name, x.start) < std::tie(ny, y.seq_name, y.start);
  });
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    const auto& p = atoms[i - 1];
    const auto& a = atoms[i];
    if (p.seq_name == a.seq_name && a.start < p.end) problems.push_back(label(a) + ": overlaps " + label(p));
  }
  std::map<long, TypeId> dense;
  for (const auto& a : atoms) dense.emplace(a.type_id, 0);
  for (auto& [ext, id] : dense) {
    id = static_cast<TypeId>(ds.external_type.size());
    ds.external_type.push_back(ext);
  }
  std::vector<long> lengths(ds.external_type.size(), -1);
  ds.type_instances.resize(ds.external_type.size());
  for (int leaf : tree->leaves()) ds.extant[leaf] = AtomicSequence{leaf, {}};
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& a = atoms[i];
    TypeId t = dense[a.type_id];
    auto& len = lengths[static_cast<std::size_t>(t)];
    if (len < 0) {
      len = a.length();
    } else if (len != a.length()) {
      problems.push_back(label(a) + ": length " + std::to_string(a.length()) + " differs from type " +
                         std::to_string(a.type_id) + " length " + std::to_string(len));
    }
    auto id = static_cast<InstanceId>(i);
    ds.extant[tree->find(a.species)].atoms.push_back({id, t, a.strand});
    ds.type_instances[static_cast<std::size_t>(t)].push_back(id);
    std::string dna = seqs[a.seq_name]->substr(static_cast<std::size_t>(a.start), static_cast<std::size_t>(a.length()));
    ds.instance_dna.push_back(a.strand == Strand::forward ? dna : reverse_complement(dna));
  }
  if (!problems.empty()) {
    std::string msg = "atoms do not match the sequences:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  ds.catalog = AtomCatalog(lengths);
  for (const auto& members : ds.type_instances) {
    std::vector<std::string> rows;
    for (InstanceId id : members) rows.push_back(ds.instance_dna[static_cast<std::size_t>(id)]);
    ds.alignments.push_back(compress_patterns(rows));
  }
  ds.records = std::move(atoms);
  return ds;
}

std::vector<AtomRecord> filter_short_atoms(const std::vector<AtomRecord>& atoms, long min_bp) {
  std::map<long, long> shortest;
  for (const auto& a : atoms) {
    auto [it, fresh] = shortest.emplace(a.type_id, a.length());
    if (!fresh) it->second = std::min(it->second, a.length());
  }
  std::vector<AtomRecord> out;
  for (const auto& a : atoms) {
    if (shortest[a.type_id] >= min_bp) out.push_back(a);
  }
  return out;
}

}  // namespace duphist

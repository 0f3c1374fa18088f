#include "duphist/core/adjacency.hpp"

#include <algorithm>
#include <string>

namespace duphist {

Adjacency normalize_adjacency(int left, int right) {
  return std::min(Adjacency{left, right}, Adjacency{flip_signed(right), flip_signed(left)});
}

void collect_adjacencies(const AtomicSequence& seq, std::set<Adjacency>& out) {
  for (int i = 0; i + 1 < seq.size(); ++i) out.insert(adjacency_of(seq[i], seq[i + 1]));
}

std::set<Adjacency> adjacency_set(const AtomicSequence& seq) {
  std::set<Adjacency> out;
  collect_adjacencies(seq, out);
  return out;
}

int adjacent_pair_count(const std::vector<AtomicSequence>& state) {
  std::set<Adjacency> all;
  for (const auto& s : state) collect_adjacencies(s, all);
  return static_cast<int>(all.size());
}

int adjacent_pair_count(const AtomicSequence& seq) { return static_cast<int>(adjacency_set(seq).size()); }

std::string signed_type_string(int code) { return std::to_string(code / 2) + (code % 2 ? "-" : "+"); }

}  // namespace duphist

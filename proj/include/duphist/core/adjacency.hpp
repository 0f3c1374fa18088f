#pragma once

#include <set>
#include <utility>
#include <vector>

#include "duphist/core/atoms.hpp"

namespace duphist {

// Signed type encoded as 2*type + (reverse ? 1 : 0).
constexpr int signed_type(TypeId t, Strand s) { return 2 * t + (s == Strand::reverse ? 1 : 0); }
constexpr int signed_type(const AtomInstance& a) { return signed_type(a.type, a.strand); }
constexpr int flip_signed(int code) { return code ^ 1; }

// Adjacency of consecutive atoms, with (x,y) and (-y,-x) identified.
using Adjacency = std::pair<int, int>;

Adjacency normalize_adjacency(int left, int right);
inline Adjacency adjacency_of(const AtomInstance& a, const AtomInstance& b) {
  return normalize_adjacency(signed_type(a), signed_type(b));
}

void collect_adjacencies(const AtomicSequence& seq, std::set<Adjacency>& out);
std::set<Adjacency> adjacency_set(const AtomicSequence& seq);

// Number of distinct normalized type adjacencies over all sequences.
int adjacent_pair_count(const std::vector<AtomicSequence>& state);
int adjacent_pair_count(const AtomicSequence& seq);

// "3+" / "3-"
std::string signed_type_string(int code);

}  // namespace duphist

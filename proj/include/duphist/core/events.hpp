#pragma once

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "duphist/core/atoms.hpp"

namespace duphist {

// Half-open interval of atom indices.
struct Span {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool contains(int i) const { return i >= begin && i < end; }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Deletion {
  Span span;
  friend bool operator==(const Deletion&, const Deletion&) = default;
};

// Copy of `source` inserted before index `target` of the pre-event sequence.
// The coupled deletion, if any, is expressed in the coordinates of the
// sequence right after the copy was inserted and must sit strictly inside
// either the source or the inserted copy.
struct Duplication {
  Span source;
  int target = 0;
  bool inverted = false;
  std::optional<Span> coupled_deletion;

  bool left_to_right() const { return target >= source.end; }
  // Position of the inserted copy / the source in post-insertion coordinates.
  Span copy_span() const { return {target, target + source.size()}; }
  Span shifted_source() const {
    return left_to_right() ? source : Span{source.begin + source.size(), source.end + source.size()};
  }
  friend bool operator==(const Duplication&, const Duplication&) = default;
};

using BranchEvent = std::variant<Duplication, Deletion>;

// Parent sequence copied into both children, each followed by deletions.
// Deletion spans are in parent coordinates, listed right to left so that
// applying them in order never shifts a later span.
struct Speciation {
  int parent = -1;
  int child_a = -1;
  int child_b = -1;
  std::vector<Span> deletions_a;
  std::vector<Span> deletions_b;
  friend bool operator==(const Speciation&, const Speciation&) = default;
};

using Event = std::variant<Duplication, Deletion, Speciation>;

class IdSource {
 public:
  explicit IdSource(InstanceId first = 0) : next_{first} {}
  InstanceId operator()() { return next_++; }
  InstanceId peek() const { return next_; }

 private:
  InstanceId next_;
};

// Throws CoordinateError / ValidityError when d does not fit a sequence of n atoms.
void check_duplication(int n, const Duplication& d);
void check_deletion(int n, const Deletion& d);

AtomicSequence apply_duplication(const AtomicSequence& seq, const Duplication& d, IdSource& ids);
AtomicSequence apply_deletion(const AtomicSequence& seq, const Deletion& d);
// Applies the deletions of one child of a speciation.
AtomicSequence apply_speciation_deletions(const AtomicSequence& parent, const std::vector<Span>& deletions);

AtomicSequence unwind_duplication(const AtomicSequence& seq, const Duplication& d);

// Sequences keyed by species-tree node.
using SequenceSet = std::map<int, AtomicSequence>;

// Inverse of the forward application of e, acting on the sequence of `species`
// (ignored for speciations). Deletions outside duplications and speciations
// lose atoms and cannot be inverted.
SequenceSet unwind_event(const SequenceSet& state, int species, const Event& e);

}  // namespace duphist

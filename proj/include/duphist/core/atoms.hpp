#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace duphist {

enum class Strand : std::uint8_t { forward, reverse };

constexpr Strand flip(Strand s) { return s == Strand::forward ? Strand::reverse : Strand::forward; }
constexpr char strand_char(Strand s) { return s == Strand::forward ? '+' : '-'; }

using InstanceId = int;
using TypeId = int;

struct AtomInstance {
  InstanceId id = -1;
  TypeId type = -1;
  Strand strand = Strand::forward;

  friend bool operator==(const AtomInstance&, const AtomInstance&) = default;
};

// Atoms of one type share their breakpoints, hence their length.
struct AtomType {
  TypeId id = -1;
  long length_bp = 1;
  std::vector<InstanceId> instances;
};

struct AtomicSequence {
  int species = -1;
  std::vector<AtomInstance> atoms;

  int size() const { return static_cast<int>(atoms.size()); }
  bool empty() const { return atoms.empty(); }
  const AtomInstance& operator[](int i) const { return atoms[static_cast<std::size_t>(i)]; }

  friend bool operator==(const AtomicSequence&, const AtomicSequence&) = default;
};

// Equality of the type/strand layout, ignoring instance ids and species.
bool same_layout(const AtomicSequence& a, const AtomicSequence& b);

// Type lengths indexed by dense type id.
class AtomCatalog {
 public:
  AtomCatalog() = default;
  explicit AtomCatalog(std::vector<long> type_lengths) : lengths_{std::move(type_lengths)} {}

  int type_count() const { return static_cast<int>(lengths_.size()); }
  long length(TypeId t) const { return lengths_.at(static_cast<std::size_t>(t)); }
  const std::vector<long>& lengths() const { return lengths_; }
  TypeId add_type(long length_bp);

  long length_bp(const AtomicSequence& seq) const;
  // bp offset of atom boundary i (0 .. size) within seq.
  long offset_bp(const AtomicSequence& seq, int boundary) const;

 private:
  std::vector<long> lengths_;
};

// "3+ 5- 7+" style rendering, using type ids.
std::string layout_string(const AtomicSequence& seq);

}  // namespace duphist

#include "duphist/core/atoms.hpp"

#include "duphist/core/errors.hpp"

namespace duphist {

bool same_layout(const AtomicSequence& a, const AtomicSequence& b) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i) {
    if (a[i].type != b[i].type || a[i].strand != b[i].strand) return false;
  }
  return true;
}

TypeId AtomCatalog::add_type(long length_bp) {
  if (length_bp < 1) throw DataError("atom type length must be >= 1");
  lengths_.push_back(length_bp);
  return static_cast<TypeId>(lengths_.size() - 1);
}

long AtomCatalog::length_bp(const AtomicSequence& seq) const { return offset_bp(seq, seq.size()); }

long AtomCatalog::offset_bp(const AtomicSequence& seq, int boundary) const {
  if (boundary < 0 || boundary > seq.size()) throw CoordinateError("atom boundary out of range");
  long total = 0;
  for (int i = 0; i < boundary; ++i) total += length(seq[i].type);
  return total;
}

std::string layout_string(const AtomicSequence& seq) {
  std::string out;
  for (int i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(seq[i].type);
    out += strand_char(seq[i].strand);
  }
  return out;
}

}  // namespace duphist

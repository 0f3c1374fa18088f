#include "duphist/core/events.hpp"

#include <algorithm>
#include <string>

#include "duphist/core/errors.hpp"

namespace duphist {

namespace {

std::string span_text(const Span& s) { return "[" + std::to_string(s.begin) + "," + std::to_string(s.end) + ")"; }

bool strictly_inside(const Span& inner, const Span& outer) {
  return inner.begin > outer.begin && inner.end < outer.end;
}

AtomInstance mirrored(AtomInstance a, bool inverted) {
  if (inverted) a.strand = flip(a.strand);
  return a;
}

}  // namespace

void check_duplication(int n, const Duplication& d) {
  if (d.source.size() <= 0) throw ValidityError("duplication source " + span_text(d.source) + " is empty");
  if (d.source.begin < 0 || d.source.end > n) {
    throw CoordinateError("duplication source " + span_text(d.source) + " outside sequence of " + std::to_string(n) +
                          " atoms");
  }
  if (d.target < 0 || d.target > n) throw CoordinateError("duplication target " + std::to_string(d.target) + " out of range");
  if (d.target > d.source.begin && d.target < d.source.end) {
    throw ValidityError("duplication target " + std::to_string(d.target) + " inside source " + span_text(d.source));
  }
  if (d.coupled_deletion) {
    const Span& del = *d.coupled_deletion;
    if (del.size() <= 0) throw ValidityError("coupled deletion is empty");
    if (!strictly_inside(del, d.copy_span()) && !strictly_inside(del, d.shifted_source())) {
      throw ValidityError("coupled deletion " + span_text(del) + " not strictly inside source or copy");
    }
  }
}

void check_deletion(int n, const Deletion& d) {
  if (d.span.size() <= 0 || d.span.begin < 0 || d.span.end > n) {
    throw ValidityError("deletion " + span_text(d.span) + " invalid for sequence of " + std::to_string(n) + " atoms");
  }
}

AtomicSequence apply_duplication(const AtomicSequence& seq, const Duplication& d, IdSource& ids) {
  check_duplication(seq.size(), d);
  std::vector<AtomInstance> copy(seq.atoms.begin() + d.source.begin, seq.atoms.begin() + d.source.end);
  if (d.inverted) {
    std::reverse(copy.begin(), copy.end());
    for (auto& a : copy) a.strand = flip(a.strand);
  }
  for (auto& a : copy) a.id = ids();
  AtomicSequence out{seq.species, {}};
  out.atoms.reserve(seq.atoms.size() + copy.size());
  out.atoms.insert(out.atoms.end(), seq.atoms.begin(), seq.atoms.begin() + d.target);
  out.atoms.insert(out.atoms.end(), copy.begin(), copy.end());
  out.atoms.insert(out.atoms.end(), seq.atoms.begin() + d.target, seq.atoms.end());
  if (d.coupled_deletion) {
    const Span& del = *d.coupled_deletion;
    out.atoms.erase(out.atoms.begin() + del.begin, out.atoms.begin() + del.end);
  }
  return out;
}

AtomicSequence apply_deletion(const AtomicSequence& seq, const Deletion& d) {
  check_deletion(seq.size(), d);
  AtomicSequence out = seq;
  out.atoms.erase(out.atoms.begin() + d.span.begin, out.atoms.begin() + d.span.end);
  return out;
}

AtomicSequence apply_speciation_deletions(const AtomicSequence& parent, const std::vector<Span>& deletions) {
  AtomicSequence out = parent;
  int last = out.size() + 1;
  for (const auto& s : deletions) {
    if (s.end > last) throw ValidityError("speciation deletions must be listed right to left without overlap");
    out = apply_deletion(out, Deletion{s});
    last = s.begin;
  }
  return out;
}

AtomicSequence unwind_duplication(const AtomicSequence& seq, const Duplication& d) {
  const int len = d.source.size();
  const int del_size = d.coupled_deletion ? d.coupled_deletion->size() : 0;
  const int n_pre = seq.size() - len + del_size;
  try {
    check_duplication(n_pre, d);
  } catch (const Error& e) {
    throw ConsistencyError(std::string("duplication does not fit sequence: ") + e.what());
  }
  const Span copy = d.copy_span();
  const Span source = d.shifted_source();
  auto partner = [&](int p) {
    // Index of the counterpart of intermediate position p in the other copy.
    int k = copy.contains(p) ? p - copy.begin : p - source.begin;
    int kk = d.inverted ? len - 1 - k : k;
    return copy.contains(p) ? source.begin + kk : copy.begin + kk;
  };

  // Rebuild the sequence as it was right after the copy was inserted.
  std::vector<AtomInstance> mid;
  mid.reserve(static_cast<std::size_t>(seq.size() + del_size));
  const int del_begin = d.coupled_deletion ? d.coupled_deletion->begin : seq.size() + 1;
  for (int p = 0; p < seq.size() + del_size; ++p) {
    if (p < del_begin) {
      mid.push_back(seq[p]);
    } else if (p >= del_begin + del_size) {
      mid.push_back(seq[p - del_size]);
    } else {
      mid.push_back(AtomInstance{});
    }
  }
  for (int p = del_begin; p < del_begin + del_size; ++p) {
    int q = partner(p);
    // Restored source atoms inherit the surviving copy's ids.
    mid[static_cast<std::size_t>(p)] = mirrored(mid[static_cast<std::size_t>(q)], d.inverted);
  }
  for (int p = copy.begin; p < copy.end; ++p) {
    const auto& a = mid[static_cast<std::size_t>(p)];
    const auto& b = mirrored(mid[static_cast<std::size_t>(partner(p))], d.inverted);
    if (a.type != b.type || a.strand != b.strand) {
      throw ConsistencyError("duplicated copy at position " + std::to_string(p) + " does not match its source");
    }
  }
  AtomicSequence out{seq.species, {}};
  out.atoms.reserve(static_cast<std::size_t>(n_pre));
  for (int p = 0; p < static_cast<int>(mid.size()); ++p) {
    if (!copy.contains(p)) out.atoms.push_back(mid[static_cast<std::size_t>(p)]);
  }
  return out;
}

namespace {

std::vector<char> deleted_mask(int parent_size, const std::vector<Span>& deletions) {
  std::vector<char> mask(static_cast<std::size_t>(parent_size), 0);
  for (const auto& s : deletions) {
    if (s.size() <= 0 || s.begin < 0 || s.end > parent_size) throw ConsistencyError("speciation deletion out of range");
    for (int i = s.begin; i < s.end; ++i) {
      if (mask[static_cast<std::size_t>(i)]) throw ConsistencyError("overlapping speciation deletions");
      mask[static_cast<std::size_t>(i)] = 1;
    }
  }
  return mask;
}

int total_size(const std::vector<Span>& spans) {
  int n = 0;
  for (const auto& s : spans) n += s.size();
  return n;
}

AtomicSequence unwind_speciation(const AtomicSequence& a, const AtomicSequence& b, const Speciation& s) {
  const int n = a.size() + total_size(s.deletions_a);
  if (n != b.size() + total_size(s.deletions_b)) throw ConsistencyError("speciation deletions disagree on parent length");
  auto mask_a = deleted_mask(n, s.deletions_a);
  auto mask_b = deleted_mask(n, s.deletions_b);
  AtomicSequence parent{s.parent, {}};
  int ia = 0;
  int ib = 0;
  for (int p = 0; p < n; ++p) {
    bool in_a = !mask_a[static_cast<std::size_t>(p)];
    bool in_b = !mask_b[static_cast<std::size_t>(p)];
    if (!in_a && !in_b) throw ConsistencyError("parent atom deleted in both children");
    if (in_a && in_b) {
      if (a[ia].type != b[ib].type || a[ia].strand != b[ib].strand) {
        throw ConsistencyError("speciation pairs atoms of different type or strand");
      }
      parent.atoms.push_back(a[ia]);
      ++ia;
      ++ib;
    } else if (in_a) {
      parent.atoms.push_back(a[ia++]);
    } else {
      parent.atoms.push_back(b[ib++]);
    }
  }
  return parent;
}

}  // namespace

SequenceSet unwind_event(const SequenceSet& state, int species, const Event& e) {
  SequenceSet out = state;
  if (const auto* dup = std::get_if<Duplication>(&e)) {
    auto it = out.find(species);
    if (it == out.end()) throw ConsistencyError("no sequence for species " + std::to_string(species));
    it->second = unwind_duplication(it->second, *dup);
  } else if (std::holds_alternative<Deletion>(e)) {
    throw ConsistencyError("a plain deletion cannot be unwound: its atoms are lost");
  } else {
    const auto& s = std::get<Speciation>(e);
    auto ia = out.find(s.child_a);
    auto ib = out.find(s.child_b);
    if (ia == out.end() || ib == out.end()) throw ConsistencyError("speciation children are not both present");
    if (out.count(s.parent)) throw ConsistencyError("speciation parent already present");
    AtomicSequence parent = unwind_speciation(ia->second, ib->second, s);
    out.erase(s.child_a);
    out.erase(s.child_b);
    out.emplace(s.parent, std::move(parent));
  }
  return out;
}

}  // namespace duphist

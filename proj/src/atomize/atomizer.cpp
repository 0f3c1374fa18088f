#include "duphist/atomize/atomizer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "duphist/core/errors.hpp"
#include "duphist/subst/hky.hpp"

namespace duphist {

std::vector<InputSequence> sequences_from_fasta(const std::vector<FastaRecord>& records) {
  std::vector<InputSequence> out;
  for (const auto& r : records) out.push_back({r.name, r.name, r.sequence});
  return out;
}

namespace {

constexpr std::size_t max_kmer_hits = 1000;

double identity(const std::string& a, std::size_t a_pos, const std::string& b, std::size_t b_pos, std::size_t len) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < len; ++i) same += a[a_pos + i] == b[b_pos + i];
  return static_cast<double>(same) / static_cast<double>(len);
}

bool overlaps(const WindowCopy& a, const WindowCopy& b) {
  return a.seq == b.seq && a.start < b.end && b.start < a.end;
}

}  // namespace

std::vector<WindowMatch> find_window_matches(const std::vector<InputSequence>& seqs, const AtomizerSettings& settings) {
  const long w = settings.window_bp;
  const auto k = static_cast<std::size_t>(settings.seed_k);
  if (w < 1 || settings.seed_k < 1 || static_cast<long>(k) > w) throw DomainError("window and seed sizes must satisfy 1 <= k <= window");
  if (!(settings.identity > 0.0 && settings.identity <= 1.0)) throw DomainError("identity cutoff must be in (0, 1]");

  std::unordered_map<std::string_view, std::vector<std::pair<int, long>>> index;
  for (int s = 0; s < static_cast<int>(seqs.size()); ++s) {
    std::string_view dna = seqs[static_cast<std::size_t>(s)].dna;
    for (std::size_t i = 0; i + k <= dna.size(); ++i) index[dna.substr(i, k)].emplace_back(s, static_cast<long>(i));
  }

  std::vector<WindowMatch> out;
  for (int s = 0; s < static_cast<int>(seqs.size()); ++s) {
    const auto& dna = seqs[static_cast<std::size_t>(s)].dna;
    const long len = static_cast<long>(dna.size());
    if (len < w) {
      spdlog::warn("sequence '{}' is shorter than one window ({} < {} bp); no atoms", seqs[static_cast<std::size_t>(s)].seq_name,
                   len, w);
      continue;
    }
    for (long start = 0; start + w <= len; start += w) {
      const std::string fwd = dna.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(w));
      const std::string rev = reverse_complement(fwd);
      std::set<std::tuple<int, long, int>> candidates;  // seq, start, strand
      for (int strand = 0; strand < 2; ++strand) {
        std::string_view query = strand == 0 ? fwd : rev;
        for (std::size_t o = 0; o + k <= query.size(); ++o) {
          auto it = index.find(query.substr(o, k));
          if (it == index.end() || it->second.size() > max_kmer_hits) continue;
          for (const auto& [hs, hp] : it->second) {
            long cs = hp - static_cast<long>(o);
            if (cs >= 0 && cs + w <= static_cast<long>(seqs[static_cast<std::size_t>(hs)].dna.size())) candidates.emplace(hs, cs, strand);
          }
        }
      }
      std::vector<WindowCopy> copies;
      for (const auto& [cs, cstart, strand] : candidates) {
        const std::string& query = strand == 0 ? fwd : rev;
        double id = identity(query, 0, seqs[static_cast<std::size_t>(cs)].dna, static_cast<std::size_t>(cstart), static_cast<std::size_t>(w));
        if (id >= settings.identity) copies.push_back({cs, cstart, cstart + w, strand == 0 ? Strand::forward : Strand::reverse, id});
      }
      // Keep the best of overlapping copies (the window itself scores 1).
      std::stable_sort(copies.begin(), copies.end(), [&](const WindowCopy& a, const WindowCopy& b) {
        bool a_self = a.seq == s && a.start == start && a.strand == Strand::forward;
        bool b_self = b.seq == s && b.start == start && b.strand == Strand::forward;
        if (a_self != b_self) return a_self;
        if (a.identity != b.identity) return a.identity > b.identity;
        return std::tie(a.seq, a.start) < std::tie(b.seq, b.start);
      });
      WindowMatch m{s, start, start + w, {}};
      for (const auto& c : copies) {
        if (std::none_of(m.copies.begin(), m.copies.end(), [&](const WindowCopy& x) { return overlaps(x, c); })) m.copies.push_back(c);
      }
      std::sort(m.copies.begin(), m.copies.end(),
                [](const WindowCopy& a, const WindowCopy& b) { return std::tie(a.seq, a.start) < std::tie(b.seq, b.start); });
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::vector<AtomRecord> window_atomize(const std::vector<InputSequence>& seqs, const AtomizerSettings& settings) {
  auto matches = find_window_matches(seqs, settings);
  std::vector<std::size_t> order(matches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](std::size_t i) {
    const auto& m = matches[i];
    const auto& s = seqs[static_cast<std::size_t>(m.seq)];
    return std::make_tuple(-static_cast<long>(m.copies.size()), std::cref(s.species), std::cref(s.seq_name), m.start);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  std::vector<std::map<long, long>> taken(seqs.size());  // start -> end
  auto is_free = [&](const WindowCopy& c) {
    const auto& t = taken[static_cast<std::size_t>(c.seq)];
    auto it = t.lower_bound(c.end);
    if (it == t.begin()) return true;
    --it;
    return it->second <= c.start;
  };
  struct Placed {
    int seq;
    long start;
    long end;
    Strand strand;
    long type;
  };
  std::vector<Placed> placed;
  long next_type = 0;
  for (std::size_t i : order) {
    const auto& m = matches[i];
    WindowCopy self{m.seq, m.start, m.end, Strand::forward, 1.0};
    if (!is_free(self)) continue;
    for (const auto& c : m.copies) {
      if (!is_free(c)) continue;
      taken[static_cast<std::size_t>(c.seq)][c.start] = c.end;
      placed.push_back({c.seq, c.start, c.end, c.strand, next_type});
    }
    ++next_type;
  }
  std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) { return std::tie(a.seq, a.start) < std::tie(b.seq, b.start); });
  std::vector<AtomRecord> out;
  for (const auto& p : placed) {
    const auto& s = seqs[static_cast<std::size_t>(p.seq)];
    out.push_back({static_cast<long>(out.size()), p.type, s.species, s.seq_name, p.start, p.end, p.strand});
  }
  return out;
}

namespace {

// Position-sorted atoms grouped by sequence.
std::vector<std::vector<std::size_t>> by_sequence(const std::vector<AtomRecord>& atoms) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < atoms.size(); ++i) groups[{atoms[i].species, atoms[i].seq_name}].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [key, v] : groups) {
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) { return atoms[a].start < atoms[b].start; });
    out.push_back(std::move(v));
  }
  return out;
}

constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace

std::vector<AtomRecord> merge_paired_atoms(const std::vector<AtomRecord>& input) {
  std::vector<AtomRecord> atoms = input;
  while (true) {
    auto seqs = by_sequence(atoms);
    std::vector<std::size_t> prev(atoms.size(), npos);
    std::vector<std::size_t> next(atoms.size(), npos);
    for (const auto& v : seqs) {
      for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (atoms[v[i]].end == atoms[v[i + 1]].start) {
          next[v[i]] = v[i + 1];
          prev[v[i + 1]] = v[i];
        }
      }
    }
    std::map<long, std::vector<std::size_t>> instances;
    for (std::size_t i = 0; i < atoms.size(); ++i) instances[atoms[i].type_id].push_back(i);

    bool merged = false;
    for (const auto& [x, xs] : instances) {
      // Partner of each x instance in its reading direction.
      std::vector<std::size_t> partner;
      long y = -1;
      int rel = -1;
      bool ok = true;
      for (std::size_t i : xs) {
        std::size_t j = atoms[i].strand == Strand::forward ? next[i] : prev[i];
        if (j == npos || atoms[j].type_id == x) {
          ok = false;
          break;
        }
        int r = atoms[j].strand == atoms[i].strand ? 0 : 1;
        if (y < 0) {
          y = atoms[j].type_id;
          rel = r;
        } else if (atoms[j].type_id != y || r != rel) {
          ok = false;
          break;
        }
        partner.push_back(j);
      }
      if (!ok || y < 0 || instances[y].size() != xs.size()) continue;
      std::set<std::size_t> used(partner.begin(), partner.end());
      if (used.size() != partner.size()) continue;
      for (std::size_t t = 0; t < xs.size(); ++t) {
        auto& a = atoms[xs[t]];
        const auto& b = atoms[partner[t]];
        a.start = std::min(a.start, b.start);
        a.end = std::max(a.end, b.end);
      }
      std::vector<AtomRecord> kept;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!used.count(i)) kept.push_back(atoms[i]);
      }
      atoms = std::move(kept);
      merged = true;
      break;
    }
    if (!merged) break;
  }
  // Renumber types by first id, atoms by sequence then position.
  std::map<long, long> type_map;
  for (const auto& a : atoms) type_map.emplace(a.type_id, 0);
  long t = 0;
  for (auto& [old, neu] : type_map) neu = t++;
  auto seqs = by_sequence(atoms);
  std::vector<AtomRecord> out;
  for (const auto& v : seqs) {
    for (std::size_t i : v) {
      AtomRecord r = atoms[i];
      r.type_id = type_map[r.type_id];
      r.atom_id = static_cast<long>(out.size());
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace duphist

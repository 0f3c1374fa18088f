#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <unordered_set>

#include "duphist/core/adjacency.hpp"
#include "duphist/core/errors.hpp"
#include "duphist/proposal/proposal.hpp"

namespace duphist {

namespace {

constexpr std::size_t max_coupled_structures = 2000;

// Occurrence counts over the active sequences.
struct StateStats {
  std::map<Adjacency, int> adjacency;
  std::map<TypeId, int> copies;
  int pi = 0;
};

void add_sequence(const AtomicSequence& seq, int sign, std::map<Adjacency, int>& adj, std::map<TypeId, int>& copies) {
  for (int i = 0; i < seq.size(); ++i) {
    copies[seq[i].type] += sign;
    if (i + 1 < seq.size()) adj[adjacency_of(seq[i], seq[i + 1])] += sign;
  }
}

StateStats stats_of(const UnwindState& state) {
  StateStats s;
  for (const auto& [v, seq] : state.seqs) add_sequence(seq, 1, s.adjacency, s.copies);
  for (const auto& [a, n] : s.adjacency) s.pi += n > 0;
  return s;
}

template <class K>
int lookup(const std::map<K, int>& m, const K& k) {
  auto it = m.find(k);
  return it == m.end() ? 0 : it->second;
}

// Post-unwind view: counts after replacing `old_seqs` by `new_seqs`.
struct Delta {
  std::map<Adjacency, int> adjacency;
  std::map<TypeId, int> copies;

  int adjacency_after(const StateStats& s, const Adjacency& a) const { return lookup(s.adjacency, a) + lookup(adjacency, a); }
  int copies_after(const StateStats& s, TypeId t) const { return lookup(s.copies, t) + lookup(copies, t); }
  int pi_after(const StateStats& s) const {
    int pi = s.pi;
    for (const auto& [a, d] : adjacency) {
      int before = lookup(s.adjacency, a);
      pi += (before + d > 0) - (before > 0);
    }
    return pi;
  }
};

Delta delta_of(const std::vector<const AtomicSequence*>& old_seqs, const std::vector<const AtomicSequence*>& new_seqs) {
  Delta d;
  for (const auto* s : old_seqs) add_sequence(*s, -1, d.adjacency, d.copies);
  for (const auto* s : new_seqs) add_sequence(*s, 1, d.adjacency, d.copies);
  return d;
}

std::string join_ids(const AtomicSequence& seq, int begin, int end) {
  std::string out;
  for (int i = begin; i < end; ++i) {
    if (i > begin) out += ',';
    out += std::to_string(seq[i].id);
  }
  return out;
}

struct Pair {
  InstanceId kept;
  InstanceId removed;
  TypeId type;
};

struct Scorer {
  const UnwindState& state;
  const ProposalContext& ctx;
  const std::set<std::string>& prev_keys;
  StateStats stats;

  double finish(Candidate& c) const {
    const auto& w = ctx.params->feature_weights;
    c.features[1] = prev_keys.count(c.key) ? 1.0 : 0.0;
    double lw = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) lw += w[i] * c.features[i];
    c.log_weight = lw;
    return lw;
  }

  bool healed(const AtomicSequence& pre, int boundary, const Delta& delta) const {
    if (boundary <= 0 || boundary >= pre.size()) return true;
    const auto& a = pre[boundary - 1];
    const auto& b = pre[boundary];
    if (delta.adjacency_after(stats, adjacency_of(a, b)) >= 2) return true;
    return delta.copies_after(stats, a.type) == 1 && delta.copies_after(stats, b.type) == 1;
  }

  Candidate duplication(int species, const AtomicSequence& seq, const Duplication& d, const std::vector<Pair>& pairs,
                        bool extensible, char role) const {
    const auto& cat = ctx.data->catalog;
    Candidate c;
    c.species = species;
    c.event = d;
    AtomicSequence pre = unwind_duplication(seq, d);
    // Key: source and removed atoms by id.
    std::unordered_set<InstanceId> kept;
    for (const auto& a : pre.atoms) kept.insert(a.id);
    std::string removed;
    for (const auto& a : seq.atoms) {
      if (!kept.count(a.id)) removed += std::to_string(a.id) + ",";
    }
    c.key = "D" + std::to_string(species) + "/" + (d.inverted ? "i" : "f") + "/" + join_ids(pre, d.source.begin, d.source.end) +
            "/" + removed;
    if (d.coupled_deletion) {
      const Span anchor = role == 't' ? d.copy_span() : d.shifted_source();
      c.key += "/" + std::string(1, role) + std::to_string(d.coupled_deletion->begin - anchor.begin) + "+" +
               std::to_string(d.coupled_deletion->size());
    }

    const long removed_bp = cat.length_bp(seq) - cat.length_bp(pre);
    c.features[0] = std::log(static_cast<double>(std::max(1L, removed_bp)));
    double wsum = 0.0;
    double mean = 0.0;
    for (const auto& p : pairs) {
      double w = static_cast<double>(cat.length(p.type));
      wsum += w;
      mean += w * state.trees[static_cast<std::size_t>(p.type)].cherry_distance(p.kept, p.removed);
    }
    mean /= wsum;
    double var = 0.0;
    for (const auto& p : pairs) {
      double w = static_cast<double>(cat.length(p.type));
      double x = state.trees[static_cast<std::size_t>(p.type)].cherry_distance(p.kept, p.removed) - mean;
      var += w * x * x;
    }
    c.features[2] = mean;
    c.features[3] = var / wsum;
    c.features[4] = extensible ? 1.0 : 0.0;

    Delta delta = delta_of({&seq}, {&pre});
    int violated = 0;
    violated += !healed(pre, d.source.begin, delta);
    violated += !healed(pre, d.source.end, delta);
    violated += !healed(pre, d.target, delta);
    c.features[5] = violated;
    c.features[6] = stats.pi - delta.pi_after(stats);
    if (d.coupled_deletion) {
      const long full_bp = cat.offset_bp(pre, d.source.end) - cat.offset_bp(pre, d.source.begin);
      long del_bp = full_bp;
      for (const auto& p : pairs) del_bp -= cat.length(p.type);
      c.features[7] = 1.0;
      c.features[8] = std::log(static_cast<double>(del_bp) / static_cast<double>(del_bp + full_bp));
    }
    finish(c);
    return c;
  }
};

struct SequenceView {
  int species;
  const AtomicSequence& seq;
  const UnwindState& state;

  int n() const { return seq.size(); }
  bool pairable(int a, int b, bool inverted) const {
    const auto& x = seq[a];
    const auto& y = seq[b];
    if (x.type != y.type) return false;
    if ((x.strand == y.strand) == inverted) return false;
    return state.trees[static_cast<std::size_t>(x.type)].cherry(x.id, y.id);
  }
};

void emit_run_pair(const Scorer& sc, const SequenceView& v, int xs, int ys, int len, bool inverted, bool extensible,
                   std::vector<Candidate>& out) {
  std::vector<Pair> keep_x;
  std::vector<Pair> keep_y;
  for (int k = 0; k < len; ++k) {
    const auto& a = v.seq[xs + k];
    const auto& b = v.seq[inverted ? ys + len - 1 - k : ys + k];
    keep_x.push_back({a.id, b.id, a.type});
    keep_y.push_back({b.id, a.id, a.type});
  }
  Duplication remove_y{{xs, xs + len}, ys, inverted, {}};
  Duplication remove_x{{ys - len, ys}, xs, inverted, {}};
  out.push_back(sc.duplication(v.species, v.seq, remove_y, keep_x, extensible, 0));
  out.push_back(sc.duplication(v.species, v.seq, remove_x, keep_y, extensible, 0));
}

// Full run F and partial run P; P lost F's atoms [k, k+m) (in P's reading
// order). Emits both placements of the deletion.
void emit_coupled(const Scorer& sc, const SequenceView& v, int f_begin, int p_begin, int k, int m, int r, bool inverted,
                  std::vector<Candidate>& out) {
  const int len = k + m + r;
  const int p_len = k + r;
  std::vector<Pair> keep_f;
  std::vector<Pair> keep_p;
  for (int t = 0; t < p_len; ++t) {
    int u = t < k ? t : t + m;
    int fi = f_begin + (inverted ? len - 1 - u : u);
    const auto& a = v.seq[fi];
    const auto& b = v.seq[p_begin + t];
    keep_f.push_back({a.id, b.id, a.type});
    keep_p.push_back({b.id, a.id, a.type});
  }
  {
    // Deletion inside the copy: F is the source.
    int src = f_begin - (p_begin < f_begin ? p_len : 0);
    Duplication d{{src, src + len}, p_begin, inverted, {}};
    Span copy = d.copy_span();
    d.coupled_deletion = Span{copy.begin + k, copy.begin + k + m};
    out.push_back(sc.duplication(v.species, v.seq, d, keep_f, false, 't'));
  }
  {
    // Deletion inside the source: P is what is left of the source.
    int src = p_begin - (f_begin < p_begin ? len : 0);
    int target = f_begin < p_begin ? f_begin : f_begin + m;
    Duplication d{{src, src + len}, target, inverted, {}};
    Span s = d.shifted_source();
    d.coupled_deletion = Span{s.begin + k, s.begin + k + m};
    out.push_back(sc.duplication(v.species, v.seq, d, keep_p, false, 's'));
  }
}

bool disjoint(int a, int a_len, int b, int b_len) { return a + a_len <= b || b + b_len <= a; }

void enumerate_in_sequence(const Scorer& sc, const SequenceView& v, bool with_deletions, std::vector<Candidate>& out) {
  const int n = v.n();
  // Forward run pairs X=[i,i+L), Y=[j,j+L).
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int len = 1; i + len <= j && j + len <= n && v.pairable(i + len - 1, j + len - 1, false); ++len) {
        bool ext = (i > 0 && i + len <= j - 1 && v.pairable(i - 1, j - 1, false)) ||
                   (j + len < n && i + len + 1 <= j && v.pairable(i + len, j + len, false));
        emit_run_pair(sc, v, i, j, len, false, ext, out);
      }
    }
  }
  // Inverted run pairs grown outward from the inner pair (x, y).
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      for (int t = 0; x - t >= 0 && y + t < n && v.pairable(x - t, y + t, true); ++t) {
        int a = x - t;
        int b = y + t;
        bool ext = (a > 0 && b + 1 < n && v.pairable(a - 1, b + 1, true)) || (x + 2 <= y - 1 && v.pairable(x + 1, y - 1, true));
        emit_run_pair(sc, v, a, y, t + 1, true, ext, out);
      }
    }
  }
  if (!with_deletions) return;
  std::size_t structures = 0;
  // Forward: P[t] pairs with F[t] (t < k) and F[t + m] (t >= k).
  for (int p = 0; p < n && structures < max_coupled_structures; ++p) {
    for (int f = 0; f < n && structures < max_coupled_structures; ++f) {
      if (f == p) continue;
      for (int k = 1; p + k <= n && f + k <= n && v.pairable(p + k - 1, f + k - 1, false); ++k) {
        for (int m = 1; f + k + m < n; ++m) {
          for (int r = 1; p + k + r <= n && f + k + m + r <= n && v.pairable(p + k + r - 1, f + k + m + r - 1, false); ++r) {
            if (!disjoint(f, k + m + r, p, k + r)) continue;
            if (structures++ >= max_coupled_structures) break;
            emit_coupled(sc, v, f, p, k, m, r, false, out);
          }
        }
      }
    }
  }
  // Inverted: P[t] pairs with F[L-1-t] (t < k) and F[L-1-t-m] (t >= k); e is F's end.
  for (int p = 0; p < n && structures < max_coupled_structures; ++p) {
    for (int e = 1; e <= n && structures < max_coupled_structures; ++e) {
      for (int k = 1; p + k <= n && e - k >= 0 && v.pairable(p + k - 1, e - k, true); ++k) {
        for (int m = 1; e - k - m - 1 >= 0; ++m) {
          for (int r = 1; p + k + r <= n && e - k - m - r >= 0 && v.pairable(p + k + r - 1, e - k - m - r, true); ++r) {
            int f = e - k - m - r;
            if (!disjoint(f, k + m + r, p, k + r)) continue;
            if (structures++ >= max_coupled_structures) break;
            emit_coupled(sc, v, f, p, k, m, r, true, out);
          }
        }
      }
    }
  }
}

}  // namespace

UnwindState initial_state(const Dataset& data, const std::vector<const Tree*>& trees) {
  if (static_cast<int>(trees.size()) != data.type_count()) throw InternalError("one guide tree per type is required");
  UnwindState s;
  s.seqs = data.extant;
  for (const auto* t : trees) s.trees.emplace_back(*t);
  return s;
}

bool is_ancestral(const UnwindState& state, const SpeciesTree& tree) {
  if (state.seqs.size() != 1 || state.seqs.begin()->first != tree.root()) return false;
  std::set<TypeId> seen;
  for (const auto& a : state.seqs.begin()->second.atoms) {
    if (!seen.insert(a.type).second) return false;
  }
  return true;
}

std::vector<Candidate> enumerate_duplications(const UnwindState& state, const ProposalContext& ctx,
                                              const std::set<std::string>& prev_keys) {
  Scorer sc{state, ctx, prev_keys, stats_of(state)};
  std::vector<Candidate> out;
  const bool with_deletions = ctx.params->p_deletion > 0.0;
  for (const auto& [species, seq] : state.seqs) enumerate_in_sequence(sc, SequenceView{species, seq, state}, with_deletions, out);
  return out;
}

std::vector<Candidate> enumerate_speciations(const UnwindState& state, const ProposalContext& ctx,
                                             const std::set<std::string>& prev_keys) {
  const auto& tree = *ctx.data->species_tree;
  const auto& cat = ctx.data->catalog;
  const auto& settings = *ctx.settings;
  StateStats stats = stats_of(state);
  std::vector<Candidate> out;
  for (int parent = 0; parent < tree.size(); ++parent) {
    if (tree.is_leaf(parent)) continue;
    const int ca = tree.node(parent).children[0];
    const int cb = tree.node(parent).children[1];
    auto ia = state.seqs.find(ca);
    auto ib = state.seqs.find(cb);
    if (ia == state.seqs.end() || ib == state.seqs.end()) continue;
    const auto& s1 = ia->second;
    const auto& s2 = ib->second;
    const int n1 = s1.size();
    const int n2 = s2.size();
    auto match_bp = [&](int i, int j) -> long {
      const auto& a = s1[i];
      const auto& b = s2[j];
      if (a.type != b.type || a.strand != b.strand) return -1;
      if (!state.trees[static_cast<std::size_t>(a.type)].cherry(a.id, b.id)) return -1;
      return cat.length(a.type);
    };
    std::vector<std::vector<long>> w(static_cast<std::size_t>(n1), std::vector<long>(static_cast<std::size_t>(n2)));
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = match_bp(i, j);
    // best[i][j]: most matched bp within s1[i:], s2[j:].
    std::vector<std::vector<long>> best(static_cast<std::size_t>(n1 + 1), std::vector<long>(static_cast<std::size_t>(n2 + 1), 0));
    for (int i = n1 - 1; i >= 0; --i) {
      for (int j = n2 - 1; j >= 0; --j) {
        auto ui = static_cast<std::size_t>(i);
        auto uj = static_cast<std::size_t>(j);
        long b = std::max(best[ui + 1][uj], best[ui][uj + 1]);
        if (w[ui][uj] >= 0) b = std::max(b, w[ui][uj] + best[ui + 1][uj + 1]);
        best[ui][uj] = b;
      }
    }
    const double threshold = settings.speciation_near_optimal * static_cast<double>(best[0][0]);
    const auto cap = static_cast<std::size_t>(settings.speciation_cap);

    // adjacency counts with both children removed
    std::map<Adjacency, int> rest = stats.adjacency;
    for (const auto* cs : {&s1, &s2}) {
      for (int i = 0; i + 1 < cs->size(); ++i) --rest[adjacency_of((*cs)[i], (*cs)[i + 1])];
    }
    int rest_pi = 0;
    for (const auto& [a, n] : rest) rest_pi += n > 0;
    std::vector<Adjacency> par_adj;

    std::vector<Candidate> local;
    auto emit = [&](const std::vector<std::pair<int, int>>& matches) {
      // Gap blocks between matches; both orders when both children contribute.
      struct Block {
        int a_begin, a_end, b_begin, b_end;
      };
      std::vector<Block> blocks;
      int pa = 0;
      int pb = 0;
      for (const auto& [i, j] : matches) {
        blocks.push_back({pa, i, pb, j});
        pa = i + 1;
        pb = j + 1;
      }
      blocks.push_back({pa, n1, pb, n2});
      std::vector<std::size_t> two_way;
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].a_end > blocks[b].a_begin && blocks[b].b_end > blocks[b].b_begin) two_way.push_back(b);
      }
      const std::size_t variants = two_way.size() >= 20 ? (1u << 20) : (std::size_t{1} << two_way.size());
      for (std::size_t mask = 0; mask < variants && local.size() < cap; ++mask) {
        std::vector<char> b_first(blocks.size(), 0);
        for (std::size_t t = 0; t < two_way.size() && t < 20; ++t) b_first[two_way[t]] = (mask >> t) & 1u;
        AtomicSequence par{parent, {}};
        std::vector<char> origin;  // 'm' matched, 'a' only in child a, 'b' only in child b
        auto put_a = [&](const Block& bl) {
          for (int i = bl.a_begin; i < bl.a_end; ++i) {
            par.atoms.push_back(s1[i]);
            origin.push_back('a');
          }
        };
        auto put_b = [&](const Block& bl) {
          for (int j = bl.b_begin; j < bl.b_end; ++j) {
            par.atoms.push_back(s2[j]);
            origin.push_back('b');
          }
        };
        for (std::size_t b = 0; b < blocks.size(); ++b) {
          if (b_first[b]) {
            put_b(blocks[b]);
            put_a(blocks[b]);
          } else {
            put_a(blocks[b]);
            put_b(blocks[b]);
          }
          if (b < matches.size()) {
            par.atoms.push_back(s1[matches[b].first]);
            origin.push_back('m');
          }
        }
        Speciation sp{parent, ca, cb, {}, {}};
        for (int p = static_cast<int>(origin.size()) - 1; p >= 0;) {
          char o = origin[static_cast<std::size_t>(p)];
          int q = p;
          while (q >= 0 && origin[static_cast<std::size_t>(q)] == o) --q;
          if (o == 'b') sp.deletions_a.push_back({q + 1, p + 1});
          if (o == 'a') sp.deletions_b.push_back({q + 1, p + 1});
          p = q;
        }
        Candidate c;
        c.species = parent;
        c.event = sp;
        c.key = "S" + std::to_string(parent) + "/";
        c.key.reserve(c.key.size() + 8 * origin.size());
        char buf[16];
        for (std::size_t p = 0; p < origin.size(); ++p) {
          auto [end, ec] = std::to_chars(buf, buf + sizeof buf, par[static_cast<int>(p)].id);
          c.key.append(buf, end);
          c.key += origin[p];
          c.key += ',';
        }
        long matched = 0;
        for (const auto& [i, j] : matches) matched += cat.length(s1[i].type);
        c.features[0] = std::log(static_cast<double>(std::max(1L, matched)));
        par_adj.clear();
        for (int p = 0; p + 1 < par.size(); ++p) par_adj.push_back(adjacency_of(par[p], par[p + 1]));
        std::sort(par_adj.begin(), par_adj.end());
        par_adj.erase(std::unique(par_adj.begin(), par_adj.end()), par_adj.end());
        int pi_after = rest_pi;
        for (const auto& a : par_adj) pi_after += lookup(rest, a) <= 0;
        c.features[6] = stats.pi - pi_after;
        c.features[9] = static_cast<double>(sp.deletions_a.size() + sp.deletions_b.size());
        Scorer{state, ctx, prev_keys, {}}.finish(c);
        local.push_back(std::move(c));
      }
    };

    std::vector<std::pair<int, int>> current;
    std::function<void(int, int, long)> dfs = [&](int i, int j, long score) {
      if (local.size() >= cap) return;
      struct Option {
        long bound;
        int i, j;
      };
      std::vector<Option> options;
      for (int x = i; x < n1; ++x) {
        for (int y = j; y < n2; ++y) {
          long wv = w[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
          if (wv < 0) continue;
          long bound = score + wv + best[static_cast<std::size_t>(x + 1)][static_cast<std::size_t>(y + 1)];
          if (static_cast<double>(bound) >= threshold - 1e-9) options.push_back({bound, x, y});
        }
      }
      std::stable_sort(options.begin(), options.end(), [](const Option& a, const Option& b) { return a.bound > b.bound; });
      bool stop_done = false;
      auto stop = [&] {
        if (!stop_done && static_cast<double>(score) >= threshold - 1e-9) emit(current);
        stop_done = true;
      };
      for (const auto& o : options) {
        if (local.size() >= cap) return;
        if (!stop_done && o.bound < score) stop();
        current.emplace_back(o.i, o.j);
        dfs(o.i + 1, o.j + 1, score + w[static_cast<std::size_t>(o.i)][static_cast<std::size_t>(o.j)]);
        current.pop_back();
      }
      if (local.size() < cap) stop();
    };
    dfs(0, 0, 0);

    std::vector<std::size_t> order(local.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return local[a].log_weight > local[b].log_weight; });
    order.resize(std::min(order.size(), static_cast<std::size_t>(settings.speciation_top)));
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) out.push_back(std::move(local[i]));
  }
  return out;
}

std::vector<Candidate> enumerate_candidates(const UnwindState& state, const ProposalContext& ctx,
                                            const std::set<std::string>& prev_keys) {
  auto out = enumerate_duplications(state, ctx, prev_keys);
  auto sp = enumerate_speciations(state, ctx, prev_keys);
  out.insert(out.end(), std::make_move_iterator(sp.begin()), std::make_move_iterator(sp.end()));
  return out;
}

UnwindState apply_candidate(const UnwindState& state, const Candidate& c) {
  UnwindState out{unwind_event(state.seqs, c.species, c.event), state.trees};
  std::unordered_set<InstanceId> present;
  for (const auto& [v, seq] : out.seqs) {
    for (const auto& a : seq.atoms) present.insert(a.id);
  }
  for (const auto& [v, seq] : state.seqs) {
    for (const auto& a : seq.atoms) {
      if (!present.count(a.id)) out.trees[static_cast<std::size_t>(a.type)].remove_leaf(a.id);
    }
  }
  return out;
}

}  // namespace duphist

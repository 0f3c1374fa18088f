#include "duphist/model/score.hpp"

#include <cmath>

#include "duphist/core/errors.hpp"
#include "duphist/model/distributions.hpp"

namespace duphist {

DuplicationGeometry duplication_geometry(const Duplication& d, const AtomicSequence& pre, const AtomCatalog& catalog) {
  check_duplication(pre.size(), d);
  DuplicationGeometry g;
  const long src_begin = catalog.offset_bp(pre, d.source.begin);
  const long src_end = catalog.offset_bp(pre, d.source.end);
  const long tgt = catalog.offset_bp(pre, d.target);
  g.length = src_end - src_begin;
  long left = 0;
  long right = 0;
  if (d.left_to_right()) {
    g.distance = tgt - src_end + 1;
    left = src_begin;
    right = tgt;
  } else {
    g.distance = src_begin - tgt + 1;
    left = tgt;
    right = src_end;
  }
  g.centroid = left + (right - left) / 2;
  return g;
}

double duplication_log_prior(long length, long distance, bool inverted, long len_before, const ModelParams& params) {
  if (length < 1 || distance < 1) throw DomainError("duplication length and distance must be positive");
  if (len_before < 1) throw DomainError("sequence length before an event must be positive");
  return std::log1p(-params.p_deletion) - std::log(static_cast<double>(len_before)) +
         geometric_log_pmf(params.mean_dup_length, length) + geometric_log_pmf(params.mean_dup_distance, distance) +
         std::log(inverted ? params.p_inversion : 1.0 - params.p_inversion) + std::log(0.5);
}

double deletion_log_prior(long length, long len_before, const ModelParams& params) {
  if (length < 1) throw DomainError("deletion length must be positive");
  if (len_before < 1) throw DomainError("sequence length before an event must be positive");
  return std::log(params.p_deletion) - std::log(static_cast<double>(len_before)) +
         geometric_log_pmf(params.mean_del_length, length);
}

double event_log_prior(const BranchEvent& e, const AtomicSequence& pre, const AtomCatalog& catalog,
                       const ModelParams& params) {
  const long len = catalog.length_bp(pre);
  if (const auto* d = std::get_if<Duplication>(&e)) {
    auto g = duplication_geometry(*d, pre, catalog);
    double lp = duplication_log_prior(g.length, g.distance, d->inverted, len, params);
    if (d->coupled_deletion) {
      const long mid_len = len + g.length;
      const Span del = *d->coupled_deletion;
      const Span copy = d->copy_span();
      const Span src = d->shifted_source();
      long del_bp = 0;
      for (int p = del.begin; p < del.end; ++p) {
        int k = copy.contains(p) ? p - copy.begin : p - src.begin;
        if (copy.contains(p) && d->inverted) k = d->source.size() - 1 - k;
        del_bp += catalog.length(pre[d->source.begin + k].type);
      }
      lp += deletion_log_prior(del_bp, mid_len, params);
    }
    return lp;
  }
  const auto& del = std::get<Deletion>(e);
  check_deletion(pre.size(), del);
  const long del_bp = catalog.offset_bp(pre, del.span.end) - catalog.offset_bp(pre, del.span.begin);
  return deletion_log_prior(del_bp, len, params);
}

int scored_event_count(const History& h, int branch) {
  int k = 0;
  for (const auto& e : h.branch_events[static_cast<std::size_t>(branch)]) {
    ++k;
    if (const auto* d = std::get_if<Duplication>(&e); d && d->coupled_deletion) ++k;
  }
  int p = h.species_tree->node(branch).parent;
  if (p >= 0) {
    const auto& s = h.speciations[static_cast<std::size_t>(p)];
    k += static_cast<int>(branch == s.child_a ? s.deletions_a.size() : s.deletions_b.size());
  }
  return k;
}

double branch_log_prob(const History& h, const Replay& r, int branch, const AtomCatalog& catalog,
                       const ModelParams& params) {
  const auto& tree = *h.species_tree;
  const double ell = tree.branch_length(branch, params.root_branch_length);
  double lp = poisson_log_pmf(params.lambda, ell, scored_event_count(h, branch));
  AtomicSequence seq;
  int p = tree.node(branch).parent;
  if (p >= 0) {
    const auto& s = h.speciations[static_cast<std::size_t>(p)];
    seq = r.bottom[static_cast<std::size_t>(p)];
    for (const auto& span : branch == s.child_a ? s.deletions_a : s.deletions_b) {
      Deletion del{span};
      lp += event_log_prior(del, seq, catalog, params);
      seq = apply_deletion(seq, del);
    }
  } else {
    seq = r.top[static_cast<std::size_t>(branch)];
  }
  IdSource ids(1 << 30);
  for (const auto& e : h.branch_events[static_cast<std::size_t>(branch)]) {
    lp += event_log_prior(e, seq, catalog, params);
    if (const auto* d = std::get_if<Duplication>(&e)) {
      seq = apply_duplication(seq, *d, ids);
    } else {
      seq = apply_deletion(seq, std::get<Deletion>(e));
    }
  }
  return lp;
}

double history_log_prior(const History& h, const Replay& r, const AtomCatalog& catalog, const ModelParams& params) {
  double lp = 0.0;
  for (int v = 0; v < h.branch_count(); ++v) lp += branch_log_prob(h, r, v, catalog, params);
  return lp;
}

JointScorer::JointScorer(const Dataset& data, const ModelParams& params)
    : data_{data}, params_{params}, row_of_(static_cast<std::size_t>(data.instance_count()), -1),
      cache_(static_cast<std::size_t>(data.type_count())) {
  for (const auto& members : data.type_instances) {
    for (std::size_t i = 0; i < members.size(); ++i) row_of_[static_cast<std::size_t>(members[i])] = static_cast<int>(i);
  }
}

std::vector<Tree> JointScorer::segment_trees(const History& h, const Replay& r) const {
  std::vector<std::vector<InstanceId>> leaves(static_cast<std::size_t>(data_.type_count()));
  std::vector<std::vector<int>> labels(static_cast<std::size_t>(data_.type_count()));
  for (const auto& [leaf, seq] : data_.extant) {
    const auto& got = r.bottom[static_cast<std::size_t>(leaf)];
    if (!same_layout(got, seq)) {
      throw ConsistencyError("history does not reproduce species '" + h.species_tree->name(leaf) + "'");
    }
    for (int i = 0; i < seq.size(); ++i) {
      leaves[static_cast<std::size_t>(seq[i].type)].push_back(got[i].id);
      labels[static_cast<std::size_t>(seq[i].type)].push_back(seq[i].id);
    }
  }
  std::vector<Tree> out;
  for (std::size_t t = 0; t < leaves.size(); ++t) out.push_back(lineage_tree(r.parent, leaves[t], labels[t]));
  return out;
}

double JointScorer::type_log_likelihood(TypeId type, const Tree& tree) {
  const auto& aln = data_.alignments[static_cast<std::size_t>(type)];
  Tree rows = tree;
  for (int v = 0; v < rows.size(); ++v) {
    auto& n = rows.node(v);
    if (n.is_leaf()) n.id = row_of_[static_cast<std::size_t>(n.id)];
  }
  auto key = aln.taxa <= 2 ? std::string("*") : unrooted_topology_key(rows);
  auto& cache = cache_[static_cast<std::size_t>(type)];
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  double ll = aln.taxa == 1 ? single_taxon_log_likelihood(aln, params_.hky) : profile_log_likelihood(rows, aln, params_.hky);
  cache.emplace(std::move(key), ll);
  return ll;
}

JointScorer::Parts JointScorer::parts(const History& h) {
  Replay r = replay(h);
  Parts p;
  p.prior = history_log_prior(h, r, data_.catalog, params_);
  auto trees = segment_trees(h, r);
  for (std::size_t t = 0; t < trees.size(); ++t) {
    if (trees[t].empty()) continue;
    p.likelihood += type_log_likelihood(static_cast<TypeId>(t), trees[t]);
  }
  return p;
}

}  // namespace duphist

#include "duphist/cli/commands.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "duphist/atomize/atomizer.hpp"
#include "duphist/core/errors.hpp"
#include "duphist/data/dataset.hpp"
#include "duphist/io/history_io.hpp"
#include "duphist/io/outputs.hpp"
#include "duphist/io/tubetree.hpp"
#include "duphist/model/config.hpp"
#include "duphist/sampler/sampler.hpp"
#include "duphist/sim/simulator.hpp"

namespace fs = std::filesystem;

namespace duphist {

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
};

class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_{std::move(root)} { fs::create_directories(root_); }

  void write(const std::string& rel, std::string_view content) {
    fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    write_file(p.string(), content);
    outputs_.emplace_back(rel, sha256_hex(content));
  }

  const fs::path& root() const { return root_; }

  void finish(Manifest m) {
    m.outputs = outputs_;
    write_file((root_ / "manifest.json").string(), format_manifest(m));
  }

 private:
  fs::path root_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

struct Inputs {
  std::vector<std::pair<std::string, std::string>> digests;

  std::string read(const std::string& role, const std::string& path) {
    std::string text = read_file(path);
    digests.emplace_back(role, sha256_hex(text));
    return text;
  }
};

RunConfig load(const Globals& g, Inputs& in) {
  RunConfig c;
  if (!g.config_path.empty()) c = parse_config(in.read("config", g.config_path));
  return c;
}

Manifest manifest(const std::string& command, const Globals& g, const RunConfig& c, const Inputs& in) {
  return {command, g.seed, config_entries(c), in.digests, {}};
}

std::shared_ptr<const SpeciesTree> load_species_tree(const std::string& path, Inputs& in) {
  if (path.empty()) return nullptr;
  return std::make_shared<SpeciesTree>(SpeciesTree::from_newick(in.read("species_tree", path)));
}

Dataset load_dataset(const std::string& atoms, const std::string& fasta, const std::string& tree, Inputs& in) {
  auto records = parse_atoms_tsv(in.read("atoms", atoms));
  auto seqs = parse_fasta(in.read("fasta", fasta));
  return build_dataset(std::move(records), seqs, load_species_tree(tree, in));
}

std::string type_file(long external_type) { return fmt::format("type_{}.nwk", external_type); }

void write_cluster(const SimulatedCluster& sim, const RunConfig& c, std::uint64_t seed, OutputDir& out) {
  const SpeciesTree& tree = *sim.species_tree;
  out.write("species_tree.nwk", tree.to_newick() + "\n");
  out.write("sequences.fasta", format_fasta(sim.extant_fastas));
  out.write("atoms_unfiltered.tsv", format_atoms_tsv(sim.truth_atoms));
  out.write("atoms.tsv", format_atoms_tsv(filter_short_atoms(sim.truth_atoms, c.sim.min_atom_bp)));
  HistoryFile truth{sim.species_tree, {{{{"source", "simulation"}, {"seed", std::to_string(seed)}}, sim.truth.history}}};
  out.write("truth_history.txt", format_history_file(truth));
  out.write("truth_events.tsv", format_bp_events(tree, sim.events));
  for (std::size_t i = 0; i < sim.truth_segment_trees.size(); ++i) {
    out.write("truth_trees/" + type_file(sim.segment_tree_types[i]), to_newick(sim.truth_segment_trees[i], 17) + "\n");
  }
}

int cmd_simulate(const Globals& g, const std::string& tree_path, int count) {
  Inputs in;
  RunConfig c = load(g, in);
  auto tree = tree_path.empty() ? std::make_shared<const SpeciesTree>(SpeciesTree::single("species"))
                                : load_species_tree(tree_path, in);
  if (count < 1) throw DomainError("--count must be at least 1");
  auto one = [&](int i) {
    const std::uint64_t seed = g.seed + static_cast<std::uint64_t>(i);
    OutputDir out(count == 1 ? fs::path(g.out_dir) : fs::path(g.out_dir) / fmt::format("cluster_{:03}", i));
    auto sim = simulate_cluster(tree, c.model, c.sim, seed);
    write_cluster(sim, c, seed, out);
    Globals gi = g;
    gi.seed = seed;
    out.finish(manifest("simulate", gi, c, in));
    spdlog::info("cluster {}: {} events, {} atoms", i, sim.events.size(), sim.truth_atoms.size());
  };
  const int threads = std::max(1, g.threads);
  for (int first = 0; first < count; first += threads) {
    std::vector<std::future<void>> running;
    for (int i = first; i < std::min(count, first + threads); ++i) {
      running.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred, one, i));
    }
    for (auto& f : running) f.get();
  }
  return exit_ok;
}

int cmd_atomize(const Globals& g, const std::vector<std::string>& fastas, std::optional<long> window,
                std::optional<double> identity, bool merge) {
  Inputs in;
  RunConfig c = load(g, in);
  if (window) c.atomizer.window_bp = *window;
  if (identity) c.atomizer.identity = *identity;
  std::vector<FastaRecord> records;
  for (std::size_t i = 0; i < fastas.size(); ++i) {
    auto r = parse_fasta(in.read(fmt::format("fasta_{}", i), fastas[i]));
    records.insert(records.end(), r.begin(), r.end());
  }
  auto atoms = window_atomize(sequences_from_fasta(records), c.atomizer);
  if (merge) atoms = merge_paired_atoms(atoms);
  OutputDir out(g.out_dir);
  out.write("atoms.tsv", format_atoms_tsv(atoms));
  out.finish(manifest("atomize", g, c, in));
  return exit_ok;
}

void write_pools(const std::vector<GuideTreePool>& pools, const Dataset& data, const PoolSettings& settings, OutputDir& out) {
  for (const auto& p : pools) {
    out.write("pools/" + type_file(data.external_type[static_cast<std::size_t>(p.type)]), format_pool(p, data, settings));
  }
}

int cmd_pools(const Globals& g, const std::string& atoms, const std::string& fasta, const std::string& tree) {
  Inputs in;
  RunConfig c = load(g, in);
  Dataset data = load_dataset(atoms, fasta, tree, in);
  auto pools = build_pools(data, c.model.hky, c.pool, g.seed, g.threads);
  OutputDir out(g.out_dir);
  write_pools(pools, data, c.pool, out);
  out.finish(manifest("pools", g, c, in));
  return exit_ok;
}

std::vector<GuideTreePool> read_pools(const std::string& dir, const Dataset& data, Inputs& in) {
  std::vector<GuideTreePool> pools;
  for (int t = 0; t < data.type_count(); ++t) {
    std::string name = type_file(data.external_type[static_cast<std::size_t>(t)]);
    pools.push_back(parse_pool(in.read("pools/" + name, (fs::path(dir) / name).string()), data, t));
  }
  return pools;
}

std::string format_retained(const std::vector<RetainedSample>& samples, const std::vector<long>& external_type) {
  std::string out;
  for (const auto& s : samples) {
    HistoryBlock b{{{"chain", std::to_string(s.chain)}, {"iteration", std::to_string(s.iteration)},
                    {"log_score", fmt::format("{}", s.log_score)}},
                   s.history};
    out += format_history_block(b, &external_type);
  }
  return out;
}

std::string format_chains(const std::vector<ChainResult>& chains) {
  std::string out = "#chain\tretained\tmean_log_score\tacceptance_rate\n";
  for (std::size_t c = 0; c < chains.size(); ++c) {
    double sum = 0.0;
    for (const auto& s : chains[c].retained) sum += s.log_score;
    int acc = 0;
    for (const auto& r : chains[c].records) acc += r.accepted;
    const auto n = chains[c].retained.size();
    out += fmt::format("{}\t{}\t{}\t{}\n", c, n, n ? sum / static_cast<double>(n) : 0.0,
                       chains[c].records.empty() ? 0.0 : acc / static_cast<double>(chains[c].records.size()));
  }
  return out;
}

struct SampleOptions {
  std::string atoms, fasta, tree, pools;
  std::optional<int> chains, iters, burnin;
};

int cmd_sample(const Globals& g, const SampleOptions& o) {
  Inputs in;
  RunConfig c = load(g, in);
  if (o.chains) c.chain.chains = *o.chains;
  if (o.iters) c.chain.iterations = *o.iters;
  if (o.burnin) c.chain.burn_in = *o.burnin;
  c.chain.seed = g.seed;
  c.chain.threads = g.threads;
  c.chain.validate();
  Dataset data = load_dataset(o.atoms, o.fasta, o.tree, in);
  OutputDir out(g.out_dir);
  std::vector<GuideTreePool> pools;
  if (o.pools.empty()) {
    pools = build_pools(data, c.model.hky, c.pool, g.seed, g.threads);
    write_pools(pools, data, c.pool, out);
  } else {
    pools = read_pools(o.pools, data, in);
  }
  ChainInputs inputs{&data, &pools, c.model, c.proposal};
  auto chains = run_chains(inputs, c.chain);
  const SpeciesTree& tree = *data.species_tree;
  std::string samples = samples_header(tree);
  std::vector<RetainedSample> retained;
  for (const auto& ch : chains) {
    samples += format_sample_records(ch.records);
    retained.insert(retained.end(), ch.retained.begin(), ch.retained.end());
  }
  out.write("samples.tsv", samples);
  out.write("histories.txt", history_file_header(tree) + format_retained(retained, data.external_type));
  out.write("chains.tsv", format_chains(chains));
  if (!retained.empty()) {
    auto s = summarize(retained, data);
    out.write("summary.tsv", format_summary(s, tree));
    out.write("adjacency.tsv", format_adjacency(s));
  }
  out.finish(manifest("sample", g, c, in));
  return exit_ok;
}

double attribute_number(const HistoryBlock& b, const std::string& key) {
  std::string v = b.attribute(key);
  if (v.empty()) throw DataError("history block without " + key);
  return std::stod(v);
}

int cmd_summarize(const Globals& g, const std::string& samples_dir, const std::string& truth_dir) {
  Inputs in;
  RunConfig c = load(g, in);
  auto file = parse_history_file(in.read("histories", (fs::path(samples_dir) / "histories.txt").string()));
  if (file.blocks.empty()) throw DataError("no retained histories in " + samples_dir);
  std::set<long> types;
  for (const auto& b : file.blocks) {
    for (const auto& a : b.history.ancestral.atoms) types.insert(a.type);
  }
  std::vector<long> external(types.begin(), types.end());
  std::map<long, TypeId> dense;
  for (std::size_t i = 0; i < external.size(); ++i) dense[external[i]] = static_cast<TypeId>(i);
  std::vector<RetainedSample> samples;
  for (auto& b : file.blocks) {
    replay(b.history);
    for (auto& a : b.history.ancestral.atoms) a.type = dense.at(a.type);
    samples.push_back({static_cast<int>(attribute_number(b, "chain")), static_cast<int>(attribute_number(b, "iteration")),
                       attribute_number(b, "log_score"), std::move(b.history), {}});
  }
  std::optional<std::vector<std::pair<long, Strand>>> truth;
  std::optional<std::vector<BpEvent>> truth_events;
  if (!truth_dir.empty()) {
    auto t = parse_history_file(in.read("truth_history", (fs::path(truth_dir) / "truth_history.txt").string()));
    if (t.blocks.empty()) throw DataError("empty truth history");
    truth.emplace();
    for (const auto& a : root_node_sequence(t.blocks.front().history).atoms) truth->emplace_back(a.type, a.strand);
    truth_events = parse_bp_events(*file.species_tree, in.read("truth_events", (fs::path(truth_dir) / "truth_events.tsv").string()));
  }
  auto s = summarize(samples, external, truth);
  const SpeciesTree& tree = *file.species_tree;
  OutputDir out(g.out_dir);
  out.write("summary.tsv", format_summary(s, tree));
  out.write("adjacency.tsv", format_adjacency(s));
  std::vector<std::pair<std::string, double>> metrics{{"samples", static_cast<double>(s.samples)},
                                                      {"best_log_score", s.best.log_score}};
  std::map<int, std::pair<double, int>> per_chain;
  for (const auto& smp : samples) {
    per_chain[smp.chain].first += smp.log_score;
    ++per_chain[smp.chain].second;
  }
  for (const auto& [ch, acc] : per_chain) metrics.emplace_back(fmt::format("chain_{}_mean_log_score", ch), acc.first / acc.second);
  double focal = 0.0;
  auto lineage = focal_lineage(tree);
  for (int v : lineage) focal += s.branches[static_cast<std::size_t>(v)].dup_mean + s.branches[static_cast<std::size_t>(v)].del_mean;
  metrics.emplace_back("focal_expected_events", focal);
  metrics.emplace_back("focal_rounded_events", std::round(focal));
  if (truth) {
    metrics.emplace_back("expected_incorrect_breakpoints", *s.expected_incorrect_breakpoints);
    std::set<int> on(lineage.begin(), lineage.end());
    double true_events = 0;
    for (const auto& e : *truth_events) true_events += on.count(e.branch);
    metrics.emplace_back("focal_true_events", true_events);
  }
  out.write("evaluation.tsv", format_metrics(metrics));
  out.finish(manifest("summarize", g, c, in));
  return exit_ok;
}

int cmd_export_tubetree(const std::string& history_path, const std::string& out_path, int block) {
  auto file = parse_history_file(read_file(history_path));
  if (block < 0 || block >= static_cast<int>(file.blocks.size())) {
    throw DataError(fmt::format("history file holds {} blocks, no block {}", file.blocks.size(), block));
  }
  const History& h = file.blocks[static_cast<std::size_t>(block)].history;
  replay(h);
  std::string dot = tube_tree_dot(h);
  if (out_path.empty() || out_path == "-") {
    std::cout << dot;
  } else {
    if (fs::path(out_path).has_parent_path()) fs::create_directories(fs::path(out_path).parent_path());
    write_file(out_path, dot);
  }
  return exit_ok;
}

}  // namespace

void configure_logging() {
  auto logger = std::make_shared<spdlog::logger>("duphist", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("DUPHIST_LOG");
  if (!env) return;
  const std::map<std::string, spdlog::level::level_enum> levels{
      {"error", spdlog::level::err}, {"warn", spdlog::level::warn}, {"info", spdlog::level::info}, {"debug", spdlog::level::debug}};
  auto it = levels.find(env);
  if (it == levels.end()) {
    spdlog::warn("DUPHIST_LOG='{}' not one of error, warn, info, debug", env);
    return;
  }
  spdlog::set_level(it->second);
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"duphist: duplication histories of gene clusters"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "key=value configuration file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "output directory");

  auto* sim = app.add_subcommand("simulate", "simulate gene clusters with their true histories");
  std::string sim_tree;
  int count = 1;
  sim->add_option("--species-tree", sim_tree, "Newick species tree (default: one species)");
  sim->add_option("--count", count, "number of clusters (seeds seed, seed+1, ...)");

  auto* atz = app.add_subcommand("atomize", "window-based atomization of FASTA sequences");
  std::vector<std::string> atz_fasta;
  std::optional<long> window;
  std::optional<double> identity;
  bool no_merge = false;
  atz->add_option("--fasta", atz_fasta, "FASTA files")->required();
  atz->add_option("--window", window, "window length in bp");
  atz->add_option("--identity", identity, "identity cutoff");
  atz->add_flag("--no-merge", no_merge, "keep contiguous atom pairs separate");

  auto* pls = app.add_subcommand("pools", "sample guide-tree pools per atom type");
  SampleOptions so;
  pls->add_option("--atoms", so.atoms, "atoms TSV")->required();
  pls->add_option("--fasta", so.fasta, "FASTA")->required();
  pls->add_option("--species-tree", so.tree, "Newick species tree");

  auto* smp = app.add_subcommand("sample", "run Metropolis-Hastings chains");
  smp->add_option("--atoms", so.atoms, "atoms TSV")->required();
  smp->add_option("--fasta", so.fasta, "FASTA")->required();
  smp->add_option("--species-tree", so.tree, "Newick species tree");
  smp->add_option("--pools", so.pools, "directory of pool files (built when absent)");
  smp->add_option("--chains", so.chains, "number of chains");
  smp->add_option("--iters", so.iters, "iterations per chain");
  smp->add_option("--burnin", so.burnin, "burn-in iterations per chain");

  auto* sum = app.add_subcommand("summarize", "summarize retained histories");
  std::string samples_dir, truth_dir;
  sum->add_option("--samples", samples_dir, "output directory of sample")->required();
  sum->add_option("--truth", truth_dir, "output directory of simulate");

  auto* tube = app.add_subcommand("export-tubetree", "DOT tube tree of one history");
  std::string history_path, out_path;
  int block = 0;
  tube->add_option("--history", history_path, "history file")->required();
  tube->add_option("--out", out_path, "DOT output (- for stdout)");
  tube->add_option("--block", block, "index of the history in the file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_ok : exit_input;
  }
  try {
    if (*sim) return cmd_simulate(g, sim_tree, count);
    if (*atz) return cmd_atomize(g, atz_fasta, window, identity, !no_merge);
    if (*pls) return cmd_pools(g, so.atoms, so.fasta, so.tree);
    if (*smp) return cmd_sample(g, so);
    if (*sum) return cmd_summarize(g, samples_dir, truth_dir);
    if (*tube) return cmd_export_tubetree(history_path, out_path, block);
  } catch (const InternalError& e) {
    spdlog::error("internal error: {}", e.what());
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_internal;
}

}  // namespace duphist

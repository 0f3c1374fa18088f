#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <unistd.h>

#include "duphist/cli/commands.hpp"
#include "duphist/data/formats.hpp"
#include "duphist/io/history_io.hpp"
#include "duphist/io/outputs.hpp"

using namespace duphist;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path{fs::temp_directory_path() / ("duphist_cli_" + std::to_string(::getpid()))} {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& rel) const { return (path / rel).string(); }
};

const std::string hcm = std::string(DUPHIST_SOURCE_DIR) + "/configs/hcm.nwk";

std::string small_config(const TempDir& dir, const std::string& extra = "") {
  std::string path = dir / "small.conf";
  write_file(path, "lambda=60\nroot_branch_length=0.03\nmean_dup_length=800\nmean_dup_distance=2000\n"
                   "mean_del_length=500\nancestral_length=4000\nmin_atom_bp=100\npool_iterations=400\n"
                   "pool_burn_in=100\n" + extra);
  return path;
}

std::string slurp(const std::string& path) { return read_file(path); }

}  // namespace

TEST_CASE("simulate is deterministic and writes a manifest") {
  TempDir dir;
  auto conf = small_config(dir);
  for (const char* out : {"a", "b"}) {
    CHECK(run_cli({"--config", conf, "--seed", "7", "--out-dir", dir / out, "simulate", "--species-tree", hcm}) == exit_ok);
  }
  for (const char* f : {"sequences.fasta", "atoms.tsv", "atoms_unfiltered.tsv", "truth_history.txt", "truth_events.tsv",
                        "species_tree.nwk", "manifest.json"}) {
    CHECK_MESSAGE(slurp(dir / (std::string("a/") + f)) == slurp(dir / (std::string("b/") + f)), f);
  }
  auto m = nlohmann::json::parse(slurp(dir / "a/manifest.json"));
  CHECK(m["seed"] == 7);
  CHECK(m["outputs"]["atoms.tsv"] == sha256_hex(slurp(dir / "a/atoms.tsv")));
  CHECK(m["inputs"].contains("config"));
  // outputs round-trip through their parsers
  auto atoms = slurp(dir / "a/atoms_unfiltered.tsv");
  CHECK(format_atoms_tsv(parse_atoms_tsv(atoms)) == atoms);
  auto fasta = slurp(dir / "a/sequences.fasta");
  CHECK(format_fasta(parse_fasta(fasta)) == fasta);
  auto hist = slurp(dir / "a/truth_history.txt");
  CHECK(format_history_file(parse_history_file(hist)) == hist);

  CHECK(run_cli({"--config", conf, "--seed", "8", "--out-dir", dir / "c", "simulate", "--species-tree", hcm}) == exit_ok);
  CHECK(slurp(dir / "a/sequences.fasta") != slurp(dir / "c/sequences.fasta"));
}

TEST_CASE("simulate edge cases") {
  TempDir dir;
  auto zero = small_config(dir, "lambda=0\n");
  CHECK(run_cli({"--config", zero, "--out-dir", dir / "z", "simulate", "--species-tree", hcm}) == exit_ok);
  auto h = parse_history_file(slurp(dir / "z/truth_history.txt"));
  for (const auto& events : h.blocks[0].history.branch_events) CHECK(events.empty());
  CHECK(slurp(dir / "z/truth_events.tsv").find('\n') == slurp(dir / "z/truth_events.tsv").size() - 1);

  auto conf = small_config(dir);
  CHECK(run_cli({"--config", conf, "--threads", "2", "--out-dir", dir / "batch", "simulate", "--count", "3"}) == exit_ok);
  for (const char* c : {"cluster_000", "cluster_001", "cluster_002"}) CHECK(fs::exists(dir / (std::string("batch/") + c + "/manifest.json")));
  CHECK(!fs::exists(dir / "batch/cluster_003"));
  CHECK(slurp(dir / "batch/cluster_001/sequences.fasta") != slurp(dir / "batch/cluster_002/sequences.fasta"));

  write_file(dir / "bad.conf", "lambda=50\nlambda_typo=3\n");
  CHECK(run_cli({"--config", dir / "bad.conf", "--out-dir", dir / "x", "simulate"}) == exit_input);
  write_file(dir / "bad.nwk", "((a,b);\n");
  CHECK(run_cli({"--out-dir", dir / "x", "simulate", "--species-tree", dir / "bad.nwk"}) == exit_input);
  CHECK(run_cli({"simulate", "--no-such-flag"}) == exit_input);
  CHECK(run_cli({}) == exit_input);
}

TEST_CASE("sample, summarize and export on a simulated cluster") {
  TempDir dir;
  auto conf = small_config(dir);
  REQUIRE(run_cli({"--config", conf, "--seed", "3", "--out-dir", dir / "sim", "simulate", "--species-tree", hcm}) == exit_ok);
  std::vector<std::string> sample{"--config", conf, "--seed", "5", "--out-dir", dir / "run", "sample", "--atoms", dir / "sim/atoms.tsv",
                                  "--fasta", dir / "sim/sequences.fasta", "--species-tree", hcm, "--iters", "60", "--burnin", "20"};
  REQUIRE(run_cli(sample) == exit_ok);
  for (const char* f : {"samples.tsv", "histories.txt", "chains.tsv", "summary.tsv", "adjacency.tsv", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / (std::string("run/") + f)), f);
  }
  auto h = parse_history_file(slurp(dir / "run/histories.txt"));
  CHECK(h.blocks.size() == 80);

  // pools written by sample feed an identical rerun
  sample[5] = dir / "rerun";
  sample.push_back("--pools");
  sample.push_back(dir / "run/pools");
  REQUIRE(run_cli(sample) == exit_ok);
  CHECK(slurp(dir / "run/samples.tsv") == slurp(dir / "rerun/samples.tsv"));
  CHECK(slurp(dir / "run/histories.txt") == slurp(dir / "rerun/histories.txt"));

  REQUIRE(run_cli({"--out-dir", dir / "sum", "summarize", "--samples", dir / "run", "--truth", dir / "sim"}) == exit_ok);
  CHECK(slurp(dir / "sum/summary.tsv") == slurp(dir / "run/summary.tsv"));
  CHECK(slurp(dir / "sum/adjacency.tsv") == slurp(dir / "run/adjacency.tsv"));
  auto eval = slurp(dir / "sum/evaluation.tsv");
  for (const char* k : {"expected_incorrect_breakpoints", "focal_expected_events", "focal_true_events", "chain_1_mean_log_score"}) {
    CHECK_MESSAGE(eval.find(k) != std::string::npos, k);
  }

  CHECK(run_cli({"export-tubetree", "--history", dir / "run/histories.txt", "--out", dir / "t.dot", "--block", "3"}) == exit_ok);
  CHECK(slurp(dir / "t.dot").rfind("digraph tubetree {", 0) == 0);
  CHECK(run_cli({"export-tubetree", "--history", dir / "run/histories.txt", "--out", dir / "t.dot", "--block", "999"}) == exit_input);
  write_file(dir / "broken.txt", "#duphist-history v1\n#species_tree\ts;\n@history\nancestral\t0+\nevent\ts\t0\tdup\t0\t5\t9\t0\t-\t-\n@end\n");
  CHECK(run_cli({"export-tubetree", "--history", dir / "broken.txt", "--out", dir / "t2.dot"}) == exit_input);
}

TEST_CASE("sample input errors and trivial input") {
  TempDir dir;
  write_file(dir / "seq.fa", ">s\nACGTACGTACGTACGTACGTAAAACCCCGGGGTTTT\n");
  write_file(dir / "atoms.tsv", "0\t0\ts\ts\t0\t12\t+\n1\t1\ts\ts\t12\t24\t-\n2\t2\ts\ts\t24\t36\t+\n");
  REQUIRE(run_cli({"--out-dir", dir / "run", "sample", "--atoms", dir / "atoms.tsv", "--fasta", dir / "seq.fa", "--iters", "20",
                   "--burnin", "5", "--chains", "1"}) == exit_ok);
  CHECK(slurp(dir / "run/summary.tsv") == "#branch\tdup_mean\tdup_sd\tdel_mean\tdel_sd\ns\t0\t0\t0\t0\n");

  write_file(dir / "bad_atoms.tsv", "0\t0\ts\ts\t0\t12\t+\n1\t1\ts\ts\t30\t50\t-\n2\t2\ts\tq\t0\t5\t+\n");
  CHECK(run_cli({"--out-dir", dir / "x", "sample", "--atoms", dir / "bad_atoms.tsv", "--fasta", dir / "seq.fa"}) == exit_input);
  CHECK(run_cli({"--out-dir", dir / "x", "sample", "--atoms", dir / "missing.tsv", "--fasta", dir / "seq.fa"}) == exit_input);
  CHECK(run_cli({"--out-dir", dir / "x", "sample", "--atoms", dir / "atoms.tsv", "--fasta", dir / "seq.fa", "--iters", "10",
                 "--burnin", "10"}) == exit_input);
}

TEST_CASE("atomize and pools commands") {
  TempDir dir;
  auto conf = small_config(dir, "lambda=120\n");
  REQUIRE(run_cli({"--config", conf, "--seed", "2", "--out-dir", dir / "sim", "simulate"}) == exit_ok);
  REQUIRE(run_cli({"--out-dir", dir / "atz", "atomize", "--fasta", dir / "sim/sequences.fasta", "--window", "200"}) == exit_ok);
  auto atoms = parse_atoms_tsv(slurp(dir / "atz/atoms.tsv"));
  CHECK(!atoms.empty());
  REQUIRE(run_cli({"--config", conf, "--out-dir", dir / "pools", "pools", "--atoms", dir / "atz/atoms.tsv", "--fasta",
                   dir / "sim/sequences.fasta"}) == exit_ok);
  CHECK(fs::exists(dir / "pools/pools/type_0.nwk"));
  CHECK(fs::exists(dir / "pools/manifest.json"));
}

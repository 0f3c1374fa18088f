#include "duphist/io/outputs.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <cstdlib>
#include <ctime>
#include <json.hpp>
#include <map>

#include "duphist/core/errors.hpp"
#include "text.hpp"

namespace duphist {

using io_detail::Line;
using io_detail::number;

std::string format_pool(const GuideTreePool& pool, const Dataset& data, const PoolSettings& settings) {
  std::string out = fmt::format("# type_id={} trees={} iterations={} burn_in={} thin={} branch_prior_mean={} collapse_substitutions={}\n",
                                data.external_type.at(static_cast<std::size_t>(pool.type)), pool.samples.size(),
                                settings.iterations, settings.burn_in, settings.thin, settings.branch_prior_mean,
                                settings.collapse_substitutions);
  for (Tree t : pool.samples) {
    for (int v = 0; v < t.size(); ++v) {
      if (t.node(v).is_leaf()) t.node(v).label = std::to_string(data.records.at(static_cast<std::size_t>(t.node(v).id)).atom_id);
    }
    out += to_newick(t, 17) + "\n";
  }
  return out;
}

GuideTreePool parse_pool(std::string_view text, const Dataset& data, TypeId type) {
  std::map<long, InstanceId> index;
  for (auto i : data.type_instances.at(static_cast<std::size_t>(type))) index[data.records[static_cast<std::size_t>(i)].atom_id] = i;
  GuideTreePool pool{type, {}};
  for (const auto& l : io_detail::tab_lines(text)) {
    Tree t;
    try {
      t = parse_newick(l.text);
    } catch (const ParseError& e) {
      throw ParseError(std::string("pool tree: ") + e.what(), l.number, 1);
    }
    std::size_t leaves = 0;
    for (int v = 0; v < t.size(); ++v) {
      if (!t.node(v).is_leaf()) continue;
      ++leaves;
      Line sub{l.number, l.text, {t.node(v).label}};
      auto it = index.find(number<long>(sub, 0, "atom id"));
      if (it == index.end()) throw ParseError("pool leaf '" + t.node(v).label + "' is not an atom of this type", l.number, 1);
      t.node(v).id = it->second;
    }
    if (leaves != index.size()) throw ParseError("pool tree does not cover every atom of the type", l.number, 1);
    pool.samples.push_back(std::move(t));
  }
  if (pool.samples.empty()) throw ParseError("pool file holds no trees", 1, 1);
  return pool;
}

std::string samples_header(const SpeciesTree& tree) {
  std::string out = "#chain\titeration\tlog_score\taccepted";
  for (int v = 0; v < tree.size(); ++v) out += "\tdup_" + tree.name(v) + "\tdel_" + tree.name(v);
  return out + "\n";
}

std::string format_sample_records(const std::vector<SampleRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += fmt::format("{}\t{}\t{}\t{}", r.chain, r.iteration, r.log_score, r.accepted ? 1 : 0);
    for (const auto& c : r.counts) out += fmt::format("\t{}\t{}", c.duplications, c.deletions);
    out += "\n";
  }
  return out;
}

std::vector<SampleRow> parse_samples(std::string_view text, const SpeciesTree& tree) {
  std::vector<SampleRow> out;
  const std::size_t n = static_cast<std::size_t>(tree.size());
  for (const auto& l : io_detail::tab_lines(text)) {
    io_detail::expect_fields(l, 4 + 2 * n);
    SampleRow r{number<int>(l, 0, "chain"), number<int>(l, 1, "iteration"), number<double>(l, 2, "log_score"),
                number<int>(l, 3, "accepted flag") != 0, {}};
    for (std::size_t b = 0; b < n; ++b) {
      r.counts.push_back({number<int>(l, 4 + 2 * b, "duplication count"), number<int>(l, 5 + 2 * b, "deletion count")});
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_summary(const PosteriorSummary& s, const SpeciesTree& tree) {
  std::string out = "#branch\tdup_mean\tdup_sd\tdel_mean\tdel_sd\n";
  for (int v = 0; v < tree.size(); ++v) {
    const auto& b = s.branches.at(static_cast<std::size_t>(v));
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", tree.name(v), b.dup_mean, b.dup_sd, b.del_mean, b.del_sd);
  }
  return out;
}

std::string format_adjacency(const PosteriorSummary& s) {
  auto signed_type = [](long x) { return fmt::format("{}{}", x / 2, x % 2 ? '-' : '+'); };
  std::string out = "#typeA\ttypeB\tfrequency\n";
  for (const auto& [adj, f] : s.ancestral_adjacency) out += signed_type(adj.first) + "\t" + signed_type(adj.second) + fmt::format("\t{}\n", f);
  return out;
}

std::string format_metrics(const std::vector<std::pair<std::string, double>>& metrics) {
  std::string out = "#metric\tvalue\n";
  for (const auto& [k, v] : metrics) out += fmt::format("{}\t{}\n", k, v);
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw InternalError("SHA-256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string format_manifest(const Manifest& m) {
  std::time_t epoch = 0;
  if (const char* s = std::getenv("SOURCE_DATE_EPOCH")) epoch = static_cast<std::time_t>(std::strtoll(s, nullptr, 10));
  char stamp[32];
  std::tm tm{};
  gmtime_r(&epoch, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::ordered_json j;
  j["tool"] = "duphist";
  j["version"] = "0.1.0";
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["timestamp"] = stamp;
  auto obj = [](const std::vector<std::pair<std::string, std::string>>& kv) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [k, v] : kv) o[k] = v;
    return o;
  };
  j["config"] = obj(m.config);
  j["inputs"] = obj(m.inputs);
  j["outputs"] = obj(m.outputs);
  return j.dump(2) + "\n";
}

}  // namespace duphist

#include "duphist/model/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "duphist/core/errors.hpp"

namespace duphist {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Field {
  std::string_view text;
  int line;
  int column;

  [[noreturn]] void fail(const std::string& why) const { throw ParseError(why, line, column); }

  double real() const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) fail("expected a number, got '" + std::string(text) + "'");
    return v;
  }

  long integer() const {
    long v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) fail("expected an integer, got '" + std::string(text) + "'");
    return v;
  }

  std::vector<double> reals() const {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t comma = text.find(',', pos);
      if (comma == std::string_view::npos) comma = text.size();
      Field part{trim(text.substr(pos, comma - pos)), line, column + static_cast<int>(pos)};
      out.push_back(part.real());
      pos = comma + 1;
    }
    return out;
  }
};

using Setter = std::function<void(RunConfig&, const Field&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["lambda"] = [](RunConfig& c, const Field& f) { c.model.lambda = f.real(); };
    t["mean_dup_length"] = [](RunConfig& c, const Field& f) { c.model.mean_dup_length = f.real(); };
    t["mean_dup_distance"] = [](RunConfig& c, const Field& f) { c.model.mean_dup_distance = f.real(); };
    t["p_inversion"] = [](RunConfig& c, const Field& f) { c.model.p_inversion = f.real(); };
    t["p_deletion"] = [](RunConfig& c, const Field& f) { c.model.p_deletion = f.real(); };
    t["mean_del_length"] = [](RunConfig& c, const Field& f) { c.model.mean_del_length = f.real(); };
    t["root_branch_length"] = [](RunConfig& c, const Field& f) { c.model.root_branch_length = f.real(); };
    t["hky_kappa"] = [](RunConfig& c, const Field& f) { c.model.hky.kappa = f.real(); };
    const char* bases = "acgt";
    for (int i = 0; i < 4; ++i) {
      t[std::string("hky_pi_") + bases[i]] = [i](RunConfig& c, const Field& f) {
        c.model.hky.pi[static_cast<std::size_t>(i)] = f.real();
      };
    }
    for (int i = 0; i < 10; ++i) {
      t["w" + std::to_string(i + 1)] = [i](RunConfig& c, const Field& f) {
        c.model.feature_weights[static_cast<std::size_t>(i)] = f.real();
      };
    }
    t["heats"] = [](RunConfig& c, const Field& f) { c.model.heats = f.reals(); };
    t["chains"] = [](RunConfig& c, const Field& f) { c.chain.chains = static_cast<int>(f.integer()); };
    t["iterations"] = [](RunConfig& c, const Field& f) { c.chain.iterations = static_cast<int>(f.integer()); };
    t["burn_in"] = [](RunConfig& c, const Field& f) { c.chain.burn_in = static_cast<int>(f.integer()); };
    t["pool_iterations"] = [](RunConfig& c, const Field& f) { c.pool.iterations = static_cast<int>(f.integer()); };
    t["pool_burn_in"] = [](RunConfig& c, const Field& f) { c.pool.burn_in = static_cast<int>(f.integer()); };
    t["pool_thin"] = [](RunConfig& c, const Field& f) { c.pool.thin = static_cast<int>(f.integer()); };
    t["pool_branch_prior_mean"] = [](RunConfig& c, const Field& f) { c.pool.branch_prior_mean = f.real(); };
    t["collapse_substitutions"] = [](RunConfig& c, const Field& f) { c.pool.collapse_substitutions = f.real(); };
    t["tree_keep_probability"] = [](RunConfig& c, const Field& f) { c.proposal.tree_keep_probability = f.real(); };
    t["speciation_top"] = [](RunConfig& c, const Field& f) { c.proposal.speciation_top = static_cast<int>(f.integer()); };
    t["speciation_cap"] = [](RunConfig& c, const Field& f) { c.proposal.speciation_cap = static_cast<int>(f.integer()); };
    t["speciation_near_optimal"] = [](RunConfig& c, const Field& f) { c.proposal.speciation_near_optimal = f.real(); };
    t["ancestral_length"] = [](RunConfig& c, const Field& f) { c.sim.ancestral_length = f.integer(); };
    t["min_atom_bp"] = [](RunConfig& c, const Field& f) { c.sim.min_atom_bp = f.integer(); };
    t["window_bp"] = [](RunConfig& c, const Field& f) { c.atomizer.window_bp = f.integer(); };
    t["identity"] = [](RunConfig& c, const Field& f) { c.atomizer.identity = f.real(); };
    return t;
  }();
  return table;
}

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

RunConfig parse_config(std::string_view text, RunConfig base) {
  RunConfig c = std::move(base);
  bool del_set = false;
  bool dup_set = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    std::size_t line_start = pos;
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    auto col_of = [&](std::string_view part) { return static_cast<int>(part.data() - text.data() - line_start) + 1; };
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no, col_of(trim(line)));
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) throw ParseError("unknown key '" + std::string(key) + "'", line_no, col_of(key));
    if (value.empty()) throw ParseError("missing value for '" + std::string(key) + "'", line_no, col_of(key));
    it->second(c, Field{value, line_no, col_of(value)});
    del_set = del_set || key == "mean_del_length";
    dup_set = dup_set || key == "mean_dup_length";
  }
  if (dup_set && !del_set) c.model.mean_del_length = c.model.mean_dup_length;
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line(), e.column());
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  const auto& m = c.model;
  e.emplace_back("lambda", number(m.lambda));
  e.emplace_back("mean_dup_length", number(m.mean_dup_length));
  e.emplace_back("mean_dup_distance", number(m.mean_dup_distance));
  e.emplace_back("p_inversion", number(m.p_inversion));
  e.emplace_back("p_deletion", number(m.p_deletion));
  e.emplace_back("mean_del_length", number(m.mean_del_length));
  e.emplace_back("root_branch_length", number(m.root_branch_length));
  e.emplace_back("hky_kappa", number(m.hky.kappa));
  const char* bases = "acgt";
  for (int i = 0; i < 4; ++i) e.emplace_back(std::string("hky_pi_") + bases[i], number(m.hky.pi[static_cast<std::size_t>(i)]));
  for (int i = 0; i < 10; ++i) e.emplace_back("w" + std::to_string(i + 1), number(m.feature_weights[static_cast<std::size_t>(i)]));
  std::string heats;
  for (std::size_t i = 0; i < m.heats.size(); ++i) heats += (i ? "," : "") + number(m.heats[i]);
  e.emplace_back("heats", heats);
  e.emplace_back("chains", std::to_string(c.chain.chains));
  e.emplace_back("iterations", std::to_string(c.chain.iterations));
  e.emplace_back("burn_in", std::to_string(c.chain.burn_in));
  e.emplace_back("pool_iterations", std::to_string(c.pool.iterations));
  e.emplace_back("pool_burn_in", std::to_string(c.pool.burn_in));
  e.emplace_back("pool_thin", std::to_string(c.pool.thin));
  e.emplace_back("pool_branch_prior_mean", number(c.pool.branch_prior_mean));
  e.emplace_back("collapse_substitutions", number(c.pool.collapse_substitutions));
  e.emplace_back("tree_keep_probability", number(c.proposal.tree_keep_probability));
  e.emplace_back("speciation_top", std::to_string(c.proposal.speciation_top));
  e.emplace_back("speciation_cap", std::to_string(c.proposal.speciation_cap));
  e.emplace_back("speciation_near_optimal", number(c.proposal.speciation_near_optimal));
  e.emplace_back("ancestral_length", std::to_string(c.sim.ancestral_length));
  e.emplace_back("min_atom_bp", std::to_string(c.sim.min_atom_bp));
  e.emplace_back("window_bp", std::to_string(c.atomizer.window_bp));
  e.emplace_back("identity", number(c.atomizer.identity));
  return e;
}

std::string config_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + "=" + v + "\n";
  return out;
}

}  // namespace duphist

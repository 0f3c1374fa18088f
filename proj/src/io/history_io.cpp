#include "duphist/io/history_io.hpp"

#include <fmt/format.h>

#include "duphist/core/errors.hpp"
#include "text.hpp"

namespace duphist {

using io_detail::Line;
using io_detail::number;

namespace {

constexpr std::string_view magic = "#duphist-history v1";

int node_of(const SpeciesTree& tree, const Line& l, std::size_t i) {
  int v = tree.find(l.fields[i]);
  if (v < 0) throw ParseError("unknown species-tree node '" + std::string(l.fields[i]) + "'", l.number, l.column(i));
  return v;
}

std::string spans_text(const std::vector<Span>& spans) {
  if (spans.empty()) return "-";
  std::string out;
  for (const auto& s : spans) out += (out.empty() ? "" : ",") + fmt::format("{}:{}", s.begin, s.end);
  return out;
}

std::vector<Span> parse_spans(const Line& l, std::size_t i) {
  std::vector<Span> out;
  if (l.fields[i] == "-") return out;
  for (auto part : io_detail::split(l.fields[i], ',')) {
    auto ends = io_detail::split(part, ':');
    Line sub{l.number, l.text, ends};
    if (ends.size() != 2) throw ParseError("deletion span must read begin:end", l.number, l.column(i));
    out.push_back({number<int>(sub, 0, "span begin"), number<int>(sub, 1, "span end")});
  }
  return out;
}

AtomicSequence parse_layout(const Line& l) {
  AtomicSequence seq;
  int id = 0;
  for (std::size_t i = 1; i < l.fields.size(); ++i) {
    std::string_view tok = l.fields[i];
    if (tok.size() < 2 || (tok.back() != '+' && tok.back() != '-')) {
      throw ParseError("ancestral atom must read <type><+|->", l.number, l.column(i));
    }
    Line sub{l.number, l.text, {tok.substr(0, tok.size() - 1)}};
    seq.atoms.push_back({id++, number<int>(sub, 0, "type id"), tok.back() == '+' ? Strand::forward : Strand::reverse});
  }
  return seq;
}

}  // namespace

std::string HistoryBlock::attribute(const std::string& key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return v;
  }
  return {};
}

std::string history_file_header(const SpeciesTree& tree) {
  return std::string(magic) + "\n#species_tree\t" + tree.to_newick() + "\n";
}

std::string format_history_block(const HistoryBlock& block, const std::vector<long>* external_type) {
  const History& h = block.history;
  const SpeciesTree& tree = *h.species_tree;
  auto type_of = [&](TypeId t) { return external_type ? external_type->at(static_cast<std::size_t>(t)) : static_cast<long>(t); };
  std::string out = "@history";
  for (const auto& [k, v] : block.attributes) out += "\t" + k + "=" + v;
  out += "\nancestral";
  for (const auto& a : h.ancestral.atoms) out += fmt::format("\t{}{}", type_of(a.type), strand_char(a.strand));
  out += "\n";
  for (int v = 0; v < tree.size(); ++v) {
    const auto& events = h.branch_events[static_cast<std::size_t>(v)];
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (const auto* d = std::get_if<Duplication>(&events[k])) {
        out += fmt::format("event\t{}\t{}\tdup\t{}\t{}\t{}\t{}", tree.name(v), k, d->source.begin, d->source.end, d->target,
                           d->inverted ? 1 : 0);
        out += d->coupled_deletion ? fmt::format("\t{}\t{}\n", d->coupled_deletion->begin, d->coupled_deletion->end)
                                   : std::string("\t-\t-\n");
      } else {
        const auto& del = std::get<Deletion>(events[k]);
        out += fmt::format("event\t{}\t{}\tdel\t{}\t{}\n", tree.name(v), k, del.span.begin, del.span.end);
      }
    }
    if (!tree.is_leaf(v)) {
      const auto& s = h.speciations[static_cast<std::size_t>(v)];
      out += fmt::format("speciation\t{}\t{}\t{}\t{}\t{}\n", tree.name(s.parent), tree.name(s.child_a), tree.name(s.child_b),
                         spans_text(s.deletions_a), spans_text(s.deletions_b));
    }
  }
  return out + "@end\n";
}

std::string format_history_file(const HistoryFile& file, const std::vector<long>* external_type) {
  std::string out = history_file_header(*file.species_tree);
  for (const auto& b : file.blocks) out += format_history_block(b, external_type);
  return out;
}

HistoryFile parse_history_file(std::string_view text) {
  auto lines = io_detail::tab_lines(text, true);
  if (lines.empty() || lines.front().text != magic) throw ParseError("missing '#duphist-history v1' header", 1, 1);
  HistoryFile file;
  HistoryBlock* block = nullptr;
  bool have_ancestral = false;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const Line& l = lines[li];
    const std::string_view kind = l.fields[0];
    if (kind == "#species_tree") {
      io_detail::expect_fields(l, 2);
      try {
        file.species_tree = std::make_shared<SpeciesTree>(SpeciesTree::from_newick(l.fields[1]));
      } catch (const ParseError& e) {
        throw ParseError(std::string("species tree: ") + e.what(), l.number, l.column(1));
      }
      continue;
    }
    if (kind.front() == '#') continue;
    if (!file.species_tree) throw ParseError("history before the #species_tree line", l.number, 1);
    const SpeciesTree& tree = *file.species_tree;
    if (kind == "@history") {
      if (block) throw ParseError("@history inside an unterminated block", l.number, 1);
      file.blocks.push_back({{}, History::empty(file.species_tree, {})});
      block = &file.blocks.back();
      have_ancestral = false;
      for (std::size_t i = 1; i < l.fields.size(); ++i) {
        auto eq = l.fields[i].find('=');
        if (eq == std::string_view::npos) throw ParseError("attribute must read key=value", l.number, l.column(i));
        block->attributes.emplace_back(std::string(l.fields[i].substr(0, eq)), std::string(l.fields[i].substr(eq + 1)));
      }
      continue;
    }
    if (!block) throw ParseError("line outside a @history block", l.number, 1);
    History& h = block->history;
    if (kind == "@end") {
      if (!have_ancestral) throw ParseError("block without an ancestral line", l.number, 1);
      block = nullptr;
    } else if (kind == "ancestral") {
      if (have_ancestral) throw ParseError("second ancestral line", l.number, 1);
      h.ancestral = parse_layout(l);
      h.ancestral.species = tree.root();
      have_ancestral = true;
    } else if (kind == "event") {
      if (l.fields.size() < 4) throw ParseError("event line too short", l.number, 1);
      int v = node_of(tree, l, 1);
      auto& events = h.branch_events[static_cast<std::size_t>(v)];
      if (number<std::size_t>(l, 2, "ordinal") != events.size()) {
        throw ParseError("event ordinals must count up from 0 per branch", l.number, l.column(2));
      }
      if (l.fields[3] == "dup") {
        io_detail::expect_fields(l, 10);
        Duplication d{{number<int>(l, 4, "source begin"), number<int>(l, 5, "source end")}, number<int>(l, 6, "target"),
                      number<int>(l, 7, "inverted flag") != 0, {}};
        if (l.fields[8] != "-" || l.fields[9] != "-") {
          d.coupled_deletion = Span{number<int>(l, 8, "deletion begin"), number<int>(l, 9, "deletion end")};
        }
        events.emplace_back(d);
      } else if (l.fields[3] == "del") {
        io_detail::expect_fields(l, 6);
        events.emplace_back(Deletion{{number<int>(l, 4, "deletion begin"), number<int>(l, 5, "deletion end")}});
      } else {
        throw ParseError("event kind must be dup or del", l.number, l.column(3));
      }
    } else if (kind == "speciation") {
      io_detail::expect_fields(l, 6);
      int p = node_of(tree, l, 1);
      if (tree.is_leaf(p)) throw ParseError("speciation at a leaf", l.number, l.column(1));
      Speciation s{p, node_of(tree, l, 2), node_of(tree, l, 3), parse_spans(l, 4), parse_spans(l, 5)};
      h.speciations[static_cast<std::size_t>(p)] = s;
    } else {
      throw ParseError("unknown line kind '" + std::string(kind) + "'", l.number, 1);
    }
  }
  if (block) throw ParseError("unterminated @history block", lines.back().number, 1);
  return file;
}

std::string format_bp_events(const SpeciesTree& tree, const std::vector<BpEvent>& events) {
  std::string out = "#branch\tordinal\ttime\tkind\tbegin\tend\ttarget\tinverted\tlen_before\tdistance\tcentroid\n";
  for (const auto& e : events) {
    const bool dup = e.kind == BpEvent::Kind::duplication;
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", tree.name(e.branch), e.ordinal, e.time, dup ? "dup" : "del",
                       e.begin, e.end, e.target, e.inverted ? 1 : 0, e.len_before, e.distance, e.centroid);
  }
  return out;
}

std::vector<BpEvent> parse_bp_events(const SpeciesTree& tree, std::string_view text) {
  std::vector<BpEvent> out;
  for (const auto& l : io_detail::tab_lines(text)) {
    io_detail::expect_fields(l, 11);
    BpEvent e;
    e.branch = node_of(tree, l, 0);
    e.ordinal = number<int>(l, 1, "ordinal");
    e.time = number<double>(l, 2, "time");
    if (l.fields[3] == "dup") {
      e.kind = BpEvent::Kind::duplication;
    } else if (l.fields[3] == "del") {
      e.kind = BpEvent::Kind::deletion;
    } else {
      throw ParseError("event kind must be dup or del", l.number, l.column(3));
    }
    e.begin = number<long>(l, 4, "begin");
    e.end = number<long>(l, 5, "end");
    e.target = number<long>(l, 6, "target");
    e.inverted = number<int>(l, 7, "inverted flag") != 0;
    e.len_before = number<long>(l, 8, "len_before");
    e.distance = number<long>(l, 9, "distance");
    e.centroid = number<long>(l, 10, "centroid");
    out.push_back(e);
  }
  return out;
}

}  // namespace duphist

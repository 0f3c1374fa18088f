#include "duphist/data/formats.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "duphist/core/errors.hpp"

namespace duphist {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return out;
}

long parse_long(std::string_view s, int line, int col, const char* what) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(s) + "'", line, col);
  }
  return v;
}

}  // namespace

std::vector<AtomRecord> parse_atoms_tsv(std::string_view text) {
  std::vector<AtomRecord> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    auto f = split_tabs(line);
    if (f.size() != 7) throw ParseError("expected 7 tab-separated columns, got " + std::to_string(f.size()), line_no, 1);
    auto col = [&](std::size_t i) { return static_cast<int>(f[i].data() - line.data()) + 1; };
    AtomRecord r;
    r.atom_id = parse_long(f[0], line_no, col(0), "atom_id");
    r.type_id = parse_long(f[1], line_no, col(1), "type_id");
    r.species = std::string(f[2]);
    r.seq_name = std::string(f[3]);
    if (r.species.empty() || r.seq_name.empty()) throw ParseError("empty species or seq_name", line_no, col(2));
    r.start = parse_long(f[4], line_no, col(4), "start");
    r.end = parse_long(f[5], line_no, col(5), "end");
    if (r.start < 0 || r.end <= r.start) throw ParseError("atom interval must satisfy 0 <= start < end", line_no, col(4));
    if (f[6] == "+") {
      r.strand = Strand::forward;
    } else if (f[6] == "-") {
      r.strand = Strand::reverse;
    } else {
      throw ParseError("strand must be + or -", line_no, col(6));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_atoms_tsv(const std::vector<AtomRecord>& atoms) {
  std::ostringstream os;
  os << "#atom_id\ttype_id\tspecies\tseq_name\tstart\tend\tstrand\n";
  for (const auto& a : atoms) {
    os << a.atom_id << '\t' << a.type_id << '\t' << a.species << '\t' << a.seq_name << '\t' << a.start << '\t' << a.end
       << '\t' << strand_char(a.strand) << '\n';
  }
  return os.str();
}

std::vector<FastaRecord> parse_fasta(std::string_view text) {
  std::vector<FastaRecord> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '>') {
      std::string_view name = line.substr(1);
      auto ws = name.find_first_of(" \t");
      if (ws != std::string_view::npos) name = name.substr(0, ws);
      if (name.empty()) throw ParseError("FASTA record without a name", line_no, 2);
      out.push_back({std::string(name), {}});
      continue;
    }
    if (out.empty()) throw ParseError("sequence data before the first FASTA header", line_no, 1);
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (c == ' ' || c == '\t') continue;
      if (!std::isalpha(static_cast<unsigned char>(c)) && c != '-') {
        throw ParseError(std::string("invalid sequence character '") + c + "'", line_no, static_cast<int>(i) + 1);
      }
      out.back().sequence.push_back(c);
    }
  }
  return out;
}

std::string format_fasta(const std::vector<FastaRecord>& records, int width) {
  std::string out;
  for (const auto& r : records) {
    out += '>' + r.name + '\n';
    for (std::size_t i = 0; i < r.sequence.size(); i += static_cast<std::size_t>(width)) {
      out += r.sequence.substr(i, static_cast<std::size_t>(width));
      out += '\n';
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace duphist

#include "cdcnet/nas/genotype.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cdcnet {

std::string sharing_name(Sharing s) { return s == Sharing::shared_cells ? "shared_cells" : "varied_cells"; }

Sharing parse_sharing(const std::string& s) {
  if (s == "shared_cells") return Sharing::shared_cells;
  if (s == "varied_cells") return Sharing::varied_cells;
  throw ConfigError("unknown sharing mode '" + s + "' (expected varied_cells or shared_cells)");
}

std::size_t edge_count(std::size_t nodes) { return nodes * (nodes + 1) / 2; }

std::size_t edge_index(std::size_t source, std::size_t target) {
  if (target == 0 || source >= target) throw ConfigError("edge must run from an earlier node to an intermediate node");
  return (target - 1) * target / 2 + source;
}

void Genotype::validate() const {
  if (cells.empty()) throw ConfigError("genotype has no cells");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const CellGenotype& c = cells[k];
    const std::string where = "genotype cell " + std::to_string(k + 1);
    if (c.nodes.empty()) throw ConfigError(where + " has no intermediate nodes");
    for (std::size_t j = 1; j <= c.nodes.size(); ++j) {
      const NodeChoice& n = c.nodes[j - 1];
      if (n.source >= j) throw ConfigError(where + ": node B" + std::to_string(j) + " reads from a later node");
      if (OpSpec::parse(n.op).kind == OpKind::none) {
        throw ConfigError(where + ": node B" + std::to_string(j) + " uses the none op");
      }
    }
    if (c.output < 1 || c.output > c.nodes.size()) throw ConfigError(where + ": output must be one of B1..Bn");
    if (c.nodes.size() != cells.front().nodes.size()) throw ConfigError(where + ": node count differs from cell 1");
  }
  if (sharing == Sharing::shared_cells) {
    for (const auto& c : cells)
      if (!(c == cells.front())) throw ConfigError("shared_cells genotype has differing cells");
  }
}

std::string format_genotype(const Genotype& g) {
  std::ostringstream os;
  os << "sharing " << sharing_name(g.sharing) << "\n";
  os << "node_attention " << (g.node_attention ? "on" : "off") << "\n";
  for (std::size_t k = 0; k < g.cells.size(); ++k) {
    os << "cell " << (k + 1) << "\n";
    const CellGenotype& c = g.cells[k];
    for (std::size_t j = 1; j <= c.nodes.size(); ++j) {
      const NodeChoice& n = c.nodes[j - 1];
      os << "node B" << j << " <- " << (n.source == 0 ? std::string("input") : "B" + std::to_string(n.source)) << " "
         << n.op << "\n";
    }
    os << "output <- B" << c.output << "\n";
  }
  return os.str();
}

namespace {

std::size_t parse_node_ref(const std::string& tok, bool allow_input, std::size_t line) {
  if (allow_input && tok == "input") return 0;
  std::size_t v = 0;
  if (tok.size() >= 2 && tok[0] == 'B') {
    auto res = std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
    if (res.ec == std::errc() && res.ptr == tok.data() + tok.size() && v >= 1 && tok[1] != '0') return v;
  }
  throw DataError("genotype line " + std::to_string(line) + ": bad node reference '" + tok + "'");
}

}  // namespace

Genotype parse_genotype(const std::string& text) {
  Genotype g;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  bool seen_sharing = false, seen_attention = false;
  CellGenotype* cell = nullptr;
  auto fail = [&](const std::string& why) -> DataError {
    return DataError("genotype line " + std::to_string(line) + ": " + why);
  };
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::vector<std::string> t;
    for (std::string w; ls >> w;) t.push_back(w);
    if (t.empty()) continue;
    if (t[0] == "sharing" && t.size() == 2) {
      try {
        g.sharing = parse_sharing(t[1]);
      } catch (const ConfigError& e) {
        throw fail(e.what());
      }
      seen_sharing = true;
    } else if (t[0] == "node_attention" && t.size() == 2 && (t[1] == "on" || t[1] == "off")) {
      g.node_attention = t[1] == "on";
      seen_attention = true;
    } else if (t[0] == "cell" && t.size() == 2) {
      if (t[1] != std::to_string(g.cells.size() + 1)) throw fail("cells must be numbered 1, 2, ... in order");
      g.cells.emplace_back();
      cell = &g.cells.back();
    } else if (t[0] == "node" && t.size() == 5 && t[2] == "<-") {
      if (!cell) throw fail("node line before any cell line");
      if (parse_node_ref(t[1], false, line) != cell->nodes.size() + 1) throw fail("nodes must be listed B1, B2, ...");
      cell->nodes.push_back({parse_node_ref(t[3], true, line), t[4]});
    } else if (t[0] == "output" && t.size() == 3 && t[1] == "<-") {
      if (!cell) throw fail("output line before any cell line");
      cell->output = parse_node_ref(t[2], false, line);
    } else {
      throw fail("unrecognised line '" + raw + "'");
    }
  }
  if (!seen_sharing || !seen_attention) throw DataError("genotype: missing sharing or node_attention header");
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  return g;
}

void write_genotype(const Genotype& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << format_genotype(g);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Genotype read_genotype(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_genotype(ss.str());
}

}  // namespace cdcnet

#pragma once

#include <string>
#include <vector>

#include "cdcnet/nas/ops.hpp"

namespace cdcnet {

enum class Sharing { varied_cells, shared_cells };

std::string sharing_name(Sharing s);
Sharing parse_sharing(const std::string& s);

/// Edges of a cell with `nodes` intermediate nodes, ordered by target node
/// then source: (0,1), (0,2), (1,2), (0,3), ... Node 0 is the cell input.
std::size_t edge_count(std::size_t nodes);
std::size_t edge_index(std::size_t source, std::size_t target);

struct NodeChoice {
  std::size_t source = 0;  // 0 = cell input, j = intermediate node Bj
  std::string op;
  bool operator==(const NodeChoice&) const = default;
};

struct CellGenotype {
  std::vector<NodeChoice> nodes;  // nodes[j-1] feeds Bj
  std::size_t output = 0;         // 1-based intermediate node
  bool operator==(const CellGenotype&) const = default;
};

struct Genotype {
  Sharing sharing = Sharing::varied_cells;
  bool node_attention = true;
  std::vector<CellGenotype> cells;

  /// One incoming edge per node from an earlier node, no `none`, output in
  /// B1..Bn, every op name parseable. Throws ConfigError.
  void validate() const;
  bool operator==(const Genotype&) const = default;
};

/// Line-oriented text form:
///   sharing <varied_cells|shared_cells>
///   node_attention <on|off>
///   cell <k>
///   node B<i> <- <input|B<j>> <op>
///   output <- B<j>
std::string format_genotype(const Genotype& g);
/// Throws DataError naming the offending line.
Genotype parse_genotype(const std::string& text);

void write_genotype(const Genotype& g, const std::string& path);
Genotype read_genotype(const std::string& path);

}  // namespace cdcnet

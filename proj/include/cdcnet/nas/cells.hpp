#pragma once

#include "cdcnet/nas/arch.hpp"
#include "cdcnet/nets/backbone.hpp"

namespace cdcnet {

/// Module name of op `op` on edge source->target of cell k (0-based):
/// "cell<k+1>.e<source>_<target>.<op>". Shared by the supernet and the
/// discrete network so trained weights transfer by name.
std::string edge_module_name(std::size_t cell, std::size_t source, std::size_t target, const std::string& op);

/// Continuous relaxation: node j = sum_{i<j} sum_o eta_o(i,j) o(x_i); the cell
/// output is sum_j beta_j x_j with node attention, else the last node.
template <class T>
class MixedCell final : public CellModule<T> {
 public:
  MixedCell(std::size_t index, std::size_t channels, const OpCatalog& catalog, CellArch<T>& arch, bool node_attention);

  Var<T> forward(Tape<T>& tape, Var<T> x, Mode mode) override;
  void collect(StateDict<T>& out) override;
  void init(Rng& rng) override;

 private:
  std::size_t nodes_;
  bool node_attention_;
  CellArch<T>& arch_;
  std::vector<std::vector<std::unique_ptr<CandidateOp<T>>>> edges_;  // [edge][op]
};

/// One chosen (source, op) per node. Only ancestors of the output node run.
template <class T>
class DiscreteCell final : public CellModule<T> {
 public:
  DiscreteCell(std::size_t index, std::size_t channels, const CellGenotype& genotype);

  Var<T> forward(Tape<T>& tape, Var<T> x, Mode mode) override;
  void collect(StateDict<T>& out) override;
  void init(Rng& rng) override;

 private:
  CellGenotype genotype_;
  std::vector<bool> needed_;  // [node], node 0 = input
  std::vector<std::unique_ptr<CandidateOp<T>>> ops_;  // [node-1]
};

extern template class MixedCell<float>;
extern template class MixedCell<double>;
extern template class DiscreteCell<float>;
extern template class DiscreteCell<double>;

}  // namespace cdcnet

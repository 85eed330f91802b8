#include "cdcnet/nas/cells.hpp"

namespace cdcnet {

std::string edge_module_name(std::size_t cell, std::size_t source, std::size_t target, const std::string& op) {
  return "cell" + std::to_string(cell + 1) + ".e" + std::to_string(source) + "_" + std::to_string(target) + "." + op;
}

namespace {

template <class T>
Var<T> checked_softmax(Var<T> logits, const std::string& name) {
  Var<T> w = softmax(logits);
  if (!all_finite(w.value())) throw NumericError("architecture weights '" + name + "' are not finite");
  return w;
}

}  // namespace

template <class T>
MixedCell<T>::MixedCell(std::size_t index, std::size_t channels, const OpCatalog& catalog, CellArch<T>& arch,
                        bool node_attention)
    : nodes_(arch.beta.value.numel()), node_attention_(node_attention), arch_(arch) {
  validate_catalog(catalog, false);
  if (arch.alpha.size() != edge_count(nodes_)) throw ConfigError("mixed cell: edge count does not match alpha");
  if (arch.alpha.front().value.numel() != catalog.size()) throw ConfigError("mixed cell: alpha width != catalog size");
  edges_.resize(edge_count(nodes_));
  for (std::size_t j = 1; j <= nodes_; ++j)
    for (std::size_t i = 0; i < j; ++i)
      for (const OpSpec& op : catalog) {
        edges_[edge_index(i, j)].push_back(
            std::make_unique<CandidateOp<T>>(edge_module_name(index, i, j, op.name()), op, channels));
      }
}

template <class T>
Var<T> MixedCell<T>::forward(Tape<T>& tape, Var<T> x, Mode mode) {
  std::vector<Var<T>> states{x};
  for (std::size_t j = 1; j <= nodes_; ++j) {
    std::vector<Var<T>> terms;
    for (std::size_t i = 0; i < j; ++i) {
      const std::size_t e = edge_index(i, j);
      Parameter<T>& alpha = arch_.alpha[e];
      Var<T> eta = checked_softmax(tape.watch(alpha), alpha.name);
      for (std::size_t o = 0; o < edges_[e].size(); ++o) {
        if (auto y = edges_[e][o]->forward(tape, states[i], mode)) terms.push_back(scale_by(*y, element(eta, o)));
      }
    }
    states.push_back(terms.empty() ? tape.constant(Tensor<T>(x.shape())) : add_n(terms));
  }
  if (!node_attention_) return states.back();
  Var<T> beta = checked_softmax(tape.watch(arch_.beta), arch_.beta.name);
  std::vector<Var<T>> weighted;
  for (std::size_t j = 1; j <= nodes_; ++j) weighted.push_back(scale_by(states[j], element(beta, j - 1)));
  return add_n(weighted);
}

template <class T>
void MixedCell<T>::collect(StateDict<T>& out) {
  for (auto& edge : edges_)
    for (auto& op : edge) op->collect(out);
}

template <class T>
void MixedCell<T>::init(Rng& rng) {
  for (auto& edge : edges_)
    for (auto& op : edge) op->init(rng);
}

template <class T>
DiscreteCell<T>::DiscreteCell(std::size_t index, std::size_t channels, const CellGenotype& genotype)
    : genotype_(genotype) {
  const std::size_t n = genotype.nodes.size();
  if (genotype.output < 1 || genotype.output > n) throw ConfigError("discrete cell: output node out of range");
  needed_.assign(n + 1, false);
  needed_[genotype.output] = true;
  for (std::size_t j = n; j >= 1; --j)
    if (needed_[j]) needed_[genotype.nodes[j - 1].source] = true;
  for (std::size_t j = 1; j <= n; ++j) {
    const NodeChoice& c = genotype.nodes[j - 1];
    if (c.source >= j) throw ConfigError("discrete cell: node reads from a later node");
    const OpSpec spec = OpSpec::parse(c.op);
    if (spec.kind == OpKind::none) throw ConfigError("discrete cell: none is not a valid choice");
    ops_.push_back(std::make_unique<CandidateOp<T>>(edge_module_name(index, c.source, j, c.op), spec, channels));
  }
}

template <class T>
Var<T> DiscreteCell<T>::forward(Tape<T>& tape, Var<T> x, Mode mode) {
  std::vector<Var<T>> states(ops_.size() + 1);
  states[0] = x;
  for (std::size_t j = 1; j <= ops_.size(); ++j) {
    if (!needed_[j]) continue;
    states[j] = *ops_[j - 1]->forward(tape, states[genotype_.nodes[j - 1].source], mode);
  }
  return states[genotype_.output];
}

template <class T>
void DiscreteCell<T>::collect(StateDict<T>& out) {
  for (std::size_t j = 1; j <= ops_.size(); ++j)
    if (needed_[j]) ops_[j - 1]->collect(out);
}

template <class T>
void DiscreteCell<T>::init(Rng& rng) {
  for (auto& op : ops_) op->init(rng);
}

template class MixedCell<float>;
template class MixedCell<double>;
template class DiscreteCell<float>;
template class DiscreteCell<double>;

}  // namespace cdcnet

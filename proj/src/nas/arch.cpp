#include "cdcnet/nas/arch.hpp"

#include <algorithm>
#include <cmath>

namespace cdcnet {

template <class T>
ArchParams<T>::ArchParams(std::size_t ops, std::size_t nodes, Sharing sharing, std::size_t cells)
    : ops_(ops), nodes_(nodes), cells_(cells), sharing_(sharing) {
  if (ops == 0 || nodes == 0 || cells == 0) throw ConfigError("architecture parameters need ops, nodes and cells");
  const std::size_t sets = sharing == Sharing::shared_cells ? 1 : cells;
  for (std::size_t k = 0; k < sets; ++k) {
    const std::string prefix =
        sharing == Sharing::shared_cells ? std::string("arch.shared") : "arch.cell" + std::to_string(k + 1);
    CellArch<T> c;
    for (std::size_t e = 0; e < edge_count(nodes); ++e) {
      c.alpha.push_back({prefix + ".alpha." + std::to_string(e), Tensor<T>(Shape{1, 1, 1, ops}), true});
    }
    c.beta = {prefix + ".beta", Tensor<T>(Shape{1, 1, 1, nodes}), true};
    storage_.push_back(std::move(c));
  }
}

template <class T>
CellArch<T>& ArchParams<T>::cell(std::size_t k) {
  if (k >= cells_) throw ConfigError("cell index out of range");
  return storage_[sharing_ == Sharing::shared_cells ? 0 : k];
}

template <class T>
const CellArch<T>& ArchParams<T>::cell(std::size_t k) const {
  if (k >= cells_) throw ConfigError("cell index out of range");
  return storage_[sharing_ == Sharing::shared_cells ? 0 : k];
}

template <class T>
std::vector<Parameter<T>*> ArchParams<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& c : storage_) {
    for (auto& a : c.alpha) out.push_back(&a);
    out.push_back(&c.beta);
  }
  return out;
}

std::vector<double> softmax_of(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += out[i] = std::exp(logits[i] - m);
  for (auto& v : out) v /= z;
  return out;
}

namespace {

template <class T>
std::vector<double> as_doubles(const Tensor<T>& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

}  // namespace

template <class T>
std::vector<double> ArchParams<T>::eta(std::size_t k, std::size_t edge) const {
  return softmax_of(as_doubles(cell(k).alpha.at(edge).value));
}

template <class T>
std::vector<double> ArchParams<T>::beta(std::size_t k) const {
  return softmax_of(as_doubles(cell(k).beta.value));
}

template <class T>
void ArchParams<T>::check_finite() const {
  for (const auto& c : storage_) {
    for (const auto& a : c.alpha)
      if (!all_finite(a.value)) throw NumericError("architecture logits '" + a.name + "' are not finite");
    if (!all_finite(c.beta.value)) throw NumericError("architecture logits '" + c.beta.name + "' are not finite");
  }
}

template <class T>
void ArchParams<T>::randomize(Rng& rng, double scale) {
  for (auto* p : parameters())
    for (auto& v : p->value.data()) v = static_cast<T>(rng.normal() * scale);
}

template <class T>
Genotype derive_genotype(const ArchParams<T>& arch, const OpCatalog& catalog, bool node_attention) {
  if (catalog.size() != arch.ops()) throw ConfigError("catalog size does not match the architecture parameters");
  arch.check_finite();
  Genotype g;
  g.sharing = arch.sharing();
  g.node_attention = node_attention;
  for (std::size_t k = 0; k < arch.cells(); ++k) {
    CellGenotype cell;
    for (std::size_t j = 1; j <= arch.nodes(); ++j) {
      double best = -1;
      NodeChoice choice;
      for (std::size_t i = 0; i < j; ++i) {
        const std::vector<double> eta = arch.eta(k, edge_index(i, j));
        for (std::size_t o = 0; o < catalog.size(); ++o) {
          if (catalog[o].kind == OpKind::none) continue;
          if (eta[o] > best) {
            best = eta[o];
            choice = {i, catalog[o].name()};
          }
        }
      }
      if (best < 0) throw ConfigError("catalog has no operation other than none");
      cell.nodes.push_back(choice);
    }
    cell.output = arch.nodes();
    if (node_attention) {
      const std::vector<double> b = arch.beta(k);
      cell.output = static_cast<std::size_t>(std::max_element(b.begin(), b.end()) - b.begin()) + 1;
    }
    g.cells.push_back(std::move(cell));
  }
  return g;
}

template <class T>
void concentrate(ArchParams<T>& arch, const Genotype& g, const OpCatalog& catalog, double magnitude) {
  g.validate();
  if (g.cells.size() != arch.cells()) throw ConfigError("genotype cell count does not match");
  const auto none = std::find_if(catalog.begin(), catalog.end(), [](const OpSpec& o) { return o.kind == OpKind::none; });
  if (none == catalog.end()) throw ConfigError("concentrating needs a none op in the catalog");
  const std::size_t none_index = static_cast<std::size_t>(none - catalog.begin());
  for (std::size_t k = 0; k < arch.cells(); ++k) {
    const CellGenotype& cg = g.cells[k];
    if (cg.nodes.size() != arch.nodes()) throw ConfigError("genotype node count does not match");
    CellArch<T>& c = arch.cell(k);
    for (auto& a : c.alpha) {
      a.value = Tensor<T>(a.value.shape(), T(0));
      a.value[none_index] = static_cast<T>(magnitude);
    }
    for (std::size_t j = 1; j <= cg.nodes.size(); ++j) {
      Tensor<T>& a = c.alpha[edge_index(cg.nodes[j - 1].source, j)].value;
      a[none_index] = T(0);
      a[catalog_index(catalog, cg.nodes[j - 1].op)] = static_cast<T>(magnitude);
    }
    c.beta.value = Tensor<T>(c.beta.value.shape(), T(0));
    c.beta.value[cg.output - 1] = static_cast<T>(magnitude);
  }
}

template class ArchParams<float>;
template class ArchParams<double>;
template Genotype derive_genotype(const ArchParams<float>&, const OpCatalog&, bool);
template Genotype derive_genotype(const ArchParams<double>&, const OpCatalog&, bool);
template void concentrate(ArchParams<float>&, const Genotype&, const OpCatalog&, double);
template void concentrate(ArchParams<double>&, const Genotype&, const OpCatalog&, double);

}  // namespace cdcnet

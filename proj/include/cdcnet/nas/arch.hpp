#pragma once

#include <deque>
#include <string>
#include <vector>

#include "cdcnet/nas/genotype.hpp"

namespace cdcnet {

/// Logits of one cell: alpha per edge ([1,1,1,ops]) and beta' over the
/// intermediate nodes ([1,1,1,nodes]).
template <class T>
struct CellArch {
  std::vector<Parameter<T>> alpha;
  Parameter<T> beta;
};

/// Architecture parameters of the three cells. In shared_cells mode a single
/// CellArch is aliased by every cell.
template <class T>
class ArchParams {
 public:
  ArchParams(std::size_t ops, std::size_t nodes = 4, Sharing sharing = Sharing::varied_cells, std::size_t cells = 3);
  ArchParams(const ArchParams&) = delete;
  ArchParams& operator=(const ArchParams&) = delete;

  std::size_t ops() const { return ops_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t cells() const { return cells_; }
  Sharing sharing() const { return sharing_; }

  CellArch<T>& cell(std::size_t k);
  const CellArch<T>& cell(std::size_t k) const;
  /// Distinct parameters (one set when shared).
  std::vector<Parameter<T>*> parameters();

  /// softmax(alpha) of one edge / softmax(beta') of one cell, in double.
  std::vector<double> eta(std::size_t cell, std::size_t edge) const;
  std::vector<double> beta(std::size_t cell) const;

  /// Throws NumericError if any logit is non-finite.
  void check_finite() const;
  void randomize(Rng& rng, double scale);

 private:
  std::size_t ops_, nodes_, cells_;
  Sharing sharing_;
  std::deque<CellArch<T>> storage_;
};

std::vector<double> softmax_of(const std::vector<double>& logits);

/// Per node: the incoming edge whose best non-`none` weight is largest, and
/// that op; output = argmax beta with node attention, else the last node.
/// Ties go to the lowest index.
template <class T>
Genotype derive_genotype(const ArchParams<T>& arch, const OpCatalog& catalog, bool node_attention);

/// Logits that put (numerically) all mass on the genotype: +magnitude on the
/// chosen op of chosen edges, on `none` elsewhere, and on the output node.
template <class T>
void concentrate(ArchParams<T>& arch, const Genotype& g, const OpCatalog& catalog, double magnitude = 30.0);

extern template class ArchParams<float>;
extern template class ArchParams<double>;

}  // namespace cdcnet

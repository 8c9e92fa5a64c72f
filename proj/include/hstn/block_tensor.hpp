#pragma once

#include <complex>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "hstn/charge.hpp"

namespace hstn {

using cplx = std::complex<double>;

// Key of a stored block: the chosen sector position on every index.
using BlockKey = std::vector<int>;

// Block-sparse complex tensor with Abelian charge conservation.
//
// A block keyed by (k_0, ..., k_{r-1}) holds the dense slice where index i
// sits in its sector k_i; it is stored row-major (index 0 slowest) with
// shape given by the sector degeneracies. Only charge-conserving blocks
// (net flux zero: incoming charges balance outgoing ones) may be stored;
// absent blocks are exactly zero.
class BlockTensor {
 public:
  BlockTensor() = default;
  BlockTensor(Sym sym, std::vector<ChargeIndex> indices);

  Sym sym() const { return sym_; }
  int rank() const { return static_cast<int>(indices_.size()); }
  const std::vector<ChargeIndex>& indices() const { return indices_; }
  const ChargeIndex& index(int i) const { return indices_[i]; }

  const std::map<BlockKey, std::vector<cplx>>& blocks() const { return blocks_; }
  bool empty() const { return blocks_.empty(); }

  // Net charge flux of a sector assignment (In counts +, Out counts -).
  Charge key_flux(const BlockKey& key) const;
  bool key_conserving(const BlockKey& key) const;

  std::vector<int> block_shape(const BlockKey& key) const;

  // Inserts a zero block if absent. Throws StructuralError on a
  // non-conserving or malformed key.
  std::vector<cplx>& block(const BlockKey& key);
  const std::vector<cplx>* find_block(const BlockKey& key) const;

  // Drops blocks whose max-norm is below tol (structural zeros).
  void prune(double tol = 0.0);

  BlockTensor conj() const;             // conjugate values, reverse directions
  BlockTensor permuted(const std::vector<int>& order) const;
  BlockTensor& operator+=(const BlockTensor& other);
  BlockTensor& operator*=(cplx factor);
  double norm() const;                  // Frobenius
  double max_abs() const;

  // Dense embedding (row-major, index 0 slowest); sectors laid out in
  // declaration order. For oracle comparisons and small-L checks.
  std::vector<cplx> to_dense() const;
  std::vector<int> dense_shape() const;

  // Inverse of to_dense: scatter a dense array into conserving blocks.
  // Off-block entries larger than tol raise StructuralError.
  static BlockTensor from_dense(Sym sym, std::vector<ChargeIndex> indices,
                                const std::vector<cplx>& data, double tol = 1e-13);

  void check_conservation() const;  // asserts the selection rule per block

 private:
  Sym sym_ = Sym::Trivial;
  std::vector<ChargeIndex> indices_;
  std::map<BlockKey, std::vector<cplx>> blocks_;
};

// Pairwise tensor contraction over charge-conserving blocks. pairs lists
// (index of a, index of b); paired indices must span the same sectors with
// opposite direction. Result indices: a's free legs then b's free legs.
BlockTensor contract(const BlockTensor& a, const BlockTensor& b,
                     const std::vector<std::pair<int, int>>& pairs);

// Extracts the value of a rank-0 (fully contracted) tensor.
cplx scalar(const BlockTensor& t);

struct SvdResult {
  BlockTensor left;    // isometry from the left leg group
  BlockTensor right;   // isometry from the right leg group
  // Singular values grouped by bond charge, descending within each group;
  // group order matches the bond index sectors of left/right.
  std::vector<std::pair<Charge, std::vector<double>>> singular_values;
  double truncation_weight = 0.0;  // discarded squared mass / total squared mass
};

// Truncated SVD across the bipartition (first n_left legs | rest).
// Keeps at most max_dim singular values globally across charge blocks and
// drops values whose relative squared weight falls below cutoff. Ties at
// the cut keep the lowest charge first, then earlier block order.
SvdResult svd_truncate(const BlockTensor& t, int n_left, int max_dim, double cutoff);

// Multiplies singular values (as returned by svd_truncate) into the given
// leg of a factor tensor; leg must be the bond index of that factor.
BlockTensor scale_bond(const BlockTensor& t, int leg,
                       const std::vector<std::pair<Charge, std::vector<double>>>& sv,
                       bool invert = false);

}  // namespace hstn

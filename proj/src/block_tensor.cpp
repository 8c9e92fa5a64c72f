#include "hstn/block_tensor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace hstn {

namespace {

using MatC = Eigen::MatrixXcd;
using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t shape_size(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

// Row-major permutation: result leg i is source leg order[i].
std::vector<cplx> permute_dense(const std::vector<cplx>& data, const std::vector<int>& dims,
                                const std::vector<int>& order) {
  const int r = static_cast<int>(dims.size());
  std::vector<int> new_dims(r);
  for (int i = 0; i < r; ++i) new_dims[i] = dims[order[i]];

  std::vector<std::size_t> src_stride(r, 1);
  for (int i = r - 2; i >= 0; --i)
    src_stride[i] = src_stride[i + 1] * static_cast<std::size_t>(dims[i + 1]);

  // Stride of the source leg feeding each destination leg.
  std::vector<std::size_t> step(r);
  for (int i = 0; i < r; ++i) step[i] = src_stride[order[i]];

  std::vector<cplx> out(data.size());
  std::vector<int> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < out.size(); ++dst) {
    out[dst] = data[src];
    for (int i = r - 1; i >= 0; --i) {
      if (++idx[i] < new_dims[i]) {
        src += step[i];
        break;
      }
      idx[i] = 0;
      src -= step[i] * static_cast<std::size_t>(new_dims[i] - 1);
    }
  }
  return out;
}

}  // namespace

BlockTensor::BlockTensor(Sym sym, std::vector<ChargeIndex> indices)
    : sym_(sym), indices_(std::move(indices)) {}

Charge BlockTensor::key_flux(const BlockKey& key) const {
  Charge f{};
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const Charge q = indices_[i].sectors[key[i]].charge;
    f = charge_add(sym_, f, indices_[i].dir == Dir::In ? q : charge_neg(sym_, q));
  }
  return f;
}

bool BlockTensor::key_conserving(const BlockKey& key) const {
  return key_flux(key) == Charge{};
}

std::vector<int> BlockTensor::block_shape(const BlockKey& key) const {
  std::vector<int> shape(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) shape[i] = indices_[i].sectors[key[i]].dim;
  return shape;
}

std::vector<cplx>& BlockTensor::block(const BlockKey& key) {
  if (key.size() != indices_.size()) throw StructuralError("block key rank mismatch");
  for (std::size_t i = 0; i < key.size(); ++i)
    if (key[i] < 0 || key[i] >= static_cast<int>(indices_[i].sectors.size()))
      throw StructuralError("block key sector out of range");
  if (!key_conserving(key)) throw StructuralError("block key violates charge conservation");
  auto it = blocks_.find(key);
  if (it == blocks_.end())
    it = blocks_.emplace(key, std::vector<cplx>(shape_size(block_shape(key)))).first;
  return it->second;
}

const std::vector<cplx>* BlockTensor::find_block(const BlockKey& key) const {
  auto it = blocks_.find(key);
  return it == blocks_.end() ? nullptr : &it->second;
}

void BlockTensor::prune(double tol) {
  for (auto it = blocks_.begin(); it != blocks_.end();) {
    double mx = 0.0;
    for (const cplx& z : it->second) mx = std::max(mx, std::abs(z));
    if (mx <= tol)
      it = blocks_.erase(it);
    else
      ++it;
  }
}

BlockTensor BlockTensor::conj() const {
  std::vector<ChargeIndex> rev;
  rev.reserve(indices_.size());
  for (const auto& ix : indices_) rev.push_back(ix.reversed());
  BlockTensor out(sym_, std::move(rev));
  for (const auto& [key, data] : blocks_) {
    std::vector<cplx> c(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) c[i] = std::conj(data[i]);
    out.blocks_.emplace(key, std::move(c));
  }
  return out;
}

BlockTensor BlockTensor::permuted(const std::vector<int>& order) const {
  if (order.size() != indices_.size()) throw StructuralError("permutation rank mismatch");
  std::vector<ChargeIndex> nix(indices_.size());
  for (std::size_t i = 0; i < order.size(); ++i) nix[i] = indices_[order[i]];
  BlockTensor out(sym_, std::move(nix));
  for (const auto& [key, data] : blocks_) {
    BlockKey nkey(key.size());
    for (std::size_t i = 0; i < order.size(); ++i) nkey[i] = key[order[i]];
    out.blocks_.emplace(std::move(nkey), permute_dense(data, block_shape(key), order));
  }
  return out;
}

BlockTensor& BlockTensor::operator+=(const BlockTensor& other) {
  if (sym_ != other.sym_ || indices_.size() != other.indices_.size())
    throw StructuralError("tensor addition: incompatible tensors");
  for (std::size_t i = 0; i < indices_.size(); ++i)
    if (!indices_[i].same_space(other.indices_[i]) || indices_[i].dir != other.indices_[i].dir)
      throw StructuralError("tensor addition: index mismatch");
  for (const auto& [key, data] : other.blocks_) {
    auto& mine = block(key);
    for (std::size_t i = 0; i < data.size(); ++i) mine[i] += data[i];
  }
  return *this;
}

BlockTensor& BlockTensor::operator*=(cplx factor) {
  for (auto& [key, data] : blocks_)
    for (cplx& z : data) z *= factor;
  return *this;
}

double BlockTensor::norm() const {
  double s = 0.0;
  for (const auto& [key, data] : blocks_)
    for (const cplx& z : data) s += std::norm(z);
  return std::sqrt(s);
}

double BlockTensor::max_abs() const {
  double mx = 0.0;
  for (const auto& [key, data] : blocks_)
    for (const cplx& z : data) mx = std::max(mx, std::abs(z));
  return mx;
}

std::vector<int> BlockTensor::dense_shape() const {
  std::vector<int> shape(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) shape[i] = indices_[i].total_dim();
  return shape;
}

std::vector<cplx> BlockTensor::to_dense() const {
  const auto shape = dense_shape();
  const int r = rank();
  std::vector<std::size_t> stride(r, 1);
  for (int i = r - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(shape[i + 1]);
  std::vector<cplx> out(shape_size(shape));

  for (const auto& [key, data] : blocks_) {
    const auto bshape = block_shape(key);
    std::vector<std::size_t> boff(r);
    for (int i = 0; i < r; ++i) boff[i] = static_cast<std::size_t>(indices_[i].sector_offset(key[i]));
    std::vector<int> idx(r, 0);
    for (std::size_t p = 0; p < data.size(); ++p) {
      std::size_t q = 0;
      for (int i = 0; i < r; ++i) q += (boff[i] + static_cast<std::size_t>(idx[i])) * stride[i];
      out[q] = data[p];
      for (int i = r - 1; i >= 0; --i) {
        if (++idx[i] < bshape[i]) break;
        idx[i] = 0;
      }
    }
  }
  return out;
}

BlockTensor BlockTensor::from_dense(Sym sym, std::vector<ChargeIndex> indices,
                                    const std::vector<cplx>& data, double tol) {
  BlockTensor out(sym, std::move(indices));
  const int r = out.rank();
  const auto shape = out.dense_shape();
  if (data.size() != shape_size(shape)) throw StructuralError("from_dense: size mismatch");
  std::vector<std::size_t> stride(r, 1);
  for (int i = r - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(shape[i + 1]);

  double mx = 0.0;
  for (const cplx& z : data) mx = std::max(mx, std::abs(z));

  // Enumerate every sector assignment; conserving keys absorb their slice,
  // anything left above tolerance is a symmetry violation.
  std::vector<int> nsec(r);
  for (int i = 0; i < r; ++i) nsec[i] = static_cast<int>(out.indices_[i].sectors.size());
  BlockKey key(r, 0);
  while (true) {
    const bool ok = out.key_conserving(key);
    const auto bshape = out.block_shape(key);
    std::vector<std::size_t> boff(r);
    for (int i = 0; i < r; ++i) boff[i] = static_cast<std::size_t>(out.indices_[i].sector_offset(key[i]));
    std::vector<int> idx(r, 0);
    const std::size_t bsize = shape_size(bshape);
    std::vector<cplx> bdata(ok ? bsize : 0);
    double bmax = 0.0;
    for (std::size_t p = 0; p < bsize; ++p) {
      std::size_t q = 0;
      for (int i = 0; i < r; ++i) q += (boff[i] + static_cast<std::size_t>(idx[i])) * stride[i];
      if (ok)
        bdata[p] = data[q];
      else
        bmax = std::max(bmax, std::abs(data[q]));
      for (int i = r - 1; i >= 0; --i) {
        if (++idx[i] < bshape[i]) break;
        idx[i] = 0;
      }
    }
    if (!ok && bmax > tol * (1.0 + mx))
      throw StructuralError("from_dense: dense data violates charge conservation");
    if (ok) {
      bool nonzero = false;
      for (const cplx& z : bdata)
        if (z != cplx{0.0, 0.0}) { nonzero = true; break; }
      if (nonzero) out.blocks_.emplace(key, std::move(bdata));
    }
    int i = r - 1;
    for (; i >= 0; --i) {
      if (++key[i] < nsec[i]) break;
      key[i] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

void BlockTensor::check_conservation() const {
  for (const auto& [key, data] : blocks_) {
    if (!key_conserving(key)) throw StructuralError("stored block violates charge conservation");
    if (data.size() != shape_size(block_shape(key)))
      throw StructuralError("stored block shape mismatch");
  }
}

BlockTensor contract(const BlockTensor& a, const BlockTensor& b,
                     const std::vector<std::pair<int, int>>& pairs) {
  if (a.sym() != b.sym()) throw StructuralError("contract: symmetry group mismatch");
  std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
  for (const auto& [ia, ib] : pairs) {
    if (ia < 0 || ia >= a.rank() || ib < 0 || ib >= b.rank())
      throw StructuralError("contract: pair index out of range");
    if (a_used[ia] || b_used[ib]) throw StructuralError("contract: repeated pair index");
    a_used[ia] = true;
    b_used[ib] = true;
    if (!a.index(ia).same_space(b.index(ib)))
      throw StructuralError("contract: paired indices span different sectors");
    if (a.index(ia).dir == b.index(ib).dir)
      throw StructuralError("contract: paired indices must have opposite direction");
  }

  std::vector<int> a_free, b_free;
  for (int i = 0; i < a.rank(); ++i)
    if (!a_used[i]) a_free.push_back(i);
  for (int i = 0; i < b.rank(); ++i)
    if (!b_used[i]) b_free.push_back(i);

  std::vector<ChargeIndex> out_ix;
  out_ix.reserve(a_free.size() + b_free.size());
  for (int i : a_free) out_ix.push_back(a.index(i));
  for (int i : b_free) out_ix.push_back(b.index(i));
  BlockTensor out(a.sym(), std::move(out_ix));

  // Group a's blocks by the sector assignment on the contracted legs.
  std::map<std::vector<int>, std::vector<const BlockKey*>> by_contracted;
  for (const auto& [key, data] : a.blocks()) {
    std::vector<int> ck(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) ck[p] = key[pairs[p].first];
    by_contracted[std::move(ck)].push_back(&key);
  }

  // Permutations taking a to (free..., contracted...) and b to (contracted..., free...).
  std::vector<int> a_order = a_free;
  for (const auto& [ia, ib] : pairs) a_order.push_back(ia);
  std::vector<int> b_order;
  for (const auto& [ia, ib] : pairs) b_order.push_back(ib);
  for (int i : b_free) b_order.push_back(i);

  for (const auto& [bkey, bdata] : b.blocks()) {
    std::vector<int> ck(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) ck[p] = bkey[pairs[p].second];
    auto it = by_contracted.find(ck);
    if (it == by_contracted.end()) continue;

    const auto bshape = b.block_shape(bkey);
    std::size_t K = 1, Nf = 1;
    for (std::size_t p = 0; p < pairs.size(); ++p) K *= static_cast<std::size_t>(bshape[pairs[p].second]);
    for (int i : b_free) Nf *= static_cast<std::size_t>(bshape[i]);
    const auto b_perm = permute_dense(bdata, bshape, b_order);
    Eigen::Map<const RowMat> B(b_perm.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(Nf));

    for (const BlockKey* akeyp : it->second) {
      const BlockKey& akey = *akeyp;
      const auto* adata = a.find_block(akey);
      const auto ashape = a.block_shape(akey);
      std::size_t Mf = 1;
      for (int i : a_free) Mf *= static_cast<std::size_t>(ashape[i]);
      const auto a_perm = permute_dense(*adata, ashape, a_order);
      Eigen::Map<const RowMat> A(a_perm.data(), static_cast<Eigen::Index>(Mf), static_cast<Eigen::Index>(K));

      BlockKey okey;
      okey.reserve(a_free.size() + b_free.size());
      for (int i : a_free) okey.push_back(akey[i]);
      for (int i : b_free) okey.push_back(bkey[i]);
      auto& odata = out.block(okey);
      Eigen::Map<RowMat> C(odata.data(), static_cast<Eigen::Index>(Mf), static_cast<Eigen::Index>(Nf));
      C.noalias() += A * B;
    }
  }
  out.prune(0.0);
  return out;
}

cplx scalar(const BlockTensor& t) {
  if (t.rank() != 0) throw StructuralError("scalar: tensor has free indices");
  const auto* b = t.find_block({});
  return b ? (*b)[0] : cplx{0.0, 0.0};
}

SvdResult svd_truncate(const BlockTensor& t, int n_left, int max_dim, double cutoff) {
  const int r = t.rank();
  if (n_left < 1 || n_left >= r) throw StructuralError("svd_truncate: empty bipartition side");
  if (max_dim < 1) throw StructuralError("svd_truncate: max_dim must be >= 1");

  struct Group {
    std::vector<BlockKey> left_keys, right_keys;  // sorted, deduplicated
    std::vector<int> row_off, col_off;
    int rows = 0, cols = 0;
    MatC m, u, v;
    Eigen::VectorXd s;
  };
  std::map<Charge, Group> groups;

  auto left_flux = [&](const BlockKey& key) {
    Charge f{};
    for (int i = 0; i < n_left; ++i) {
      const Charge q = t.index(i).sectors[key[i]].charge;
      f = charge_add(t.sym(), f, t.index(i).dir == Dir::In ? q : charge_neg(t.sym(), q));
    }
    return f;
  };

  for (const auto& [key, data] : t.blocks()) {
    const Charge c = left_flux(key);
    auto& g = groups[c];
    g.left_keys.emplace_back(key.begin(), key.begin() + n_left);
    g.right_keys.emplace_back(key.begin() + n_left, key.end());
  }
  for (auto& [c, g] : groups) {
    auto uniq = [](std::vector<BlockKey>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(g.left_keys);
    uniq(g.right_keys);
    auto subdim = [&](const BlockKey& sub, int base) {
      int d = 1;
      for (std::size_t i = 0; i < sub.size(); ++i)
        d *= t.index(base + static_cast<int>(i)).sectors[sub[i]].dim;
      return d;
    };
    for (const auto& lk : g.left_keys) {
      g.row_off.push_back(g.rows);
      g.rows += subdim(lk, 0);
    }
    for (const auto& rk : g.right_keys) {
      g.col_off.push_back(g.cols);
      g.cols += subdim(rk, n_left);
    }
    g.m = MatC::Zero(g.rows, g.cols);
  }

  for (const auto& [key, data] : t.blocks()) {
    const Charge c = left_flux(key);
    auto& g = groups[c];
    BlockKey lk(key.begin(), key.begin() + n_left), rk(key.begin() + n_left, key.end());
    const int li = static_cast<int>(std::lower_bound(g.left_keys.begin(), g.left_keys.end(), lk) -
                                    g.left_keys.begin());
    const int ri = static_cast<int>(std::lower_bound(g.right_keys.begin(), g.right_keys.end(), rk) -
                                    g.right_keys.begin());
    const auto shape = t.block_shape(key);
    int ld = 1, rd = 1;
    for (int i = 0; i < n_left; ++i) ld *= shape[i];
    for (int i = n_left; i < r; ++i) rd *= shape[i];
    for (int i = 0; i < ld; ++i)
      for (int j = 0; j < rd; ++j)
        g.m(g.row_off[li] + i, g.col_off[ri] + j) = data[static_cast<std::size_t>(i) * rd + j];
  }

  // Per-charge SVD, then one global truncation over all charge blocks.
  struct Entry {
    double s;
    Charge c;
    int pos;
  };
  std::vector<Entry> all;
  double total2 = 0.0;
  for (auto& [c, g] : groups) {
    Eigen::BDCSVD<MatC> svd(g.m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    g.u = svd.matrixU();
    g.v = svd.matrixV();
    g.s = svd.singularValues();
    for (int i = 0; i < g.s.size(); ++i) {
      all.push_back({g.s(i), c, i});
      total2 += g.s(i) * g.s(i);
    }
  }
  if (total2 <= 0.0) throw DegenerateInputError("svd_truncate: all singular values are zero");

  std::stable_sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) {
    if (x.s != y.s) return x.s > y.s;
    if (!(x.c == y.c)) return x.c < y.c;
    return x.pos < y.pos;
  });

  std::map<Charge, int> kept;
  double kept2 = 0.0;
  int nkept = 0;
  for (const Entry& e : all) {
    if (nkept >= max_dim) break;
    if (nkept > 0 && e.s * e.s < cutoff * total2) break;
    ++kept[e.c];
    kept2 += e.s * e.s;
    ++nkept;
  }

  SvdResult res;
  res.truncation_weight = std::max(0.0, 1.0 - kept2 / total2);

  std::vector<Sector> bond_sectors;
  for (const auto& [c, k] : kept)
    if (k > 0) bond_sectors.push_back(Sector{c, k});

  std::vector<ChargeIndex> lix(t.indices().begin(), t.indices().begin() + n_left);
  lix.emplace_back(bond_sectors, Dir::Out);
  std::vector<ChargeIndex> rix;
  rix.emplace_back(bond_sectors, Dir::In);
  rix.insert(rix.end(), t.indices().begin() + n_left, t.indices().end());
  res.left = BlockTensor(t.sym(), std::move(lix));
  res.right = BlockTensor(t.sym(), std::move(rix));

  int bond_pos = 0;
  for (const auto& [c, k] : kept) {
    if (k == 0) continue;
    const auto& g = groups[c];
    res.singular_values.emplace_back(c, std::vector<double>(g.s.data(), g.s.data() + k));
    for (std::size_t li = 0; li < g.left_keys.size(); ++li) {
      BlockKey key = g.left_keys[li];
      key.push_back(bond_pos);
      const int ld = (li + 1 < g.left_keys.size() ? g.row_off[li + 1] : g.rows) - g.row_off[li];
      auto& data = res.left.block(key);
      for (int i = 0; i < ld; ++i)
        for (int j = 0; j < k; ++j) data[static_cast<std::size_t>(i) * k + j] = g.u(g.row_off[li] + i, j);
    }
    for (std::size_t ri = 0; ri < g.right_keys.size(); ++ri) {
      BlockKey key;
      key.push_back(bond_pos);
      key.insert(key.end(), g.right_keys[ri].begin(), g.right_keys[ri].end());
      const int rd = (ri + 1 < g.right_keys.size() ? g.col_off[ri + 1] : g.cols) - g.col_off[ri];
      auto& data = res.right.block(key);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < rd; ++j)
          data[static_cast<std::size_t>(i) * rd + j] = std::conj(g.v(g.col_off[ri] + j, i));
    }
    ++bond_pos;
  }
  return res;
}

BlockTensor scale_bond(const BlockTensor& t, int leg,
                       const std::vector<std::pair<Charge, std::vector<double>>>& sv,
                       bool invert) {
  const auto& ix = t.index(leg);
  if (ix.sectors.size() != sv.size()) throw StructuralError("scale_bond: sector count mismatch");
  for (std::size_t k = 0; k < sv.size(); ++k)
    if (!(ix.sectors[k].charge == sv[k].first) ||
        ix.sectors[k].dim != static_cast<int>(sv[k].second.size()))
      throw StructuralError("scale_bond: bond sectors do not match singular values");

  BlockTensor out = t;
  for (const auto& [key, cdata] : t.blocks()) {
    auto& data = out.block(key);
    const auto shape = t.block_shape(key);
    const int r = t.rank();
    std::size_t inner = 1, outer = 1;
    for (int i = leg + 1; i < r; ++i) inner *= static_cast<std::size_t>(shape[i]);
    for (int i = 0; i < leg; ++i) outer *= static_cast<std::size_t>(shape[i]);
    const auto& s = sv[key[leg]].second;
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t d = 0; d < s.size(); ++d) {
        const double f = invert ? 1.0 / s[d] : s[d];
        cplx* p = data.data() + (o * s.size() + d) * inner;
        for (std::size_t i = 0; i < inner; ++i) p[i] *= f;
      }
  }
  return out;
}

}  // namespace hstn

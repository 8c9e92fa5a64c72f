#include "hstn/charge.hpp"

#include <numeric>

namespace hstn {

std::string to_string(Sym s) {
  switch (s) {
    case Sym::Trivial: return "trivial";
    case Sym::Z2: return "z2";
    case Sym::U1: return "u1";
    case Sym::U1U1: return "u1xu1";
  }
  return "?";
}

Sym sym_from_string(const std::string& s) {
  if (s == "trivial") return Sym::Trivial;
  if (s == "z2") return Sym::Z2;
  if (s == "u1") return Sym::U1;
  if (s == "u1xu1") return Sym::U1U1;
  throw ConfigError("unknown symmetry group: " + s);
}

std::string to_string(const Charge& q) {
  return "(" + std::to_string(q.v[0]) + "," + std::to_string(q.v[1]) + ")";
}

ChargeIndex::ChargeIndex(std::vector<Sector> s, Dir d) : sectors(std::move(s)), dir(d) {
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    if (sectors[i].dim < 1) throw StructuralError("sector degeneracy must be >= 1");
    for (std::size_t j = i + 1; j < sectors.size(); ++j)
      if (sectors[i].charge == sectors[j].charge)
        throw StructuralError("duplicate charge within an index");
  }
}

int ChargeIndex::total_dim() const {
  int d = 0;
  for (const auto& s : sectors) d += s.dim;
  return d;
}

int ChargeIndex::sector_offset(int k) const {
  int off = 0;
  for (int i = 0; i < k; ++i) off += sectors[i].dim;
  return off;
}

int ChargeIndex::find_sector(Charge q) const {
  for (std::size_t i = 0; i < sectors.size(); ++i)
    if (sectors[i].charge == q) return static_cast<int>(i);
  return -1;
}

}  // namespace hstn

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "hstn/errors.hpp"

namespace hstn {

// Abelian symmetry groups supported by the block tensors.
enum class Sym : std::uint8_t { Trivial, Z2, U1, U1U1 };

std::string to_string(Sym s);
Sym sym_from_string(const std::string& s);

// Abelian charge as a small integer tuple. Unused components stay 0,
// so comparison and hashing are uniform across groups.
struct Charge {
  std::array<int, 2> v{0, 0};

  Charge() = default;
  explicit Charge(int a) : v{a, 0} {}
  Charge(int a, int b) : v{a, b} {}

  auto operator<=>(const Charge&) const = default;
};

inline Charge charge_add(Sym g, Charge a, Charge b) {
  switch (g) {
    case Sym::Trivial:
      return Charge{};
    case Sym::Z2:
      return Charge{(a.v[0] + b.v[0]) & 1};
    case Sym::U1:
      return Charge{a.v[0] + b.v[0]};
    case Sym::U1U1:
      return Charge{a.v[0] + b.v[0], a.v[1] + b.v[1]};
  }
  return Charge{};
}

inline Charge charge_neg(Sym g, Charge a) {
  switch (g) {
    case Sym::Trivial:
      return Charge{};
    case Sym::Z2:
      return Charge{(-a.v[0]) & 1};
    case Sym::U1:
      return Charge{-a.v[0]};
    case Sym::U1U1:
      return Charge{-a.v[0], -a.v[1]};
  }
  return Charge{};
}

std::string to_string(const Charge& q);

// Whether charge flows into or out of a tensor through an index.
enum class Dir : std::uint8_t { In, Out };

inline Dir reverse(Dir d) { return d == Dir::In ? Dir::Out : Dir::In; }

struct Sector {
  Charge charge;
  int dim = 0;

  bool operator==(const Sector&) const = default;
};

// An ordered list of charge sectors plus a direction. The dense dimension
// of the index is the sum of sector degeneracies; the sector order defines
// the dense embedding (offset of sector k = sum of dims of sectors < k).
struct ChargeIndex {
  std::vector<Sector> sectors;
  Dir dir = Dir::In;

  ChargeIndex() = default;
  ChargeIndex(std::vector<Sector> s, Dir d);

  int total_dim() const;
  int sector_offset(int k) const;  // dense offset of sector k
  int find_sector(Charge q) const;  // -1 if absent

  // Same sector content (charges and degeneracies, in order), any direction.
  bool same_space(const ChargeIndex& other) const {
    return sectors == other.sectors;
  }

  ChargeIndex reversed() const {
    ChargeIndex r = *this;
    r.dir = reverse(r.dir);
    return r;
  }
};

// Index with a single 1-dimensional sector; the workhorse for MPS boundaries.
inline ChargeIndex unit_index(Charge q, Dir d) {
  return ChargeIndex{{Sector{q, 1}}, d};
}

}  // namespace hstn

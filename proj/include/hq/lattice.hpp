#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hq/boolfun.hpp"

namespace hq {

// Lattice of clause-set unions of the minimized CNF, ordered by reversed
// inclusion: u <= v iff elements[v] is a subset of elements[u].
// Elements are sorted by (size, value), so the top (empty set) is first and
// the bottom (<k>) is last.
struct CnfLattice {
    int k = 0;
    std::vector<VarSet> elements;
    std::vector<std::uint8_t> order;  // order[u * n + v] = (u <= v)
    std::size_t top = 0;
    std::size_t bottom = 0;

    std::size_t size() const { return elements.size(); }
    bool leq(std::size_t u, std::size_t v) const { return order[u * elements.size() + v] != 0; }
    std::size_t indexOf(VarSet element) const;  // throws if absent
};

// mu[u] = mu(u, top)
using MobiusRow = std::vector<std::int64_t>;

// Requires f monotone, nondegenerate, non-constant.
CnfLattice buildCnfLattice(const BoolFn& f);
MobiusRow mobiusRow(const CnfLattice& lattice);
bool isSafe(const BoolFn& f);

// mu(bottom, top) of the CNF lattice of f.
std::int64_t mobiusBottomTop(const BoolFn& f);

// Pairs (lower, upper) where upper covers lower.
std::vector<std::pair<std::size_t, std::size_t>> coveringPairs(const CnfLattice& lattice);

std::string exportHasseDot(const CnfLattice& lattice, const MobiusRow& row);

}  // namespace hq

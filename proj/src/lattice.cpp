#include "hq/lattice.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace hq {

std::size_t CnfLattice::indexOf(VarSet element) const {
    auto it = std::find(elements.begin(), elements.end(), element);
    if (it == elements.end()) throw std::out_of_range("element " + formatVarSet(element) + " not in lattice");
    return static_cast<std::size_t>(it - elements.begin());
}

CnfLattice buildCnfLattice(const BoolFn& f) {
    if (!isMonotone(f)) throw std::invalid_argument("CNF lattice needs a monotone function");
    if (f.isConstant()) throw std::invalid_argument("CNF lattice needs a non-constant function");
    if (!isNondegenerate(f)) throw std::invalid_argument("CNF lattice needs a nondegenerate function");

    MonotoneCnf cnf = minimizedCnf(f);
    // Closure of {empty} under union with each clause gives every d_s exactly once.
    std::vector<std::uint8_t> present(f.size(), 0);
    std::vector<VarSet> elems{0};
    present[0] = 1;
    for (VarSet c : cnf.clauses) {
        std::size_t n = elems.size();
        for (std::size_t i = 0; i < n; ++i) {
            VarSet u = elems[i] | c;
            if (!present[u]) {
                present[u] = 1;
                elems.push_back(u);
            }
        }
    }
    std::sort(elems.begin(), elems.end(), [](VarSet a, VarSet b) {
        int pa = popcount(a), pb = popcount(b);
        return pa != pb ? pa < pb : a < b;
    });

    CnfLattice lat;
    lat.k = f.k();
    lat.elements = std::move(elems);
    std::size_t n = lat.elements.size();
    lat.order.assign(n * n, 0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            lat.order[u * n + v] = isSubset(lat.elements[v], lat.elements[u]);
    lat.top = 0;
    lat.bottom = n - 1;
    if (lat.elements[lat.bottom] != fullSet(f.k())) throw std::logic_error("CNF lattice has no bottom");
    return lat;
}

MobiusRow mobiusRow(const CnfLattice& lat) {
    std::size_t n = lat.size();
    MobiusRow mu(n, 0);
    // Elements are sorted from the top down, so every w > u is already done.
    for (std::size_t u = 0; u < n; ++u) {
        if (u == lat.top) {
            mu[u] = 1;
            continue;
        }
        std::int64_t sum = 0;
        for (std::size_t w = 0; w < u; ++w)
            if (lat.leq(u, w)) sum += mu[w];
        mu[u] = -sum;
    }
    return mu;
}

std::int64_t mobiusBottomTop(const BoolFn& f) {
    CnfLattice lat = buildCnfLattice(f);
    return mobiusRow(lat)[lat.bottom];
}

bool isSafe(const BoolFn& f) { return mobiusBottomTop(f) == 0; }

std::vector<std::pair<std::size_t, std::size_t>> coveringPairs(const CnfLattice& lat) {
    std::size_t n = lat.size();
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v || !lat.leq(u, v)) continue;
            bool covers = true;
            for (std::size_t w = 0; w < n && covers; ++w)
                if (w != u && w != v && lat.leq(u, w) && lat.leq(w, v)) covers = false;
            if (covers) out.emplace_back(u, v);
        }
    }
    return out;
}

std::string exportHasseDot(const CnfLattice& lat, const MobiusRow& row) {
    if (row.size() != lat.size()) throw std::invalid_argument("Mobius row does not match lattice");
    std::ostringstream out;
    out << "digraph cnf_lattice {\n";
    out << "  rankdir=BT;\n";
    out << "  node [shape=box];\n";
    for (std::size_t u = 0; u < lat.size(); ++u)
        out << "  n" << u << " [label=\"" << formatVarSet(lat.elements[u]) << "  mu=" << row[u] << "\"];\n";
    for (auto [lo, hi] : coveringPairs(lat)) out << "  n" << lo << " -> n" << hi << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace hq

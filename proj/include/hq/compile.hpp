#pragma once

#include <optional>
#include <vector>

#include "hq/circuit.hpp"
#include "hq/niceness.hpp"
#include "hq/obdd.hpp"
#include "hq/tid.hpp"

namespace hq {

struct CompileOptions {
    std::size_t nodeBudget = kDefaultNodeBudget;
};

struct Compilation {
    Circuit circuit;
    std::vector<int> boxRoots;      // one per non-empty box, children of the top OR
    std::size_t decisionNodes = 0;  // summed over the OBDD pieces
};

// Lineage variables of the tuples on each side of box l, in OBDD order:
// left is R, S_1..S_l grouped by x-constant; right is S_{l+1}..S_k, T
// grouped by y-constant.  Variable i is tuple i of the database.
std::vector<int> leftOrder(const TidDatabase& db, int l);
std::vector<int> rightOrder(const TidDatabase& db, int l);

// OBDD for "the h-profile seen by this side is exactly `profile`".  Left
// profiles use bits 0..l-1, right profiles bits l+1..k.
ObddResult exactLeft(Circuit& c, const TidDatabase& db, int l, VarSet profile);
ObddResult exactRight(Circuit& c, const TidDatabase& db, int l, VarSet profile);

// Circuit for the lineage of the box function g, which must not depend on l.
int compileBox(Circuit& c, const BoolFn& g, int l, const TidDatabase& db, std::size_t* decisionNodes = nullptr);

// OR over the per-box circuits; NNF, decomposable and deterministic.
Compilation compileNiceDetailed(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db,
                                const CompileOptions& opts = {});
Circuit compileNice(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db, const CompileOptions& opts = {});

// d decomposes the negation of q.phi.  The output is a single NOT over the
// compiled complement query.
Compilation compileCoNiceDetailed(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db,
                                  const CompileOptions& opts = {});
Circuit compileCoNice(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db,
                      const CompileOptions& opts = {});

enum class CompileRoute { Nice, CoNice };

struct CompiledQuery {
    CompileRoute route;
    NiceDecomposition decomposition;
    Compilation compilation;
};

// Classifies q.phi and compiles by the matching route.  Returns nullopt when
// neither phi nor its negation is nice; throws SolverUnknownError on a solver
// UNKNOWN.
std::optional<CompiledQuery> compileQuery(const HQuery& q, const TidDatabase& db, SatBackend& backend,
                                          const CompileOptions& opts = {});

}  // namespace hq

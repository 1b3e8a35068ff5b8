#include "hq/compile.hpp"

#include <map>
#include <stdexcept>

namespace hq {

namespace {

constexpr std::uint64_t kFlag = std::uint64_t{1} << 20;  // R(a) or T(b) seen in the current group
constexpr std::uint64_t kPrev = std::uint64_t{1} << 21;  // previous S tuple of the chain present
constexpr std::uint64_t kProfileMask = kFlag - 1;

// Per-level facts the side automata need.
struct Level {
    int var;
    int rel;
    bool groupStart;  // first tuple of a new x-group (left) or y-group (right)
    bool chained;     // previous level is S_{rel-1} on the same (x, y)
};

std::vector<Level> leftLevels(const TidDatabase& db, int l) {
    std::vector<Level> out;
    for (int a = 0; a < db.numConstants(); ++a) {
        bool first = true;
        auto push = [&](const Tuple& t) {
            auto idx = db.find(t);
            if (!idx) return;
            bool chained = !out.empty() && t.rel >= 2 && !first && db.tuple(static_cast<std::size_t>(out.back().var)) == Tuple{t.rel - 1, t.x, t.y};
            out.push_back({static_cast<int>(*idx), t.rel, first, chained});
            first = false;
        };
        push({0, a, -1});
        for (int b = 0; b < db.numConstants(); ++b)
            for (int i = 1; i <= l; ++i) push({i, a, b});
    }
    return out;
}

std::vector<Level> rightLevels(const TidDatabase& db, int l) {
    int k = db.k();
    std::vector<Level> out;
    for (int b = 0; b < db.numConstants(); ++b) {
        bool first = true;
        auto push = [&](const Tuple& t) {
            auto idx = db.find(t);
            if (!idx) return;
            bool chained = !out.empty() && t.rel >= l + 2 && t.rel <= k && !first &&
                           db.tuple(static_cast<std::size_t>(out.back().var)) == Tuple{t.rel - 1, t.x, t.y};
            out.push_back({static_cast<int>(*idx), t.rel, first, chained});
            first = false;
        };
        push({k + 1, -1, b});
        for (int a = 0; a < db.numConstants(); ++a)
            for (int i = l + 1; i <= k; ++i) push({i, a, b});
    }
    return out;
}

std::vector<int> varsOf(const std::vector<Level>& levels) {
    std::vector<int> out;
    for (const Level& lv : levels) out.push_back(lv.var);
    return out;
}

// Reads one level.  h_{i-1} is witnessed by S_{i-1} and S_i on the same
// pair, h_0 by R(x) and S_1 (left side), h_k by T(y) and S_k (right side).
// R(a) and T(b) are read before the S tuples of their group.
std::uint64_t stepSide(const Level& lv, int k, bool left, std::uint64_t state, bool bit) {
    if (lv.groupStart) state &= kProfileMask;
    std::uint64_t next = state & kProfileMask;
    if (lv.rel == 0 || lv.rel == k + 1) return bit ? next | kFlag : next;
    bool flag = state & kFlag;
    if (flag) next |= kFlag;
    if (!bit) return next;
    next |= kPrev;
    if ((state & kPrev) && lv.chained) next |= std::uint64_t{1} << (lv.rel - 1);
    if (flag && left && lv.rel == 1) next |= 1;
    if (flag && !left && lv.rel == k) next |= std::uint64_t{1} << k;
    return next;
}

ObddResult exactSide(Circuit& c, const std::vector<Level>& levels, int k, VarSet profile, bool left) {
    StreamingFunction f;
    f.initial = 0;
    f.step = [&levels, k, left](std::size_t i, std::uint64_t s, bool bit) { return stepSide(levels[i], k, left, s, bit); };
    f.accept = [profile](std::uint64_t s) { return (s & kProfileMask) == profile; };
    f.dead = [profile](std::uint64_t s) { return !isSubset(static_cast<VarSet>(s & kProfileMask), profile); };
    return buildObdd(c, varsOf(levels), f);
}

}  // namespace

std::vector<int> leftOrder(const TidDatabase& db, int l) { return varsOf(leftLevels(db, l)); }
std::vector<int> rightOrder(const TidDatabase& db, int l) { return varsOf(rightLevels(db, l)); }

ObddResult exactLeft(Circuit& c, const TidDatabase& db, int l, VarSet profile) {
    if (l < 0 || l > db.k()) throw std::out_of_range("box index out of range");
    if (!isSubset(profile, (VarSet{1} << l) - 1)) throw std::invalid_argument("left profile outside 0..l-1");
    return exactSide(c, leftLevels(db, l), db.k(), profile, true);
}

ObddResult exactRight(Circuit& c, const TidDatabase& db, int l, VarSet profile) {
    if (l < 0 || l > db.k()) throw std::out_of_range("box index out of range");
    if (!isSubset(profile, fullSet(db.k()) & ~((VarSet{2} << l) - 1)))
        throw std::invalid_argument("right profile outside l+1..k");
    return exactSide(c, rightLevels(db, l), db.k(), profile, false);
}

int compileBox(Circuit& c, const BoolFn& g, int l, const TidDatabase& db, std::size_t* decisionNodes) {
    int k = db.k();
    if (g.k() != k) throw std::invalid_argument("box function and database disagree on k");
    if (dep(g) & (VarSet{1} << l)) throw std::invalid_argument("box function depends on its own index");
    VarSet leftMask = (VarSet{1} << l) - 1;
    VarSet rightMask = fullSet(k) & ~((VarSet{2} << l) - 1);
    std::vector<Level> left = leftLevels(db, l), right = rightLevels(db, l);
    std::map<VarSet, int> leftGate, rightGate;
    std::size_t nodes = 0;
    auto side = [&](std::map<VarSet, int>& cache, VarSet p, bool isLeft) {
        if (auto it = cache.find(p); it != cache.end()) return it->second;
        ObddResult r = exactSide(c, isLeft ? left : right, k, p, isLeft);
        nodes += r.decisionNodes;
        cache.emplace(p, r.root);
        return r.root;
    };
    std::vector<int> terms;
    // Enumerate A over subsets of leftMask and B over subsets of rightMask.
    for (VarSet a = leftMask;; a = (a - 1) & leftMask) {
        for (VarSet b = rightMask;; b = (b - 1) & rightMask) {
            if (g[a | b]) terms.push_back(c.andGate({side(leftGate, a, true), side(rightGate, b, false)}));
            if (b == 0) break;
        }
        if (a == 0) break;
    }
    if (decisionNodes) *decisionNodes += nodes;
    return c.orGate(std::move(terms));
}

Compilation compileNiceDetailed(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db,
                                const CompileOptions& opts) {
    if (db.k() != q.k) throw std::invalid_argument("database and query disagree on k");
    if (!verifyDecomposition(q.phi, d)) throw std::invalid_argument("not a nice decomposition of the query function");
    Compilation out{Circuit(static_cast<int>(db.size()), opts.nodeBudget), {}, 0};
    for (int l = 0; l <= q.k; ++l) {
        if (d.boxes[static_cast<std::size_t>(l)].empty()) continue;
        int root = compileBox(out.circuit, d.boxFunction(l), l, db, &out.decisionNodes);
        out.boxRoots.push_back(root);
    }
    out.circuit.setOutput(out.circuit.orGate(out.boxRoots));
    return out;
}

Circuit compileNice(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db, const CompileOptions& opts) {
    return compileNiceDetailed(q, d, db, opts).circuit;
}

Compilation compileCoNiceDetailed(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db,
                                  const CompileOptions& opts) {
    BoolFn neg = negate(q.phi);
    if (!verifyDecomposition(neg, d)) throw std::invalid_argument("not a nice decomposition of the negated function");
    Compilation out = compileNiceDetailed(HQuery(q.k, neg), d, db, opts);
    out.circuit.setOutput(out.circuit.rawNot(out.circuit.output()));
    return out;
}

Circuit compileCoNice(const HQuery& q, const NiceDecomposition& d, const TidDatabase& db, const CompileOptions& opts) {
    return compileCoNiceDetailed(q, d, db, opts).circuit;
}

std::optional<CompiledQuery> compileQuery(const HQuery& q, const TidDatabase& db, SatBackend& backend,
                                          const CompileOptions& opts) {
    NicenessVerdict v = classifyFunction(q.phi, backend);
    switch (v.niceness) {
        case Niceness::Nice:
            return CompiledQuery{CompileRoute::Nice, *v.nice.decomposition,
                                 compileNiceDetailed(q, *v.nice.decomposition, db, opts)};
        case Niceness::CoNice:
            return CompiledQuery{CompileRoute::CoNice, *v.coNice.decomposition,
                                 compileCoNiceDetailed(q, *v.coNice.decomposition, db, opts)};
        case Niceness::Bad: return std::nullopt;
        default: break;
    }
    std::string why = v.coNice.diagnostic.empty() ? v.nice.diagnostic : v.coNice.diagnostic;
    throw SolverUnknownError(q.phi, why);
}

}  // namespace hq

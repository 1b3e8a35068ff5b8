#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "hq/boolfun.hpp"

namespace hq {

using Rational = mpq_class;

// Relation index: 0 is R(x), 1..k are S_i(x, y), k+1 is T(y).  Unused
// coordinates are -1.
struct Tuple {
    int rel = 0;
    int x = -1;
    int y = -1;
    bool operator==(const Tuple&) const = default;
};

// A tuple-independent database over R, S_1..S_k, T.  Each tuple is a
// lineage variable, identified by its index.
class TidDatabase {
public:
    explicit TidDatabase(int k);

    int k() const { return k_; }
    std::size_t size() const { return tuples_.size(); }

    int constant(std::string_view name);  // interns
    const std::string& constantName(int c) const { return constants_.at(static_cast<std::size_t>(c)); }
    int numConstants() const { return static_cast<int>(constants_.size()); }

    std::size_t add(Tuple t, Rational p);
    std::size_t addR(std::string_view a, Rational p);
    std::size_t addS(int i, std::string_view a, std::string_view b, Rational p);
    std::size_t addT(std::string_view b, Rational p);

    const Tuple& tuple(std::size_t i) const { return tuples_.at(i); }
    const Rational& probability(std::size_t i) const { return probs_.at(i); }
    void setProbability(std::size_t i, Rational p);
    const std::vector<Rational>& probabilities() const { return probs_; }
    std::optional<std::size_t> find(const Tuple& t) const;

    std::string relationName(int rel) const;
    std::string tupleName(std::size_t i) const;  // e.g. S1(a,b)

private:
    int k_;
    std::vector<std::string> constants_;
    std::vector<Tuple> tuples_;
    std::vector<Rational> probs_;
};

// `num/den`, a decimal, or an integer; must lie in [0, 1].
Rational parseProbability(std::string_view text);

// One fact per line: `R a p`, `S<i> a b p`, `T b p`; `#` starts a comment.
TidDatabase parseDatabase(std::string_view text, int k);
std::string formatDatabase(const TidDatabase& db);

// Every possible tuple over a domain of the given size, all with probability p.
TidDatabase fullDatabase(int k, int domainSize, const Rational& p);

// Sub-database keeping the tuples with keep[i] set (probabilities copied).
TidDatabase restrictDatabase(const TidDatabase& db, const std::vector<bool>& keep);

// Presence mask over the tuples of a database: a deterministic instance.
using SubInstance = std::vector<bool>;

struct HQuery {
    int k;
    BoolFn phi;
    HQuery(int k, BoolFn phi);
};

bool evalH(int i, const TidDatabase& db, const SubInstance& present);
bool evalH(int i, const TidDatabase& db);  // all tuples present

// {i : h_ki holds}
VarSet hProfile(const TidDatabase& db, const SubInstance& present);

bool evalQuery(const HQuery& q, const TidDatabase& db, const SubInstance& present);
bool evalQuery(const HQuery& q, const TidDatabase& db);

constexpr std::size_t kMaxOracleTuples = 24;

// Entry m is the query value on the sub-instance whose tuples are the set
// bits of m.  |D| <= 24.
std::vector<bool> lineageTable(const HQuery& q, const TidDatabase& db);

// Exact probability by summing Pr(D') over all satisfying sub-instances.
// |D| <= 24.
Rational bruteForcePqe(const HQuery& q, const TidDatabase& db);

}  // namespace hq

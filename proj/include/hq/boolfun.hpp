#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hq {

// A valuation of <k> = {0..k}: bit i set iff variable i is true.
using VarSet = std::uint32_t;

constexpr int kMaxK = 12;

inline int popcount(VarSet v) { return __builtin_popcount(v); }
inline VarSet fullSet(int k) { return (VarSet{1} << (k + 1)) - 1; }
inline bool isSubset(VarSet a, VarSet b) { return (a & ~b) == 0; }

std::string formatVarSet(VarSet v);

// Truth table of a Boolean function on variables <k>.  Entry m is the value
// at the valuation whose set bits are m (bit i <-> variable i).
class BoolFn {
public:
    BoolFn() : BoolFn(1) {}
    explicit BoolFn(int k);

    static BoolFn constant(int k, bool value);
    static BoolFn variable(int k, int var);
    static BoolFn fromWords(int k, std::vector<std::uint64_t> words);

    template <class Pred>
    static BoolFn fromPredicate(int k, Pred&& pred) {
        BoolFn f(k);
        for (std::size_t m = 0; m < f.size(); ++m)
            if (pred(static_cast<VarSet>(m))) f.set(static_cast<VarSet>(m), true);
        return f;
    }

    int k() const { return k_; }
    int numVars() const { return k_ + 1; }
    std::size_t size() const { return std::size_t{1} << (k_ + 1); }

    bool operator[](VarSet nu) const { return (words_[nu >> 6] >> (nu & 63)) & 1; }
    void set(VarSet nu, bool value);

    std::span<const std::uint64_t> words() const { return words_; }
    std::size_t countSat() const;
    bool isConstant() const;

    // Orders first by k, then by the table read as an unsigned integer
    // (entry m is bit m).
    std::strong_ordering operator<=>(const BoolFn& other) const;
    bool operator==(const BoolFn& other) const = default;

private:
    int k_;
    std::vector<std::uint64_t> words_;
};

struct MonotoneCnf {
    int k = 0;
    std::vector<VarSet> clauses;  // sorted ascending

    bool evaluate(VarSet nu) const;
    std::string toString() const;  // e.g. (2|3)&(0|3)
};

// Throws std::out_of_range if nu mentions a variable outside <k>.
bool evaluate(const BoolFn& f, VarSet nu);

// Symmetric difference of nu with {l}.
VarSet tgl(VarSet nu, int l);

VarSet dep(const BoolFn& f);
bool isNondegenerate(const BoolFn& f);
bool isMonotone(const BoolFn& f);

// Unique minimal positive CNF.  Requires a monotone non-constant function.
MonotoneCnf minimizedCnf(const BoolFn& f);
BoolFn fromCnf(const MonotoneCnf& cnf);

// perm[i] is the image of variable i; result g satisfies g(perm(nu)) = f(nu).
BoolFn permute(const BoolFn& f, std::span<const int> perm);

// Minimum table over all (k+1)! variable renamings.
BoolFn canonicalize(const BoolFn& f);

BoolFn negate(const BoolFn& f);
std::vector<VarSet> satValuations(const BoolFn& f);

// Table as hex, most significant nibble first, bit m of the value = entry m.
std::string toHex(const BoolFn& f);
BoolFn fromHex(int k, std::string_view hex);

// `k:<int> table:<hex>`
std::string serialize(const BoolFn& f);
BoolFn parseSerialized(std::string_view line);

// Clause syntax: clauses joined by '&', optional parentheses, variables in a
// clause separated by '|' or ',', or written as concatenated single digits
// ("014" is 0|1|4).  "true"/"false" are accepted when k is given.  A line in
// serialized form is also accepted.  When k is absent it is the largest
// variable mentioned.
BoolFn parseFunction(std::string_view text, std::optional<int> k = std::nullopt);

}  // namespace hq

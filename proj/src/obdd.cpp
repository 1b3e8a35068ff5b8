#include "hq/obdd.hpp"

#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace hq {

namespace {

class Builder {
public:
    explicit Builder(Circuit& c) : c_(c) {}

    int decide(int v, int hi, int lo) {
        if (hi == lo) return hi;
        nodes_.emplace(v, hi, lo);
        int x = c_.var(v);
        return c_.orGate({c_.andGate({x, hi}), c_.andGate({c_.notGate(x), lo})});
    }

    std::size_t decisionNodes() const { return nodes_.size(); }

private:
    Circuit& c_;
    std::set<std::tuple<int, int, int>> nodes_;
};

}  // namespace

ObddResult buildObdd(Circuit& c, const std::vector<int>& varOrder, const StreamingFunction& f) {
    if (!f.step || !f.accept) throw std::invalid_argument("streaming function needs step and accept");
    Builder b(c);
    std::size_t n = varOrder.size();
    std::vector<std::unordered_map<std::uint64_t, int>> memo(n + 1);
    std::size_t entries = 0;
    auto build = [&](auto&& self, std::size_t level, std::uint64_t state) -> int {
        if (f.dead && f.dead(state)) return c.constant(false);
        if (level == n) return c.constant(f.accept(state));
        auto& m = memo[level];
        if (auto it = m.find(state); it != m.end()) return it->second;
        int hi = self(self, level + 1, f.step(level, state, true));
        int lo = self(self, level + 1, f.step(level, state, false));
        int g = b.decide(varOrder[level], hi, lo);
        if (++entries > c.budget()) throw BudgetExceeded(c.budget());
        m.emplace(state, g);
        return g;
    };
    int root = build(build, 0, f.initial);
    return {root, b.decisionNodes()};
}

ObddResult buildObdd(Circuit& c, const std::vector<int>& varOrder,
                     const std::function<bool(const std::vector<bool>&)>& f) {
    std::size_t n = varOrder.size();
    if (n > static_cast<std::size_t>(kMaxExhaustiveVars))
        throw std::invalid_argument("subset-evaluator OBDD limited to 22 variables");
    std::vector<char> table(std::size_t{1} << n);
    std::vector<bool> bits(n);
    for (std::size_t m = 0; m < table.size(); ++m) {
        for (std::size_t i = 0; i < n; ++i) bits[i] = (m >> i) & 1;
        table[m] = f(bits);
    }
    Builder b(c);
    auto build = [&](auto&& self, std::size_t level, std::size_t prefix) -> int {
        if (level == n) return c.constant(table[prefix] != 0);
        int hi = self(self, level + 1, prefix | (std::size_t{1} << level));
        int lo = self(self, level + 1, prefix);
        return b.decide(varOrder[level], hi, lo);
    };
    int root = build(build, 0, 0);
    return {root, b.decisionNodes()};
}

}  // namespace hq

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hq/circuit.hpp"

namespace hq {

// A function given as a deterministic automaton reading one bit per level of
// the variable order.  States must be a function of the bits read so far.
struct StreamingFunction {
    std::uint64_t initial = 0;
    std::function<std::uint64_t(std::size_t level, std::uint64_t state, bool bit)> step;
    std::function<bool(std::uint64_t state)> accept;            // after the last level
    std::function<bool(std::uint64_t state)> dead = nullptr;    // optional: no extension accepts
};

struct ObddResult {
    int root = -1;
    std::size_t decisionNodes = 0;  // distinct (var, hi, lo) with hi != lo
};

// Decision nodes are OR(AND(VAR v, hi), AND(NOT v, lo)), built bottom-up with
// memoization on (level, state); hash-consing makes the result reduced.
ObddResult buildObdd(Circuit& c, const std::vector<int>& varOrder, const StreamingFunction& f);

// f receives bit i for varOrder[i].  At most 22 variables.
ObddResult buildObdd(Circuit& c, const std::vector<int>& varOrder,
                     const std::function<bool(const std::vector<bool>&)>& f);

}  // namespace hq

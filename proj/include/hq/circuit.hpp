#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hq/sat.hpp"
#include "hq/tid.hpp"

namespace hq {

constexpr std::size_t kDefaultNodeBudget = 10'000'000;

class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(std::size_t budget)
        : std::runtime_error("node budget of " + std::to_string(budget) + " exhausted"), budget(budget) {}
    std::size_t budget;
};

enum class GateKind : std::uint8_t { Const, Var, Not, And, Or };

const char* gateKindName(GateKind kind);

struct Gate {
    GateKind kind = GateKind::Const;
    int var = -1;        // Var: variable index; Const: 0 or 1
    std::vector<int> inputs;
};

// A Boolean circuit DAG over variables 0..numVars-1.  Gates are hash-consed:
// building a structurally identical gate twice returns the same id.  The
// and/or/not builders fold constants; raw builders do not.
class Circuit {
public:
    explicit Circuit(int numVars = 0, std::size_t nodeBudget = kDefaultNodeBudget);

    int numVars() const { return numVars_; }
    std::size_t size() const { return gates_.size(); }
    std::size_t budget() const { return budget_; }
    const Gate& gate(int id) const { return gates_.at(static_cast<std::size_t>(id)); }

    int constant(bool value);
    int var(int v);
    int notGate(int in);
    int andGate(std::vector<int> in);
    int orGate(std::vector<int> in);

    int rawNot(int in);
    int rawGate(GateKind kind, std::vector<int> in);

    void setOutput(int id);
    int output() const;
    bool hasOutput() const { return output_ >= 0; }

    // VARS(g) as a bitset over the variables.
    const std::uint64_t* varsWords(int id) const {
        return varsWords_.data() + static_cast<std::size_t>(id) * wordsPerSet_;
    }
    std::size_t wordsPerSet() const { return wordsPerSet_; }
    std::vector<int> vars(int id) const;
    bool hasVar(int id, int v) const { return (varsWords(id)[v >> 6] >> (v & 63)) & 1; }

    // Gate ids reachable from `root` in topological order (inputs first).
    std::vector<int> cone(int root) const;
    std::vector<int> cone() const { return cone(output()); }

private:
    int intern(Gate g);

    int numVars_;
    std::size_t budget_;
    std::size_t wordsPerSet_;
    std::vector<Gate> gates_;
    std::vector<std::uint64_t> varsWords_;
    struct KeyHash {
        std::size_t operator()(const Gate& g) const;
    };
    struct KeyEq {
        bool operator()(const Gate& a, const Gate& b) const {
            return a.kind == b.kind && a.var == b.var && a.inputs == b.inputs;
        }
    };
    std::unordered_map<Gate, int, KeyHash, KeyEq> index_;
    int output_ = -1;
};

struct CircuitStats {
    std::size_t gates = 0;  // reachable from the output
    std::size_t edges = 0;
    std::size_t vars = 0;   // |VARS(output)|
    std::size_t andGates = 0, orGates = 0, notGates = 0;
};

CircuitStats stats(const Circuit& c);

bool evaluate(const Circuit& c, int root, const std::vector<bool>& assignment);
bool evaluate(const Circuit& c, const std::vector<bool>& assignment);

// Every NOT gate in the output cone has a variable input.
bool isNnf(const Circuit& c);
// NOT gates in the output cone whose input is not a variable.
std::size_t nonLeafNotCount(const Circuit& c);

bool checkDecomposable(const Circuit& c);

enum class DeterminismMode { Auto, Exhaustive, Sat };

constexpr int kMaxExhaustiveVars = 22;
constexpr int kAutoExhaustiveVars = 18;

// Exhaustive mode throws std::invalid_argument above 22 variables.  Sat mode
// uses the embedded solver unless a backend is given; an Unknown answer
// throws std::runtime_error.  Auto picks exhaustive up to 18 variables.
bool checkDeterministic(const Circuit& c, DeterminismMode mode = DeterminismMode::Auto,
                        SatBackend* backend = nullptr);

// True iff no assignment satisfies two of the given gates at once.
bool pairwiseDisjoint(const Circuit& c, const std::vector<int>& roots, DeterminismMode mode = DeterminismMode::Auto,
                      SatBackend* backend = nullptr);

// probs[v] for each variable v; throws if a used variable has none.
Rational evalProbability(const Circuit& c, const std::vector<Rational>& probs);
double evalProbabilityDouble(const Circuit& c, const std::vector<double>& probs);

// `gate <id> <KIND> <args...>` lines followed by `output <id>`.
std::string dumpCircuit(const Circuit& c);
Circuit parseCircuit(std::string_view text, std::size_t nodeBudget = kDefaultNodeBudget);

}  // namespace hq

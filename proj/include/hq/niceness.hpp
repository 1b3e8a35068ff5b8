#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hq/boolfun.hpp"
#include "hq/sat.hpp"

namespace hq {

// The CNF nice(f): variable x(nu, l) says that nu is put in box l.
// SAT variable of (sat[i], l) is i * (k + 1) + l + 1.
struct NiceInstance {
    int k = 0;
    std::vector<VarSet> sat;  // ascending
    CnfFormula cnf;

    int var(VarSet nu, int l) const;  // throws if nu is not satisfying
    std::pair<VarSet, int> decode(int satVar) const;
};

// boxes[l] holds the valuations assigned to variable l, ascending.
struct NiceDecomposition {
    BoolFn source;
    std::vector<std::vector<VarSet>> boxes;

    // Characteristic function of box l.
    BoolFn boxFunction(int l) const;
};

NiceInstance buildNiceInstance(const BoolFn& f);
SatResult solve(const NiceInstance& inst, SatBackend& backend);

// Throws std::logic_error if the model does not yield a valid decomposition.
NiceDecomposition extractDecomposition(const NiceInstance& inst, const BoolFn& f, const std::vector<bool>& model);

// Boxes partition sat(f) and box l is closed under toggling l.
bool verifyDecomposition(const BoolFn& f, const NiceDecomposition& d);

// Backtracking search; k <= 3 only.
bool bruteForceNice(const BoolFn& f);

std::string emitDimacs(const NiceInstance& inst);

struct NiceCheck {
    SatStatus status = SatStatus::Unknown;
    std::optional<NiceDecomposition> decomposition;  // set and verified when Sat
    std::string diagnostic;
};

// Builds, solves, and verifies.  A SAT answer whose model does not verify is
// reported as Unknown.
NiceCheck checkNice(const BoolFn& f, SatBackend& backend);

enum class Niceness { NotComputed, Nice, CoNice, Bad, Unknown };

const char* nicenessName(Niceness n);

struct NicenessVerdict {
    Niceness niceness = Niceness::NotComputed;
    NiceCheck nice;     // nice(f)
    NiceCheck coNice;   // nice(not f); only run when nice(f) is UNSAT
};

NicenessVerdict classifyFunction(const BoolFn& f, SatBackend& backend);

class SolverUnknownError : public std::runtime_error {
public:
    SolverUnknownError(const BoolFn& fn, const std::string& why)
        : std::runtime_error("solver returned UNKNOWN for " + serialize(fn) + ": " + why), fn(fn) {}
    BoolFn fn;
};


}  // namespace hq

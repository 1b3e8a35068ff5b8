#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hq {

// CNF over variables 1..numVars, literals in DIMACS convention.
struct CnfFormula {
    int numVars = 0;
    std::vector<std::vector<int>> clauses;
};

enum class SatStatus { Sat, Unsat, Unknown };

const char* statusName(SatStatus s);

struct SatResult {
    SatStatus status = SatStatus::Unknown;
    std::vector<bool> model;  // model[v] for v in 1..numVars; index 0 unused
    std::string diagnostic;   // why the result is Unknown
};

// Single-use per task; implementations need not be thread-safe.
class SatBackend {
public:
    virtual ~SatBackend() = default;
    virtual SatResult solve(const CnfFormula& cnf) = 0;
    virtual std::string name() const = 0;
};

// CDCL with two watched literals, first-UIP learning, VSIDS and Luby
// restarts.  Deterministic for a given seed.  Returns Unknown once the
// conflict budget is spent.
class EmbeddedSolver final : public SatBackend {
public:
    explicit EmbeddedSolver(std::uint64_t seed = 0, std::uint64_t conflictBudget = 20'000'000)
        : seed_(seed), conflictBudget_(conflictBudget) {}
    SatResult solve(const CnfFormula& cnf) override;
    std::string name() const override { return "embedded"; }

private:
    std::uint64_t seed_;
    std::uint64_t conflictBudget_;
};

// Writes the formula to a temporary DIMACS file and runs `command <file>`,
// reading SAT-competition output (`s ...` and `v ...` lines).
class ExternalSolver final : public SatBackend {
public:
    explicit ExternalSolver(std::string command) : command_(std::move(command)) {}
    SatResult solve(const CnfFormula& cnf) override;
    std::string name() const override { return command_; }

private:
    std::string command_;
};

// "embedded" or a path/command for an external solver.
std::unique_ptr<SatBackend> makeBackend(const std::string& spec, std::uint64_t seed = 0);

std::string toDimacs(const CnfFormula& cnf, const std::vector<std::string>& comments = {});
CnfFormula parseDimacs(std::string_view text);
SatResult parseSolverOutput(std::string_view text, int numVars);
std::string formatSolverOutput(const SatResult& result, int numVars);

bool satisfies(const CnfFormula& cnf, const std::vector<bool>& model);

}  // namespace hq

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hq/census.hpp"
#include "hq/circuit.hpp"

namespace hq::cli {

// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitSolverUnknown = 2,
    kExitBudget = 3,
    kExitUnsupported = 4,  // BAD function, or a request outside the supported range
    kExitMismatch = 5,     // brute-force cross-check disagreed with the circuit
    kExitUsage = 64,       // parse error or bad arguments
};

class CliError : public std::runtime_error {
public:
    CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
    int code;
};

struct RunConfig {
    int k = 0;
    int jobs = 1;
    int shards = 16;
    std::string solver = "embedded";
    std::size_t nodeBudget = kDefaultNodeBudget;
    std::filesystem::path out = "hq-out";
    bool includeK6 = false;
    bool checkOnly = false;
    std::uint64_t seed = 0;
};

struct CensusRow {
    int k = 0;
    CensusCounts counts;
    double seconds = 0;
    bool fromCheckpoint = false;
    std::vector<std::string> niceWitnesses;    // first few, serialized
    std::vector<std::string> coNiceWitnesses;  // all
    std::vector<std::string> badWitnesses;     // all
};

struct Report {
    std::vector<CensusRow> rows;
};

// Flat key=value lines; timing is left out so reruns are byte-identical.
std::string formatReport(const Report& report);
std::string renderTable1(const Report& report);

// Runs enumeration, SND filtering and classification for cfg.k, resuming
// from cfg.out/census/k<k>.  With cfg.checkOnly only existing census files
// are aggregated.
CensusRow cmdCensus(const RunConfig& cfg, std::ostream& log);

// Rows k = 1..5, plus k = 6 with cfg.includeK6.
Report cmdTable1(const RunConfig& cfg, std::ostream& log);

// Text report for one function; writes the Hasse diagram when dotPath is set.
int cmdInspect(const std::string& fnSpec, std::optional<int> k, const std::optional<std::filesystem::path>& dotPath,
               const RunConfig& cfg, std::ostream& out);

// Exact probability of the H-query on a database file.
int cmdProbability(const std::string& fnSpec, std::optional<int> k, const std::filesystem::path& dbPath,
                   const std::optional<std::filesystem::path>& circuitPath, const RunConfig& cfg, std::ostream& out);

// Reads a census directory written by cmdCensus.  Throws CliError when it is
// missing or incomplete.
std::vector<CensusRecord> readCensus(const std::filesystem::path& out, int k);

}  // namespace hq::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hq/boolfun.hpp"
#include "hq/niceness.hpp"
#include "hq/sat.hpp"

namespace hq {

// Truth table of a function on at most 7 variables (k <= 6).
using Table = unsigned __int128;

constexpr int kMaxCensusK = 6;

struct CensusRecord {
    BoolFn fn;
    bool nondegenerate = false;
    std::optional<bool> safe;  // only set for nondegenerate records
    Niceness niceness = Niceness::NotComputed;

    bool inSnd() const { return nondegenerate && safe.value_or(false); }
    bool operator==(const CensusRecord&) const = default;
};

struct CensusShard {
    int k = 0;
    int index = 0;
    int shardCount = 1;
    std::vector<CensusRecord> records;
};

struct CensusCounts {
    std::uint64_t r = 0, snd = 0, nice = 0, coNice = 0, bad = 0;
    bool operator==(const CensusCounts&) const = default;
};

struct NicenessCounts {
    std::uint64_t nice = 0, coNice = 0, bad = 0;
};

class EnumerationAborted : public std::runtime_error {
public:
    EnumerationAborted(std::uint64_t emitted, const std::string& why)
        : std::runtime_error("enumeration aborted after " + std::to_string(emitted) + " records: " + why),
          emitted(emitted) {}
    std::uint64_t emitted;
};

using BackendFactory = std::function<std::unique_ptr<SatBackend>()>;

namespace census {

BoolFn toBoolFn(Table t, int numVars);
Table toTable(const BoolFn& f);

// Minimum over all variable renamings, via adjacent-transposition delta swaps.
Table canonicalTable(Table t, int numVars);

// Canonical monotone representatives on numVars variables, sorted and
// cached per numVars.
std::vector<Table> canonicalRepresentatives(int numVars);

// One uncached step: the representatives on numVars variables from those on
// numVars-1.  Parallel over `upper`.
std::vector<Table> extendRepresentatives(int numVars, const std::vector<Table>& upper);

// Reference: canonicalize every monotone function with the generic
// permutation code.  Only practical up to 5 variables.
std::vector<Table> canonicalRepresentativesSerial(int numVars);

// Calls visit(g) for every monotone g <= bound (bound monotone) on numVars
// variables.  Stops early when visit returns false; returns false if stopped.
bool forEachMonotoneBelow(int numVars, Table bound, const std::function<bool(Table)>& visit);

std::uint64_t countMonotone(int numVars);

// Canonical representatives built from a seeded random subset of the
// (f1, f0) pairs, at most perRepresentative per f1, until `target` distinct
// canonical functions are collected.  Used to sample k=6 without the full run.
std::vector<Table> partialRepresentatives(int numVars, std::size_t target, std::size_t perRepresentative,
                                          std::uint64_t seed);

}  // namespace census

// Streams each canonical representative of R(k) once, in table order.
std::uint64_t enumerateR(int k, const std::function<void(const BoolFn&)>& sink);

// Marks nondegeneracy and (for nondegenerate records) safety; returns |SND|.
std::uint64_t filterSnd(int k, std::vector<CensusRecord>& records,
                        const std::function<bool(const BoolFn&)>& safety, int jobs = 1);

// Tags every SND record nice / co-nice / bad.  A solver UNKNOWN tags the
// record Unknown and throws SolverUnknownError after the pass.
NicenessCounts classifyNiceness(int k, std::vector<CensusRecord>& records, const BackendFactory& backends,
                                int jobs = 1);

CensusCounts countRecords(const std::vector<CensusRecord>& records);

// Checks monotonicity and canonicity on up to sampleSize random records.
// Returns the number of records checked; throws std::logic_error on failure.
std::size_t spotCheck(const std::vector<CensusRecord>& records, std::size_t sampleSize, std::uint64_t seed);

int shardOf(const BoolFn& f, int shardCount);
std::vector<CensusShard> partitionShards(int k, const std::vector<CensusRecord>& records, int shardCount);

// Union of shards sorted by table.  The same shard supplied twice is merged
// idempotently; one function in two different shards throws.
std::vector<CensusRecord> mergeShards(const std::vector<CensusShard>& shards);

std::string formatRecord(const CensusRecord& r);
CensusRecord parseRecord(std::string_view line);

void writeShardFile(const std::filesystem::path& path, const CensusShard& shard);
CensusShard readShardFile(const std::filesystem::path& path, int k, int index, int shardCount);

}  // namespace hq

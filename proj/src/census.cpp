#include "hq/census.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <type_traits>
#include <unordered_set>

#include <omp.h>

namespace hq {

namespace {

constexpr int kMaxTableVars = 7;

Table allOnes(int numVars) {
    int bits = 1 << numVars;
    return bits >= 128 ? ~Table{0} : ((Table{1} << bits) - 1);
}

struct VarMasks {
    std::array<Table, kMaxTableVars> v{};
    VarMasks() {
        for (int j = 0; j < kMaxTableVars; ++j)
            for (int p = 0; p < 128; ++p)
                if ((p >> j) & 1) v[j] |= Table{1} << p;
    }
};

const VarMasks& masks() {
    static const VarMasks m;
    return m;
}

// Swap variables i and i+1.
inline Table swapAdjacent(Table t, int i) {
    const auto& v = masks().v;
    int s = 1 << i;
    Table up = v[i] & ~v[i + 1];
    Table keep = ~(up | (up << s));
    return (t & keep) | ((t & up) << s) | ((t >> s) & up);
}

// Positions of the adjacent transpositions that walk all n! orders
// (Steinhaus-Johnson-Trotter).
const std::vector<int>& plainChanges(int n) {
    static std::array<std::vector<int>, kMaxTableVars + 1> cache;
    static std::once_flag flags[kMaxTableVars + 1];
    std::call_once(flags[n], [n] {
        std::vector<int> perm(n), dir(n, -1), out;
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (;;) {
            int mobile = -1, pos = -1;
            for (int i = 0; i < n; ++i) {
                int j = i + dir[perm[i]];
                if (j < 0 || j >= n || perm[j] > perm[i]) continue;
                if (perm[i] > mobile) {
                    mobile = perm[i];
                    pos = i;
                }
            }
            if (mobile < 0) break;
            int j = pos + dir[mobile];
            std::swap(perm[pos], perm[j]);
            out.push_back(std::min(pos, j));
            for (int e = mobile + 1; e < n; ++e) dir[e] = -dir[e];
        }
        cache[n] = std::move(out);
    });
    return cache[n];
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct TableHash {
    std::size_t operator()(Table t) const {
        return splitmix(static_cast<std::uint64_t>(t) ^ splitmix(static_cast<std::uint64_t>(t >> 64)));
    }
};

// Non-owning callable reference; keeps the recursion below monomorphic.
class VisitRef {
public:
    template <class F>
        requires(!std::is_same_v<std::remove_cv_t<F>, VisitRef>)
    VisitRef(F& f) : obj_(&f), call_([](void* o, Table t) { return (*static_cast<F*>(o))(t); }) {}
    bool operator()(Table t) const { return call_(obj_, t); }

private:
    void* obj_;
    bool (*call_)(void*, Table);
};

bool belowImpl(int n, Table bound, VisitRef visit) {
    if (n == 0) {
        if (!visit(Table{0})) return false;
        if (bound & 1) return visit(Table{1});
        return true;
    }
    int half = 1 << (n - 1);
    Table lowMask = allOnes(n - 1);
    Table h0 = bound & lowMask;
    Table h1 = (bound >> half) & lowMask;
    auto outer = [&](Table g1) {
        auto inner = [&](Table g0) { return visit(g0 | (g1 << half)); };
        return belowImpl(n - 1, h0 & g1, VisitRef(inner));
    };
    return belowImpl(n - 1, h1, VisitRef(outer));
}

void checkNumVars(int numVars) {
    if (numVars < 0 || numVars > kMaxTableVars) throw std::out_of_range("census tables support at most 7 variables");
}

// Sharded concurrent dedup set.
class ShardedSet {
public:
    explicit ShardedSet(std::size_t shards) : sets_(shards), locks_(shards) {}
    void insert(std::vector<Table>& batch) {
        std::sort(batch.begin(), batch.end());
        batch.erase(std::unique(batch.begin(), batch.end()), batch.end());
        std::vector<std::vector<Table>> byShard(sets_.size());
        for (Table t : batch) byShard[TableHash{}(t) % sets_.size()].push_back(t);
        for (std::size_t s = 0; s < sets_.size(); ++s) {
            if (byShard[s].empty()) continue;
            std::lock_guard<std::mutex> g(locks_[s]);
            sets_[s].insert(byShard[s].begin(), byShard[s].end());
        }
        batch.clear();
    }
    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& s : sets_) n += s.size();
        return n;
    }
    std::vector<Table> sorted() const {
        std::vector<Table> out;
        out.reserve(size());
        for (const auto& s : sets_) out.insert(out.end(), s.begin(), s.end());
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::vector<std::unordered_set<Table, TableHash>> sets_;
    std::vector<std::mutex> locks_;
};

template <class F>
void parallelFor(std::size_t n, int jobs, F&& body) {
    std::exception_ptr err;
    std::mutex errLock;
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(jobs, 1))
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> g(errLock);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

std::uint64_t stableHash(const BoolFn& f) {
    std::uint64_t h = splitmix(static_cast<std::uint64_t>(f.k()));
    for (auto w : f.words()) h = splitmix(h ^ w);
    return h;
}

}  // namespace

namespace census {

BoolFn toBoolFn(Table t, int numVars) {
    checkNumVars(numVars);
    if (numVars < 1) throw std::out_of_range("BoolFn needs at least one variable");
    if (t & ~allOnes(numVars)) throw std::invalid_argument("table has bits beyond 2^numVars");
    std::vector<std::uint64_t> words{static_cast<std::uint64_t>(t)};
    if (numVars == 7) words.push_back(static_cast<std::uint64_t>(t >> 64));
    return BoolFn::fromWords(numVars - 1, std::move(words));
}

Table toTable(const BoolFn& f) {
    checkNumVars(f.numVars());
    auto w = f.words();
    Table t = w[0];
    if (w.size() > 1) t |= Table{w[1]} << 64;
    return t;
}

Table canonicalTable(Table t, int numVars) {
    checkNumVars(numVars);
    Table best = t;
    for (int pos : plainChanges(numVars)) {
        t = swapAdjacent(t, pos);
        if (t < best) best = t;
    }
    return best;
}

bool forEachMonotoneBelow(int numVars, Table bound, const std::function<bool(Table)>& visit) {
    checkNumVars(numVars);
    auto v = [&](Table g) { return visit(g); };
    return belowImpl(numVars, bound, VisitRef(v));
}

std::uint64_t countMonotone(int numVars) {
    checkNumVars(numVars);
    std::uint64_t n = 0;
    auto v = [&](Table) {
        ++n;
        return true;
    };
    belowImpl(numVars, allOnes(numVars), VisitRef(v));
    return n;
}

std::vector<Table> extendRepresentatives(int numVars, const std::vector<Table>& upper) {
    checkNumVars(numVars);
    if (numVars == 0) return {Table{0}, Table{1}};
    // Every orbit has a member whose upper cofactor is canonical.
    int half = 1 << (numVars - 1);
    ShardedSet seen(64);
#pragma omp parallel
    {
        std::vector<Table> local;
#pragma omp for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(upper.size()); ++i) {
            Table f1 = upper[static_cast<std::size_t>(i)];
            auto visit = [&](Table f0) {
                local.push_back(canonicalTable(f0 | (f1 << half), numVars));
                if (local.size() >= (1u << 16)) seen.insert(local);
                return true;
            };
            belowImpl(numVars - 1, f1, VisitRef(visit));
        }
        seen.insert(local);
    }
    return seen.sorted();
}

std::vector<Table> canonicalRepresentatives(int numVars) {
    checkNumVars(numVars);
    static std::mutex cacheLock;
    static std::map<int, std::vector<Table>> cache;
    {
        std::lock_guard<std::mutex> g(cacheLock);
        if (auto it = cache.find(numVars); it != cache.end()) return it->second;
    }
    std::vector<Table> result =
        numVars == 0 ? extendRepresentatives(0, {}) : extendRepresentatives(numVars, canonicalRepresentatives(numVars - 1));
    std::lock_guard<std::mutex> g(cacheLock);
    cache.emplace(numVars, result);
    return result;
}

std::vector<Table> canonicalRepresentativesSerial(int numVars) {
    if (numVars < 1 || numVars > 5) throw std::out_of_range("serial reference supports 1..5 variables");
    std::vector<Table> out;
    auto visit = [&](Table t) {
        out.push_back(toTable(canonicalize(toBoolFn(t, numVars))));
        return true;
    };
    belowImpl(numVars, allOnes(numVars), VisitRef(visit));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Table> partialRepresentatives(int numVars, std::size_t target, std::size_t perRepresentative,
                                          std::uint64_t seed) {
    checkNumVars(numVars);
    if (numVars < 1) throw std::out_of_range("need at least one variable");
    std::vector<Table> upper = canonicalRepresentatives(numVars - 1);
    std::mt19937_64 rng(seed);
    std::shuffle(upper.begin(), upper.end(), rng);
    int half = 1 << (numVars - 1);
    ShardedSet seen(64);
    constexpr std::size_t chunk = 64;
    for (std::size_t start = 0; start < upper.size() && seen.size() < target; start += chunk) {
        std::size_t end = std::min(upper.size(), start + chunk);
#pragma omp parallel
        {
            std::vector<Table> local;
#pragma omp for schedule(dynamic, 1)
            for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(start); i < static_cast<std::ptrdiff_t>(end); ++i) {
                Table f1 = upper[static_cast<std::size_t>(i)];
                std::size_t taken = 0;
                auto visit = [&](Table f0) {
                    local.push_back(canonicalTable(f0 | (f1 << half), numVars));
                    return ++taken < perRepresentative;
                };
                belowImpl(numVars - 1, f1, VisitRef(visit));
            }
            seen.insert(local);
        }
    }
    std::vector<Table> out = seen.sorted();
    if (out.size() > target) {
        std::shuffle(out.begin(), out.end(), rng);
        out.resize(target);
        std::sort(out.begin(), out.end());
    }
    return out;
}

}  // namespace census

std::uint64_t enumerateR(int k, const std::function<void(const BoolFn&)>& sink) {
    if (k < 1 || k > kMaxCensusK) throw std::out_of_range("enumerateR supports 1 <= k <= 6");
    std::vector<Table> reps = census::canonicalRepresentatives(k + 1);
    std::uint64_t emitted = 0;
    for (Table t : reps) {
        try {
            sink(census::toBoolFn(t, k + 1));
        } catch (const std::exception& e) {
            throw EnumerationAborted(emitted, e.what());
        }
        ++emitted;
    }
    return emitted;
}

std::uint64_t filterSnd(int k, std::vector<CensusRecord>& records, const std::function<bool(const BoolFn&)>& safety,
                        int jobs) {
    parallelFor(records.size(), jobs, [&](std::size_t i) {
        CensusRecord& r = records[i];
        if (r.fn.k() != k) throw std::invalid_argument("record k does not match census k");
        r.nondegenerate = isNondegenerate(r.fn);
        r.safe = r.nondegenerate ? std::optional<bool>(safety(r.fn)) : std::nullopt;
    });
    return static_cast<std::uint64_t>(
        std::count_if(records.begin(), records.end(), [](const CensusRecord& r) { return r.inSnd(); }));
}

NicenessCounts classifyNiceness(int k, std::vector<CensusRecord>& records, const BackendFactory& backends, int jobs) {
    std::vector<std::size_t> snd;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].inSnd()) snd.push_back(i);
    std::optional<SolverUnknownError> unknown;
    std::mutex lock;
    parallelFor(snd.size(), jobs, [&](std::size_t j) {
        CensusRecord& r = records[snd[j]];
        if (r.fn.k() != k) throw std::invalid_argument("record k does not match census k");
        auto backend = backends();
        NicenessVerdict v = classifyFunction(r.fn, *backend);
        r.niceness = v.niceness;
        if (v.niceness == Niceness::Unknown) {
            std::lock_guard<std::mutex> g(lock);
            if (!unknown)
                unknown.emplace(r.fn, v.nice.status == SatStatus::Unknown ? v.nice.diagnostic : v.coNice.diagnostic);
        }
    });
    if (unknown) throw *unknown;
    NicenessCounts c;
    for (std::size_t i : snd) {
        switch (records[i].niceness) {
            case Niceness::Nice: ++c.nice; break;
            case Niceness::CoNice: ++c.coNice; break;
            case Niceness::Bad: ++c.bad; break;
            default: throw std::logic_error("SND record left unclassified");
        }
    }
    return c;
}

CensusCounts countRecords(const std::vector<CensusRecord>& records) {
    CensusCounts c;
    c.r = records.size();
    for (const auto& r : records) {
        if (!r.inSnd()) continue;
        ++c.snd;
        if (r.niceness == Niceness::Nice) ++c.nice;
        if (r.niceness == Niceness::CoNice) ++c.coNice;
        if (r.niceness == Niceness::Bad) ++c.bad;
    }
    return c;
}

std::size_t spotCheck(const std::vector<CensusRecord>& records, std::size_t sampleSize, std::uint64_t seed) {
    std::vector<std::size_t> idx(records.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (sampleSize < idx.size()) {
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(sampleSize);
    }
    parallelFor(idx.size(), omp_get_max_threads(), [&](std::size_t j) {
        const BoolFn& f = records[idx[j]].fn;
        if (!isMonotone(f)) throw std::logic_error("census record is not monotone: " + serialize(f));
        Table t = census::toTable(f);
        if (census::canonicalTable(t, f.numVars()) != t)
            throw std::logic_error("census record is not canonical: " + serialize(f));
    });
    return idx.size();
}

int shardOf(const BoolFn& f, int shardCount) {
    if (shardCount < 1) throw std::invalid_argument("shard count must be positive");
    return static_cast<int>(stableHash(f) % static_cast<std::uint64_t>(shardCount));
}

std::vector<CensusShard> partitionShards(int k, const std::vector<CensusRecord>& records, int shardCount) {
    std::vector<CensusShard> shards(static_cast<std::size_t>(shardCount));
    for (int i = 0; i < shardCount; ++i) shards[i] = {k, i, shardCount, {}};
    for (const auto& r : records) shards[static_cast<std::size_t>(shardOf(r.fn, shardCount))].records.push_back(r);
    for (auto& s : shards)
        std::sort(s.records.begin(), s.records.end(), [](const auto& a, const auto& b) { return a.fn < b.fn; });
    return shards;
}

std::vector<CensusRecord> mergeShards(const std::vector<CensusShard>& shards) {
    std::vector<std::pair<CensusRecord, int>> all;
    for (const auto& s : shards) {
        if (s.k != shards.front().k) throw std::invalid_argument("shards disagree on k");
        for (const auto& r : s.records) all.emplace_back(r, s.index);
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first.fn < b.first.fn; });
    std::vector<CensusRecord> out;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i > 0 && all[i].first.fn == all[i - 1].first.fn) {
            if (all[i].second != all[i - 1].second || !(all[i].first == all[i - 1].first))
                throw std::logic_error("function " + serialize(all[i].first.fn) + " appears in two shards");
            continue;
        }
        out.push_back(all[i].first);
    }
    return out;
}

std::string formatRecord(const CensusRecord& r) {
    std::string safe = r.safe ? (*r.safe ? "1" : "0") : "-";
    return serialize(r.fn) + " nondeg:" + (r.nondegenerate ? "1" : "0") + " safe:" + safe +
           ", nice:" + nicenessName(r.niceness);
}

CensusRecord parseRecord(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::string kTok, tTok, nTok, sTok, cTok;
    in >> kTok >> tTok >> nTok >> sTok >> cTok;
    auto bad = [&] { return std::invalid_argument("malformed census record `" + std::string(line) + "`"); };
    if (nTok.rfind("nondeg:", 0) != 0 || sTok.rfind("safe:", 0) != 0 || cTok.rfind("nice:", 0) != 0) throw bad();
    CensusRecord r;
    r.fn = parseSerialized(kTok + " " + tTok);
    std::string nd = nTok.substr(7);
    if (nd != "0" && nd != "1") throw bad();
    r.nondegenerate = nd == "1";
    std::string s = sTok.substr(5);
    if (!s.empty() && s.back() == ',') s.pop_back();
    if (s == "1")
        r.safe = true;
    else if (s == "0")
        r.safe = false;
    else if (s != "-")
        throw bad();
    std::string n = cTok.substr(5);
    if (n == "N")
        r.niceness = Niceness::Nice;
    else if (n == "coN")
        r.niceness = Niceness::CoNice;
    else if (n == "BAD")
        r.niceness = Niceness::Bad;
    else if (n == "-")
        r.niceness = Niceness::NotComputed;
    else
        throw bad();
    return r;
}

void writeShardFile(const std::filesystem::path& path, const CensusShard& shard) {
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        for (const auto& r : shard.records) out << formatRecord(r) << '\n';
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

CensusShard readShardFile(const std::filesystem::path& path, int k, int index, int shardCount) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    CensusShard s{k, index, shardCount, {}};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        s.records.push_back(parseRecord(line));
        if (s.records.back().fn.k() != k) throw std::runtime_error("record with wrong k in " + path.string());
    }
    return s;
}

}  // namespace hq

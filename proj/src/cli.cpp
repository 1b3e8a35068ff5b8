#include "hq/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "hq/compile.hpp"
#include "hq/lattice.hpp"
#include "hq/niceness.hpp"

namespace hq::cli {

namespace fs = std::filesystem;

namespace {

using KeyValues = std::map<std::string, std::string>;

KeyValues readKeyValues(const fs::path& path) {
    KeyValues kv;
    std::ifstream in(path);
    if (!in) throw CliError(kExitIo, "cannot read " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

void writeText(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        out << text;
        if (!out) throw CliError(kExitIo, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw CliError(kExitIo, "cannot write " + path.string() + ": " + ec.message());
}

std::string readText(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw CliError(kExitIo, "cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path censusDir(const fs::path& out, int k) { return out / "census" / ("k" + std::to_string(k)); }
fs::path shardPath(const fs::path& dir, int i) { return dir / ("shard" + std::to_string(i) + ".txt"); }

struct Manifest {
    int k = 0;
    int shards = 0;
    std::map<int, std::uint64_t> done;  // shard -> record count
    bool complete = false;
    CensusCounts counts;
};

std::optional<Manifest> loadManifest(const fs::path& dir) {
    fs::path p = dir / "MANIFEST";
    if (!fs::exists(p)) return std::nullopt;
    KeyValues kv = readKeyValues(p);
    Manifest m;
    try {
        m.k = std::stoi(kv.at("k"));
        m.shards = std::stoi(kv.at("shards"));
        for (const auto& [key, value] : kv)
            if (key.rfind("shard.", 0) == 0) m.done[std::stoi(key.substr(6))] = std::stoull(value);
        m.complete = kv.count("complete") && kv["complete"] == "1";
        if (m.complete) {
            m.counts = {std::stoull(kv.at("R")), std::stoull(kv.at("SND")), std::stoull(kv.at("N")),
                        std::stoull(kv.at("coN")), std::stoull(kv.at("BAD"))};
        }
    } catch (const std::exception&) {
        throw CliError(kExitIo, "malformed " + p.string());
    }
    return m;
}

void saveManifest(const fs::path& dir, const Manifest& m) {
    std::ostringstream s;
    s << "k=" << m.k << "\nshards=" << m.shards << '\n';
    for (const auto& [i, n] : m.done) s << "shard." << i << '=' << n << '\n';
    if (m.complete) {
        s << "R=" << m.counts.r << "\nSND=" << m.counts.snd << "\nN=" << m.counts.nice << "\ncoN=" << m.counts.coNice
          << "\nBAD=" << m.counts.bad << "\ncomplete=1\n";
    }
    writeText(dir / "MANIFEST", s.str());
}

class WitnessCollector {
public:
    void add(const CensusRecord& r) {
        switch (r.niceness) {
            case Niceness::Nice:
                nice_.push_back(r.fn);
                std::sort(nice_.begin(), nice_.end());
                if (nice_.size() > 3) nice_.pop_back();
                break;
            case Niceness::CoNice: coNice_.push_back(r.fn); break;
            case Niceness::Bad: bad_.push_back(r.fn); break;
            default: break;
        }
    }
    void finish(CensusRow& row) {
        auto out = [](std::vector<BoolFn>& fns) {
            std::sort(fns.begin(), fns.end());
            std::vector<std::string> s;
            for (const auto& f : fns) s.push_back(serialize(f));
            return s;
        };
        row.niceWitnesses = out(nice_);
        row.coNiceWitnesses = out(coNice_);
        row.badWitnesses = out(bad_);
    }

private:
    std::vector<BoolFn> nice_, coNice_, bad_;
};

BackendFactory backendFactory(const RunConfig& cfg) {
    return [solver = cfg.solver, seed = cfg.seed] { return makeBackend(solver, seed); };
}

void writeBadDiagnostics(const RunConfig& cfg, const CensusRecord& r) {
    std::ostringstream s;
    s << formatRecord(r) << '\n';
    s << "cnf: " << minimizedCnf(r.fn).toString() << '\n';
    s << "mobius(bottom,top): " << mobiusBottomTop(r.fn) << '\n';
    auto backend = makeBackend(cfg.solver, cfg.seed);
    NicenessVerdict v = classifyFunction(r.fn, *backend);
    s << "nice(phi): " << statusName(v.nice.status) << '\n';
    s << "nice(not phi): " << statusName(v.coNice.status) << '\n';
    s << "dimacs nice(phi):\n" << emitDimacs(buildNiceInstance(r.fn));
    writeText(cfg.out / "bad" / ("k" + std::to_string(r.fn.k()) + "_" + toHex(r.fn) + ".txt"), s.str());
}

void checkRow(const CensusRow& row) {
    const CensusCounts& c = row.counts;
    if (c.nice + c.coNice + c.bad != c.snd)
        throw std::logic_error("k=" + std::to_string(row.k) + ": N + co-N + BAD differs from SND");
}

CensusRow rowFromRecords(int k, const std::vector<CensusRecord>& recs) {
    CensusRow row;
    row.k = k;
    row.counts = countRecords(recs);
    WitnessCollector w;
    for (const auto& r : recs) w.add(r);
    w.finish(row);
    return row;
}

double secondsSince(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

BoolFn parseFunctionArg(const std::string& spec, std::optional<int> k) {
    BoolFn f;
    try {
        f = parseFunction(spec, k);
    } catch (const std::exception& e) {
        throw CliError(kExitUsage, std::string("cannot parse function: ") + e.what());
    }
    if (f.k() < 1 || f.k() > 12) throw CliError(kExitUsage, "k must lie in 1..12 for a single function");
    return f;
}

void printDecomposition(std::ostream& out, const NiceDecomposition& d) {
    for (std::size_t l = 0; l < d.boxes.size(); ++l) {
        out << "  box " << l << ":";
        if (d.boxes[l].empty()) out << " (empty)";
        for (VarSet nu : d.boxes[l]) out << ' ' << formatVarSet(nu);
        out << '\n';
    }
}

NiceCheck checkOrThrow(const BoolFn& f, const RunConfig& cfg) {
    auto backend = makeBackend(cfg.solver, cfg.seed);
    NiceCheck c = checkNice(f, *backend);
    if (c.status == SatStatus::Unknown) throw CliError(kExitSolverUnknown, "solver returned UNKNOWN: " + c.diagnostic);
    return c;
}

}  // namespace

std::string formatReport(const Report& report) {
    std::ostringstream s;
    for (const auto& row : report.rows) {
        std::string p = "k" + std::to_string(row.k) + ".";
        s << p << "R=" << row.counts.r << '\n'
          << p << "SND=" << row.counts.snd << '\n'
          << p << "N=" << row.counts.nice << '\n'
          << p << "coN=" << row.counts.coNice << '\n'
          << p << "BAD=" << row.counts.bad << '\n';
        auto list = [&](const char* name, const std::vector<std::string>& ws) {
            for (std::size_t i = 0; i < ws.size(); ++i) s << p << "witness." << name << '.' << i << '=' << ws[i] << '\n';
        };
        list("N", row.niceWitnesses);
        list("coN", row.coNiceWitnesses);
        list("BAD", row.badWitnesses);
    }
    return s.str();
}

std::string renderTable1(const Report& report) {
    std::ostringstream s;
    s << std::setw(2) << "k" << std::setw(12) << "|R(k)|" << std::setw(12) << "|SND(k)|" << std::setw(12) << "|N(k)|"
      << std::setw(12) << "|co-N(k)|" << std::setw(12) << "|BAD(k)|" << '\n';
    for (const auto& row : report.rows) {
        const CensusCounts& c = row.counts;
        s << std::setw(2) << row.k << std::setw(12) << c.r << std::setw(12) << c.snd << std::setw(12) << c.nice
          << std::setw(12) << c.coNice << std::setw(12) << c.bad << '\n';
    }
    return s.str();
}

std::vector<CensusRecord> readCensus(const fs::path& out, int k) {
    fs::path dir = censusDir(out, k);
    auto m = loadManifest(dir);
    if (!m || !m->complete || m->k != k)
        throw CliError(kExitIo, "no complete census for k=" + std::to_string(k) + " in " + dir.string());
    std::vector<CensusShard> shards;
    for (int i = 0; i < m->shards; ++i) {
        try {
            shards.push_back(readShardFile(shardPath(dir, i), k, i, m->shards));
        } catch (const std::exception& e) {
            throw CliError(kExitIo, e.what());
        }
    }
    return mergeShards(shards);
}

CensusRow cmdCensus(const RunConfig& cfg, std::ostream& log) {
    if (cfg.k < 1 || cfg.k > kMaxCensusK) throw CliError(kExitUsage, "census needs 1 <= k <= 6");
    if (cfg.jobs < 1 || cfg.shards < 1) throw CliError(kExitUsage, "--jobs and --shards must be positive");
    auto start = std::chrono::steady_clock::now();
    fs::path dir = censusDir(cfg.out, cfg.k);

    if (cfg.checkOnly) {
        CensusRow row = rowFromRecords(cfg.k, readCensus(cfg.out, cfg.k));
        checkRow(row);
        row.fromCheckpoint = true;
        row.seconds = secondsSince(start);
        return row;
    }

    auto manifest = loadManifest(dir);
    if (manifest && (manifest->k != cfg.k || manifest->shards != cfg.shards))
        throw CliError(kExitUsage, dir.string() + " was written with " + std::to_string(manifest->shards) +
                                       " shards; rerun with --shards " + std::to_string(manifest->shards));
    if (manifest && manifest->complete) {
        CensusRow row = rowFromRecords(cfg.k, readCensus(cfg.out, cfg.k));
        if (!(row.counts == manifest->counts)) throw CliError(kExitIo, "census files disagree with " + dir.string());
        checkRow(row);
        row.fromCheckpoint = true;
        row.seconds = secondsSince(start);
        log << "k=" << cfg.k << ": complete checkpoint, nothing to do\n";
        return row;
    }
    if (cfg.k == 6 && !cfg.includeK6)
        throw CliError(kExitUnsupported, "k=6 is a long run; pass --include-k6 to start it");

    Manifest m = manifest.value_or(Manifest{cfg.k, cfg.shards, {}, false, {}});
    omp_set_num_threads(cfg.jobs);

    std::vector<std::vector<Table>> byShard(static_cast<std::size_t>(cfg.shards));
    std::uint64_t total = enumerateR(cfg.k, [&](const BoolFn& f) {
        byShard[static_cast<std::size_t>(shardOf(f, cfg.shards))].push_back(census::toTable(f));
    });
    log << "k=" << cfg.k << ": " << total << " canonical functions enumerated\n";

    CensusRow row;
    row.k = cfg.k;
    WitnessCollector witnesses;
    BackendFactory factory = backendFactory(cfg);
    for (int i = 0; i < cfg.shards; ++i) {
        auto& tables = byShard[static_cast<std::size_t>(i)];
        fs::path path = shardPath(dir, i);
        std::vector<CensusRecord> recs;
        auto done = m.done.find(i);
        if (done != m.done.end() && done->second == tables.size() && fs::exists(path)) {
            recs = readShardFile(path, cfg.k, i, cfg.shards).records;
        } else {
            recs.reserve(tables.size());
            for (Table t : tables) recs.push_back({census::toBoolFn(t, cfg.k + 1), false, std::nullopt, Niceness::NotComputed});
            filterSnd(cfg.k, recs, [](const BoolFn& f) { return isSafe(f); }, cfg.jobs);
            try {
                classifyNiceness(cfg.k, recs, factory, cfg.jobs);
            } catch (const SolverUnknownError& e) {
                throw CliError(kExitSolverUnknown, e.what());
            }
            spotCheck(recs, 1000, cfg.seed + static_cast<std::uint64_t>(i));
            for (const auto& r : recs)
                if (r.niceness == Niceness::Bad) writeBadDiagnostics(cfg, r);
            try {
                writeShardFile(path, {cfg.k, i, cfg.shards, recs});
            } catch (const std::exception& e) {
                throw CliError(kExitIo, e.what());
            }
            m.done[i] = recs.size();
            saveManifest(dir, m);
        }
        CensusCounts c = countRecords(recs);
        row.counts.r += c.r;
        row.counts.snd += c.snd;
        row.counts.nice += c.nice;
        row.counts.coNice += c.coNice;
        row.counts.bad += c.bad;
        for (const auto& r : recs) witnesses.add(r);
        std::vector<Table>().swap(tables);
    }
    witnesses.finish(row);
    checkRow(row);
    m.complete = true;
    m.counts = row.counts;
    saveManifest(dir, m);
    writeText(dir / "report.txt", formatReport({{row}}));
    row.seconds = secondsSince(start);
    log << "k=" << cfg.k << ": SND=" << row.counts.snd << " N=" << row.counts.nice << " coN=" << row.counts.coNice
        << " BAD=" << row.counts.bad << " (" << std::fixed << std::setprecision(2) << row.seconds << " s)\n"
        << std::defaultfloat;
    if (row.counts.bad > 0)
        log << "*** " << row.counts.bad << " BAD function(s) found for k=" << cfg.k << "; diagnostics in "
            << (cfg.out / "bad").string() << " ***\n";
    return row;
}

Report cmdTable1(const RunConfig& cfg, std::ostream& log) {
    Report report;
    int last = cfg.includeK6 ? 6 : 5;
    for (int k = 1; k <= last; ++k) {
        RunConfig c = cfg;
        c.k = k;
        report.rows.push_back(cmdCensus(c, log));
    }
    writeText(cfg.out / "report.txt", formatReport(report));
    writeText(cfg.out / "table1.txt", renderTable1(report));
    return report;
}

int cmdInspect(const std::string& fnSpec, std::optional<int> k, const std::optional<fs::path>& dotPath,
               const RunConfig& cfg, std::ostream& out) {
    BoolFn f = parseFunctionArg(fnSpec, k);
    bool monotone = isMonotone(f);
    bool nondeg = isNondegenerate(f);
    out << "function: " << fnSpec << '\n';
    out << "k: " << f.k() << '\n';
    out << "table: " << toHex(f) << '\n';
    out << "monotone: " << (monotone ? "yes" : "no") << '\n';
    out << "dep: " << formatVarSet(dep(f)) << '\n';
    out << "nondegenerate: " << (nondeg ? "yes" : "no") << '\n';
    if (monotone && !f.isConstant()) out << "minimized cnf: " << minimizedCnf(f).toString() << '\n';

    std::optional<bool> safe;
    if (monotone && nondeg && !f.isConstant()) {
        CnfLattice lattice = buildCnfLattice(f);
        MobiusRow row = mobiusRow(lattice);
        std::int64_t mu = mobiusBottomTop(f);
        safe = mu == 0;
        out << "lattice: " << lattice.size() << " elements\n";
        out << "mobius(bottom,top): " << mu << '\n';
        out << "safe: " << (*safe ? "yes" : "no") << '\n';
        if (dotPath) {
            writeText(*dotPath, exportHasseDot(lattice, row));
            out << "hasse diagram: " << dotPath->string() << '\n';
        }
    } else {
        const char* why = !monotone ? "not monotone" : f.isConstant() ? "constant function" : "degenerate function";
        out << "lattice: skipped (" << why << ")\n";
    }

    NiceCheck nice = checkOrThrow(f, cfg);
    out << "nice(phi): " << (nice.status == SatStatus::Sat ? "SAT" : "UNSAT") << '\n';
    if (nice.decomposition) {
        out << "decomposition of phi (verified):\n";
        printDecomposition(out, *nice.decomposition);
    }
    NiceCheck coNice = checkOrThrow(negate(f), cfg);
    out << "nice(not phi): " << (coNice.status == SatStatus::Sat ? "SAT" : "UNSAT") << '\n';
    if (coNice.decomposition) {
        out << "decomposition of not phi (verified):\n";
        printDecomposition(out, *coNice.decomposition);
    }

    out << "class: ";
    if (!safe || !*safe)
        out << "- (not in SND)\n";
    else if (nice.status == SatStatus::Sat)
        out << "N\n";
    else if (coNice.status == SatStatus::Sat)
        out << "co-N\n";
    else
        out << "BAD  *** neither phi nor its negation is nice ***\n";
    return kExitOk;
}

int cmdProbability(const std::string& fnSpec, std::optional<int> k, const fs::path& dbPath,
                   const std::optional<fs::path>& circuitPath, const RunConfig& cfg, std::ostream& out) {
    BoolFn f = parseFunctionArg(fnSpec, k);
    std::string text = readText(dbPath);
    TidDatabase db(f.k());
    try {
        db = parseDatabase(text, f.k());
    } catch (const std::exception& e) {
        throw CliError(kExitUsage, dbPath.string() + ": " + e.what());
    }
    HQuery q(f.k(), f);
    auto backend = makeBackend(cfg.solver, cfg.seed);
    std::optional<CompiledQuery> cq;
    try {
        cq = compileQuery(q, db, *backend, CompileOptions{cfg.nodeBudget});
    } catch (const BudgetExceeded& e) {
        throw CliError(kExitBudget, e.what());
    } catch (const SolverUnknownError& e) {
        throw CliError(kExitSolverUnknown, e.what());
    }
    if (!cq) {
        out << "unsupported: BAD function, neither phi nor its negation is nice\n";
        return kExitUnsupported;
    }
    const Circuit& c = cq->compilation.circuit;
    Rational p = evalProbability(c, db.probabilities());
    CircuitStats st = stats(c);
    out << "route: " << (cq->route == CompileRoute::Nice ? "nice" : "co-nice") << '\n';
    out << "tuples: " << db.size() << '\n';
    out << "probability: " << p.get_str() << '\n';
    out << "approx: " << std::setprecision(12) << p.get_d() << std::defaultfloat << '\n';
    out << "gates: " << st.gates << '\n';
    out << "edges: " << st.edges << '\n';
    out << "decision nodes: " << cq->compilation.decisionNodes << '\n';
    int code = kExitOk;
    if (db.size() <= 20) {
        Rational b = bruteForcePqe(q, db);
        bool agree = b == p;
        out << "brute-force: " << b.get_str() << (agree ? " (agrees)" : " (DISAGREES)") << '\n';
        if (!agree) code = kExitMismatch;
    } else {
        out << "brute-force: skipped (" << db.size() << " tuples)\n";
    }
    if (circuitPath) {
        writeText(*circuitPath, dumpCircuit(c));
        out << "circuit: " << circuitPath->string() << '\n';
    }
    return code;
}

}  // namespace hq::cli

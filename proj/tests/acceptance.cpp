// Acceptance run: one PASS/FAIL line per criterion.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "hq/census.hpp"
#include "hq/cli.hpp"
#include "hq/compile.hpp"
#include "hq/lattice.hpp"
#include "oracles.hpp"

using namespace hq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Structural checks shared by criteria 3-5, reported under criterion 7.
struct StructureLog {
    std::size_t circuits = 0, exhaustive = 0, sat = 0, failures = 0;
    std::string firstFailure;

    void check(const Circuit& c, CompileRoute route, const std::string& what) {
        ++circuits;
        std::size_t vars = stats(c).vars;
        DeterminismMode mode = vars <= kAutoExhaustiveVars ? DeterminismMode::Exhaustive : DeterminismMode::Sat;
        (mode == DeterminismMode::Exhaustive ? exhaustive : sat)++;
        bool ok = checkDecomposable(c) && checkDeterministic(c, mode);
        if (route == CompileRoute::Nice)
            ok = ok && isNnf(c);
        else
            ok = ok && nonLeafNotCount(c) == 1;
        if (!ok && failures++ == 0) firstFailure = what;
    }
};

StructureLog structure;

std::vector<CensusRecord> table1Records[6];

void report(int n, const std::string& title, const std::function<Outcome()>& body, int& failed) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail << "; "
              << std::fixed << std::setprecision(1) << s << " s]" << std::defaultfloat << std::endl;
    if (!o.pass) ++failed;
}

std::string str(const CensusCounts& c) {
    std::ostringstream s;
    s << '(' << c.r << ',' << c.snd << ',' << c.nice << ',' << c.coNice << ',' << c.bad << ')';
    return s.str();
}

Outcome table1() {
    const CensusCounts expect[] = {{}, {5, 0, 0, 0, 0}, {10, 0, 0, 0, 0}, {30, 2, 2, 0, 0}, {210, 25, 25, 0, 0},
                                   {16353, 2531, 2529, 2, 0}};
    fs::path out = fs::temp_directory_path() / "hq_acceptance_table1";
    fs::remove_all(out);
    cli::RunConfig cfg;
    cfg.out = out;
    cfg.jobs = std::max(1, omp_get_max_threads());
    std::ostringstream log;
    cli::Report r = cli::cmdTable1(cfg, log);
    Outcome o;
    for (const auto& row : r.rows) {
        o.pass = o.pass && row.counts == expect[row.k];
        o.detail += (o.detail.empty() ? "" : " ") + str(row.counts);
        table1Records[row.k] = cli::readCensus(out, row.k);
    }
    o.pass = o.pass && r.rows.size() == 5;
    fs::remove_all(out);
    return o;
}

Outcome sampledK6() {
    std::vector<Table> sample = census::partialRepresentatives(7, 100000, 64, 2024);
    std::vector<CensusRecord> recs;
    recs.reserve(sample.size());
    for (Table t : sample) recs.push_back({census::toBoolFn(t, 7), false, std::nullopt, Niceness::NotComputed});
    int jobs = std::max(1, omp_get_max_threads());
    std::uint64_t snd = filterSnd(6, recs, [](const BoolFn& f) { return isSafe(f); }, jobs);

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < recs.size(); ++i)
        if (recs[i].inSnd()) idx.push_back(i);
    std::uint64_t nice = 0, coNice = 0, bad = 0, unverified = 0, unknown = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : nice, coNice, bad, unverified, unknown)
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const BoolFn& f = recs[idx[j]].fn;
        EmbeddedSolver solver;
        NicenessVerdict v = classifyFunction(f, solver);
        switch (v.niceness) {
            case Niceness::Nice:
                ++nice;
                unverified += !(v.nice.decomposition && verifyDecomposition(f, *v.nice.decomposition));
                break;
            case Niceness::CoNice:
                ++coNice;
                unverified += !(v.coNice.decomposition && verifyDecomposition(negate(f), *v.coNice.decomposition));
                break;
            case Niceness::Bad: ++bad; break;
            default: ++unknown; break;
        }
    }
    std::ostringstream d;
    d << sample.size() << " sampled, SND=" << snd << " N=" << nice << " co-N=" << coNice << " BAD=" << bad
      << " unverified=" << unverified << " unknown=" << unknown;
    return {sample.size() == 100000 && nice + coNice + bad == snd && unverified == 0 && unknown == 0, d.str()};
}

bool contains(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

Outcome q9EndToEnd() {
    cli::RunConfig cfg;
    std::ostringstream out;
    cli::cmdInspect("(2|3)&(0|3)&(1|3)&(0|1|2)", std::nullopt, std::nullopt, cfg, out);
    std::string text = out.str();
    BoolFn q9 = fixture::q9();
    EmbeddedSolver solver;
    NiceCheck c = checkNice(q9, solver);
    bool ok = contains(text, "mobius(bottom,top): 0\n") && contains(text, "safe: yes\n") &&
              contains(text, "nice(phi): SAT\n") && contains(text, "decomposition of phi (verified)") &&
              c.decomposition && c.decomposition->boxes.size() == 4 && verifyDecomposition(q9, *c.decomposition);
    bool hand = verifyDecomposition(q9, fixture::q9Boxes());

    // compile on the one-constant database and a two-constant one
    for (int n : {1, 2}) {
        TidDatabase db = fullDatabase(3, n, Rational(1, 2));
        Circuit circuit = compileNice(HQuery(3, q9), fixture::q9Boxes(), db);
        structure.check(circuit, CompileRoute::Nice, "q9 over " + std::to_string(n) + " constants");
        ok = ok && evalProbability(circuit, db.probabilities()) == bruteForcePqe(HQuery(3, q9), db);
    }
    return {ok && hand, std::string("inspect: safe, mu=0, nice; hand decomposition ") + (hand ? "verifies" : "fails")};
}

Outcome coNiceEndToEnd() {
    cli::RunConfig cfg;
    std::ostringstream out;
    cli::cmdInspect("24&034&013&12&15&05&35&23&02&25&014&45", 5, std::nullopt, cfg, out);
    std::string text = out.str();
    BoolFn f = fixture::coNice5();
    EmbeddedSolver solver;
    NicenessVerdict v = classifyFunction(f, solver);
    bool ok = contains(text, "safe: yes\n") && contains(text, "nice(phi): UNSAT\n") &&
              contains(text, "nice(not phi): SAT\n") && contains(text, "decomposition of not phi (verified)") &&
              v.niceness == Niceness::CoNice && verifyDecomposition(negate(f), *v.coNice.decomposition);

    std::mt19937_64 rng(5);
    TidDatabase full = fullDatabase(5, 1, Rational(1, 3));
    for (int trial = 0; trial < 4; ++trial) {
        std::vector<bool> keep(full.size());
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = trial == 0 || rng() % 3 != 0;
        TidDatabase db = restrictDatabase(full, keep);
        Circuit c = compileCoNice(HQuery(5, f), *v.coNice.decomposition, db);
        structure.check(c, CompileRoute::CoNice, "co-nice witness");
        ok = ok && evalProbability(c, db.probabilities()) == bruteForcePqe(HQuery(5, f), db);
    }
    return {ok, "inspect: safe, nice(phi) UNSAT, nice(not phi) SAT verified; co-nice circuits match brute force"};
}

// Probability profiles: 0, 1/2, 1 everywhere, then three random draws per tuple.
std::vector<std::vector<Rational>> profiles(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::vector<Rational>> out;
    for (Rational p : {Rational(0), Rational(1, 2), Rational(1)}) out.emplace_back(n, p);
    for (int draw = 0; draw < 3; ++draw) {
        std::vector<Rational> ps;
        for (std::size_t i = 0; i < n; ++i) {
            long den = 1 + static_cast<long>(rng() % 16);
            Rational p(static_cast<long>(rng() % static_cast<std::uint64_t>(den + 1)), den);
            p.canonicalize();
            ps.push_back(p);
        }
        out.push_back(ps);
    }
    return out;
}

Outcome probabilityOracle() {
    std::vector<BoolFn> functions;
    for (int k : {3, 4})
        for (const auto& r : table1Records[k])
            if (r.inSnd()) functions.push_back(r.fn);
    std::mt19937_64 rng(77);
    std::size_t comparisons = 0, mismatches = 0, databases = 0;
    for (const BoolFn& f : functions) {
        int k = f.k();
        HQuery q(k, f);
        EmbeddedSolver solver;
        NicenessVerdict v = classifyFunction(f, solver);
        if (v.niceness != Niceness::Nice && v.niceness != Niceness::CoNice) return {false, "unclassified SND function"};

        std::vector<TidDatabase> dbs;
        TidDatabase one = fullDatabase(k, 1, Rational(1, 2));
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << one.size()); ++m) {
            std::vector<bool> keep(one.size());
            for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = m >> i & 1;
            dbs.push_back(restrictDatabase(one, keep));
        }
        TidDatabase two = fullDatabase(k, 2, Rational(1, 2));
        dbs.push_back(two);
        for (int s = 0; s < 4; ++s) {
            std::vector<bool> keep(two.size());
            for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = rng() % 3 != 0;
            dbs.push_back(restrictDatabase(two, keep));
        }

        for (TidDatabase& db : dbs) {
            ++databases;
            Compilation c = v.niceness == Niceness::Nice
                                ? compileNiceDetailed(q, *v.nice.decomposition, db)
                                : compileCoNiceDetailed(q, *v.coNice.decomposition, db);
            structure.check(c.circuit, v.niceness == Niceness::Nice ? CompileRoute::Nice : CompileRoute::CoNice,
                            serialize(f));
            for (const auto& ps : profiles(db.size(), rng)) {
                for (std::size_t i = 0; i < db.size(); ++i) db.setProbability(i, ps[i]);
                ++comparisons;
                mismatches += evalProbability(c.circuit, db.probabilities()) != bruteForcePqe(q, db);
            }
        }
    }
    std::ostringstream d;
    d << functions.size() << " functions, " << databases << " databases, " << comparisons
      << " exact comparisons, " << mismatches << " mismatches";
    return {functions.size() == 27 && mismatches == 0, d.str()};
}

Outcome nicenessOracle() {
    std::size_t checked = 0, disagree = 0;
    auto compare = [&](const BoolFn& f) {
        EmbeddedSolver solver;
        NiceCheck c = checkNice(f, solver);
        bool sat = c.status == SatStatus::Sat;
        ++checked;
        if (c.status == SatStatus::Unknown || sat != bruteForceNice(f)) ++disagree;
    };
    for (std::uint64_t t = 0; t < 256; ++t) compare(BoolFn::fromPredicate(2, [&](VarSet m) { return (t >> m) & 1; }));
    std::size_t monotone = 0;
    census::forEachMonotoneBelow(4, census::toTable(BoolFn::constant(3, true)), [&](Table t) {
        ++monotone;
        compare(census::toBoolFn(t, 4));
        return true;
    });
    std::ostringstream d;
    d << "256 functions on <2> and " << monotone << " monotone on <3>, " << disagree << " disagreements";
    return {monotone == 168 && checked == 256 + 168 && disagree == 0, d.str()};
}

Outcome structuralSuite() {
    std::ostringstream d;
    d << structure.circuits << " circuits (" << structure.exhaustive << " exhaustive, " << structure.sat
      << " SAT determinism), " << structure.failures << " failures";
    if (structure.failures) d << ", first: " << structure.firstFailure;
    return {structure.circuits > 0 && structure.failures == 0, d.str()};
}

Outcome mobius() {
    std::size_t lattices = 0, bad = 0;
    for (int k = 1; k <= 5; ++k)
        for (const auto& r : table1Records[k]) {
            if (!r.nondegenerate || r.fn.isConstant()) continue;
            CnfLattice lat = buildCnfLattice(r.fn);
            MobiusRow row = mobiusRow(lat);
            ++lattices;
            for (std::size_t u = 0; u < lat.size(); ++u) {
                std::int64_t sum = 0;
                for (std::size_t w = 0; w < lat.size(); ++w)
                    if (lat.leq(u, w)) sum += row[w];
                if (sum != (u == lat.top ? 1 : 0)) ++bad;
            }
        }

    // the q9 row against the independent recursion and the expected shape
    BoolFn q9 = fixture::q9();
    CnfLattice lat = buildCnfLattice(q9);
    MobiusRow row = mobiusRow(lat);
    auto elements = oracle::latticeElements(minimizedCnf(q9).clauses);
    auto expect = oracle::mobiusToTop(elements);
    bool agree = elements.size() == lat.size();
    std::map<int, std::vector<std::int64_t>> byRank;
    for (std::size_t u = 0; u < lat.size(); ++u) {
        agree = agree && expect.at(lat.elements[u]) == row[u];
        int clausesBelow = 0;
        for (VarSet c : minimizedCnf(q9).clauses) clausesBelow += (c & ~lat.elements[u]) == 0;
        byRank[std::min(clausesBelow, 3)].push_back(row[u]);
    }
    for (auto& [rank, values] : byRank) std::sort(values.begin(), values.end());
    bool shape = byRank[0] == std::vector<std::int64_t>{1} && byRank[1] == std::vector<std::int64_t>(4, -1) &&
                 byRank[2] == std::vector<std::int64_t>(3, 1) && byRank[3] == std::vector<std::int64_t>{0};
    std::ostringstream d;
    d << lattices << " lattices, " << bad << " checksum violations; q9 row " << (agree ? "matches" : "differs from")
      << " the recursion, shape " << (shape ? "1;-1x4;1x3;0" : "unexpected");
    return {bad == 0 && agree && shape && lattices > 0, d.str()};
}

Outcome scaling() {
    BoolFn q9 = fixture::q9();
    std::vector<double> xs, ys;
    std::ostringstream d;
    d << "gates by domain size:";
    for (int n = 1; n <= 8; ++n) {
        TidDatabase db = fullDatabase(3, n, Rational(1, 2));
        Circuit c = compileNice(HQuery(3, q9), fixture::q9Boxes(), db);
        std::size_t gates = stats(c).gates;
        d << ' ' << n << ':' << gates;
        xs.push_back(std::log(static_cast<double>(db.size())));
        ys.push_back(std::log(static_cast<double>(gates)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / xs.size(), my += ys[i] / ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
    d << "; log-log exponent in |D| " << std::setprecision(3) << sxy / sxx;
    return {true, d.str()};
}

}  // namespace

int main() {
    int failed = 0;
    report(1, "census counts for k=1..5", table1, failed);
    report(2, "k=6 sampled property check", sampledK6, failed);
    report(3, "q9 end to end", q9EndToEnd, failed);
    report(4, "co-nice witness end to end", coNiceEndToEnd, failed);
    report(5, "probability equals brute force on SND(3) and SND(4)", probabilityOracle, failed);
    report(6, "niceness verdicts equal brute force", nicenessOracle, failed);
    report(7, "structural suite", structuralSuite, failed);
    report(8, "Mobius checksums and the q9 row", mobius, failed);
    report(9, "q9 circuit size scaling", scaling, failed);
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
    return failed ? 1 : 0;
}

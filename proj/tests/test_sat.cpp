#include <doctest.h>

#include <random>

#include "hq/sat.hpp"

#ifndef MINI_SAT_PATH
#error "MINI_SAT_PATH must name the helper solver"
#endif

using namespace hq;

namespace {

bool bruteForceSat(const CnfFormula& f) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << f.numVars); ++m) {
        std::vector<bool> model(static_cast<std::size_t>(f.numVars) + 1);
        for (int v = 1; v <= f.numVars; ++v) model[static_cast<std::size_t>(v)] = m >> (v - 1) & 1;
        if (satisfies(f, model)) return true;
    }
    return false;
}

CnfFormula random3Sat(int vars, int clauses, std::mt19937_64& rng) {
    CnfFormula f{vars, {}};
    for (int i = 0; i < clauses; ++i) {
        std::vector<int> c;
        for (int j = 0; j < 3; ++j) {
            int v = 1 + static_cast<int>(rng() % static_cast<unsigned>(vars));
            c.push_back(rng() & 1 ? v : -v);
        }
        f.clauses.push_back(c);
    }
    return f;
}

// n+1 pigeons, n holes
CnfFormula pigeonhole(int n) {
    CnfFormula f{(n + 1) * n, {}};
    auto x = [n](int p, int h) { return p * n + h + 1; };
    for (int p = 0; p <= n; ++p) {
        std::vector<int> c;
        for (int h = 0; h < n; ++h) c.push_back(x(p, h));
        f.clauses.push_back(c);
    }
    for (int h = 0; h < n; ++h)
        for (int p = 0; p <= n; ++p)
            for (int q = p + 1; q <= n; ++q) f.clauses.push_back({-x(p, h), -x(q, h)});
    return f;
}

}  // namespace

TEST_CASE("embedded solver agrees with exhaustive search on random 3-SAT") {
    std::mt19937_64 rng(17);
    EmbeddedSolver solver(1);
    int sat = 0, unsat = 0;
    for (int i = 0; i < 300; ++i) {
        int vars = 4 + static_cast<int>(rng() % 9);
        CnfFormula f = random3Sat(vars, static_cast<int>(vars * (3 + rng() % 3)), rng);
        SatResult r = solver.solve(f);
        REQUIRE(r.status != SatStatus::Unknown);
        bool expect = bruteForceSat(f);
        CHECK((r.status == SatStatus::Sat) == expect);
        if (r.status == SatStatus::Sat) CHECK(satisfies(f, r.model));
        (expect ? sat : unsat)++;
    }
    CHECK(sat > 20);
    CHECK(unsat > 20);
}

TEST_CASE("embedded solver edge cases") {
    EmbeddedSolver solver;
    CHECK(solver.solve({0, {}}).status == SatStatus::Sat);
    CHECK(solver.solve({1, {{}}}).status == SatStatus::Unsat);
    CHECK(solver.solve({1, {{1}, {-1}}}).status == SatStatus::Unsat);
    CHECK(solver.solve({2, {{1, -1}}}).status == SatStatus::Sat);
    CHECK(solver.solve(pigeonhole(5)).status == SatStatus::Unsat);
    CHECK_THROWS(solver.solve({1, {{2}}}));
}

TEST_CASE("conflict budget yields UNKNOWN, never UNSAT") {
    EmbeddedSolver tiny(0, 5);
    SatResult r = tiny.solve(pigeonhole(7));
    CHECK(r.status == SatStatus::Unknown);
    CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("embedded solver is deterministic for a seed") {
    std::mt19937_64 rng(4);
    CnfFormula f = random3Sat(40, 150, rng);
    SatResult a = EmbeddedSolver(9).solve(f), b = EmbeddedSolver(9).solve(f);
    CHECK(a.status == b.status);
    CHECK(a.model == b.model);
}

TEST_CASE("DIMACS round trip") {
    CnfFormula f{3, {{1, -2}, {3}, {-1, -3, 2}}};
    std::string text = toDimacs(f, {"hello"});
    CHECK(text.rfind("c hello\np cnf 3 3\n", 0) == 0);
    CnfFormula g = parseDimacs(text);
    CHECK(g.numVars == 3);
    CHECK(g.clauses == f.clauses);
    CHECK(toDimacs({0, {}}) == "p cnf 0 0\n");
    CHECK_THROWS(parseDimacs("p cnf 2 1\n1 5 0\n"));
    CHECK_THROWS(parseDimacs("1 2 0\n"));
}

TEST_CASE("solver output parsing") {
    SatResult r = parseSolverOutput("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 3);
    CHECK(r.status == SatStatus::Sat);
    CHECK(r.model == std::vector<bool>{false, true, false, true});
    CHECK(parseSolverOutput("s UNSATISFIABLE\n", 3).status == SatStatus::Unsat);
    CHECK(parseSolverOutput("", 3).status == SatStatus::Unknown);
    CHECK(parseSolverOutput("s UNKNOWN\n", 3).status == SatStatus::Unknown);
    SatResult back = parseSolverOutput(formatSolverOutput(r, 3), 3);
    CHECK(back.status == SatStatus::Sat);
    CHECK(back.model == r.model);
}

TEST_CASE("external solver path") {
    CnfFormula sat{2, {{1, 2}, {-1}}};
    CnfFormula unsat{1, {{1}, {-1}}};
    auto ext = makeBackend(MINI_SAT_PATH);
    SatResult r = ext->solve(sat);
    CHECK(r.status == SatStatus::Sat);
    CHECK(satisfies(sat, r.model));
    CHECK(ext->solve(unsat).status == SatStatus::Unsat);
    // a lying or silent solver must never be believed
    CHECK(makeBackend(std::string(MINI_SAT_PATH) + " --lie")->solve(sat).status == SatStatus::Unknown);
    CHECK(makeBackend(std::string(MINI_SAT_PATH) + " --silent")->solve(sat).status == SatStatus::Unknown);
    CHECK(makeBackend("/nonexistent/solver")->solve(sat).status == SatStatus::Unknown);
    CHECK(makeBackend("embedded")->name() == "embedded");
}

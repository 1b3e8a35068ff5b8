#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "hq/tid.hpp"
#include "oracles.hpp"

using namespace hq;

namespace {

std::vector<bool> all(const TidDatabase& db) { return std::vector<bool>(db.size(), true); }

TidDatabase chain5(const Rational& p) {
    TidDatabase db(3);
    db.addR("a", p);
    db.addS(1, "a", "b", p);
    db.addS(2, "a", "b", p);
    db.addS(3, "a", "b", p);
    db.addT("b", p);
    return db;
}

TidDatabase randomDb(int k, int domain, std::size_t maxTuples, std::mt19937_64& rng) {
    TidDatabase full = fullDatabase(k, domain, Rational(1, 2));
    std::vector<bool> keep(full.size());
    std::size_t kept = 0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        keep[i] = kept < maxTuples && rng() % 3 != 0;
        kept += keep[i];
    }
    TidDatabase db = restrictDatabase(full, keep);
    for (std::size_t i = 0; i < db.size(); ++i) db.setProbability(i, Rational(static_cast<long>(rng() % 5), 4));
    return db;
}

}  // namespace

TEST_CASE("h queries on deterministic instances") {
    TidDatabase empty(3);
    for (int i = 0; i <= 3; ++i) CHECK_FALSE(evalH(i, empty));

    TidDatabase rs(2);
    rs.addR("a", 1);
    rs.addS(1, "a", "b", 1);
    CHECK(evalH(0, rs));
    CHECK_FALSE(evalH(1, rs));

    TidDatabase split(2);
    split.addS(1, "a", "b", 1);
    split.addS(2, "a", "c", 1);
    CHECK_FALSE(evalH(1, split));
    CHECK(evalH(1, split) == oracle::h(1, split, all(split)));
    CHECK_THROWS(evalH(3, split));
}

TEST_CASE("query evaluation") {
    HQuery q9(3, fixture::q9());
    CHECK_FALSE(evalQuery(q9, TidDatabase(3)));
    // R, S1, S2, S3 on (a, b) and no T: h0, h1, h2 hold, h3 does not
    TidDatabase db(3);
    db.addR("a", 1);
    db.addS(1, "a", "b", 1);
    db.addS(2, "a", "b", 1);
    db.addS(3, "a", "b", 1);
    CHECK(hProfile(db, all(db)) == 0b0111);
    CHECK(evalQuery(q9, db));
    HQuery top(2, BoolFn::constant(2, true));
    CHECK(evalQuery(top, TidDatabase(2)));
    CHECK_THROWS(HQuery(2, fixture::q9()));
}

TEST_CASE("lineage table") {
    HQuery q9(3, fixture::q9());
    auto t0 = lineageTable(q9, TidDatabase(3));
    CHECK(t0 == std::vector<bool>{false});

    TidDatabase db = chain5(Rational(1, 2));
    auto t = lineageTable(q9, db);
    REQUIRE(t.size() == 32);
    std::vector<bool> present(5);
    for (std::size_t m = 0; m < 32; ++m) {
        for (std::size_t i = 0; i < 5; ++i) present[i] = m >> i & 1;
        CHECK(t[m] == oracle::query(fixture::q9(), db, present));
        // monotone in the sub-database
        for (std::size_t i = 0; i < 5; ++i)
            if (t[m]) CHECK(t[m | (std::size_t{1} << i)]);
    }
    CHECK_THROWS(lineageTable(q9, fullDatabase(3, 3, 1)));
}

TEST_CASE("brute-force probability") {
    HQuery q9(3, fixture::q9());
    TidDatabase db = chain5(Rational(1, 2));
    CHECK(bruteForcePqe(q9, db) == oracle::pqe(fixture::q9(), db));

    TidDatabase ones = chain5(1);
    CHECK(bruteForcePqe(q9, ones) == (evalQuery(q9, ones) ? 1 : 0));
    TidDatabase zeros = chain5(0);
    CHECK(bruteForcePqe(q9, zeros) == (evalQuery(q9, TidDatabase(3)) ? 1 : 0));

    TidDatabase r(1);
    r.addR("a", Rational(1, 2));
    CHECK(bruteForcePqe(HQuery(1, BoolFn::variable(1, 0)), r) == 0);
}

TEST_CASE("brute-force probability matches literal summation on random databases") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 40; ++i) {
        int k = 1 + static_cast<int>(rng() % 3);
        TidDatabase db = randomDb(k, 2, 11, rng);
        BoolFn phi(k);
        for (VarSet m = 0; m < phi.size(); ++m) phi.set(m, rng() & 1);
        CHECK(bruteForcePqe(HQuery(k, phi), db) == oracle::pqe(phi, db));
    }
    // enough tuples to use both the inner and the outer loop
    TidDatabase big = randomDb(2, 2, 16, rng);
    BoolFn phi = parseFunction("01&12", 2);
    CHECK(bruteForcePqe(HQuery(2, phi), big) == oracle::pqe(phi, big));
}

TEST_CASE("database parsing and validation") {
    TidDatabase db = parseDatabase("# comment\nR a 1/2\nS1 a b 0.25\nS2 a b 1\nT b 0  # trailing\n\n", 2);
    CHECK(db.size() == 4);
    CHECK(db.probability(1) == Rational(1, 4));
    CHECK(db.tupleName(1) == "S1(a,b)");
    CHECK(parseDatabase(formatDatabase(db), 2).probabilities() == db.probabilities());
    CHECK(parseProbability(".5") == Rational(1, 2));
    CHECK(parseProbability("3/6") == Rational(1, 2));
    CHECK_THROWS(parseProbability("3/2"));
    CHECK_THROWS(parseProbability("1.5"));
    CHECK_THROWS(parseProbability("-1"));
    CHECK_THROWS(parseProbability("1/0"));
    CHECK_THROWS(parseProbability("abc"));
    CHECK_THROWS(parseDatabase("S3 a b 1\n", 2));
    CHECK_THROWS(parseDatabase("R a b 1\n", 2));
    CHECK_THROWS(parseDatabase("R a 1\nR a 1\n", 2));
    CHECK_THROWS(parseDatabase("Q a 1\n", 2));
    CHECK_THROWS(TidDatabase(2).add({0, 0, 0}, 1));

    TidDatabase full = fullDatabase(2, 2, Rational(1, 3));
    CHECK(full.size() == 2 + 2 * 4 + 2);
    CHECK(full.numConstants() == 2);
}

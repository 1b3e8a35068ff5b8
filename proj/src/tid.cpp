#include "hq/tid.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace hq {

TidDatabase::TidDatabase(int k) : k_(k) {
    if (k < 1 || k > kMaxK) throw std::out_of_range("query width k out of range");
}

int TidDatabase::constant(std::string_view name) {
    if (name.empty()) throw std::invalid_argument("empty constant name");
    for (std::size_t i = 0; i < constants_.size(); ++i)
        if (constants_[i] == name) return static_cast<int>(i);
    constants_.emplace_back(name);
    return static_cast<int>(constants_.size()) - 1;
}

std::size_t TidDatabase::add(Tuple t, Rational p) {
    if (t.rel < 0 || t.rel > k_ + 1) throw std::invalid_argument("unknown relation index");
    bool needX = t.rel <= k_, needY = t.rel >= 1;
    auto validConst = [&](int c) { return c >= 0 && c < numConstants(); };
    if (needX != validConst(t.x) || needY != validConst(t.y) || (!needX && t.x != -1) || (!needY && t.y != -1))
        throw std::invalid_argument("tuple arity does not match relation " + relationName(t.rel));
    p.canonicalize();
    if (p < 0 || p > 1) throw std::invalid_argument("probability outside [0,1]");
    if (find(t)) throw std::invalid_argument("duplicate tuple");
    tuples_.push_back(t);
    probs_.push_back(p);
    return tuples_.size() - 1;
}

std::size_t TidDatabase::addR(std::string_view a, Rational p) { return add({0, constant(a), -1}, std::move(p)); }

std::size_t TidDatabase::addS(int i, std::string_view a, std::string_view b, Rational p) {
    if (i < 1 || i > k_) throw std::invalid_argument("S index out of range");
    int x = constant(a);
    int y = constant(b);
    return add({i, x, y}, std::move(p));
}

std::size_t TidDatabase::addT(std::string_view b, Rational p) { return add({k_ + 1, -1, constant(b)}, std::move(p)); }

void TidDatabase::setProbability(std::size_t i, Rational p) {
    p.canonicalize();
    if (p < 0 || p > 1) throw std::invalid_argument("probability outside [0,1]");
    probs_.at(i) = std::move(p);
}

std::optional<std::size_t> TidDatabase::find(const Tuple& t) const {
    for (std::size_t i = 0; i < tuples_.size(); ++i)
        if (tuples_[i] == t) return i;
    return std::nullopt;
}

std::string TidDatabase::relationName(int rel) const {
    if (rel == 0) return "R";
    if (rel == k_ + 1) return "T";
    return "S" + std::to_string(rel);
}

std::string TidDatabase::tupleName(std::size_t i) const {
    const Tuple& t = tuple(i);
    std::string out = relationName(t.rel) + "(";
    if (t.x >= 0) out += constantName(t.x);
    if (t.x >= 0 && t.y >= 0) out += ",";
    if (t.y >= 0) out += constantName(t.y);
    return out + ")";
}

Rational parseProbability(std::string_view text) {
    std::string s(text);
    Rational p;
    auto fail = [&] { return std::invalid_argument("bad probability `" + s + "`"); };
    if (s.empty()) throw fail();
    if (auto slash = s.find('/'); slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        auto digits = [](const std::string& x) {
            return !x.empty() && std::all_of(x.begin(), x.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        };
        if (!digits(num) || !digits(den)) throw fail();
        mpz_class d(den, 10);
        if (d == 0) throw fail();
        p = Rational(mpz_class(num, 10), d);
    } else {
        std::size_t dot = s.find('.');
        std::string intPart = s.substr(0, dot), frac = dot == std::string::npos ? "" : s.substr(dot + 1);
        if (intPart.empty()) intPart = "0";
        auto digits = [](const std::string& x) {
            return std::all_of(x.begin(), x.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        };
        if (!digits(intPart) || !digits(frac) || (dot != std::string::npos && frac.empty() && intPart == "0" && s[0] == '.'))
            throw fail();
        mpz_class den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        p = Rational(mpz_class(intPart + frac, 10), den);
    }
    p.canonicalize();
    if (p < 0 || p > 1) throw std::invalid_argument("probability `" + s + "` outside [0,1]");
    return p;
}

TidDatabase parseDatabase(std::string_view text, int k) {
    TidDatabase db(k);
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        auto where = [&] { return "line " + std::to_string(lineNo) + ": "; };
        try {
            const std::string& rel = tok[0];
            if (rel == "R") {
                if (tok.size() != 3) throw std::invalid_argument("expected `R a p`");
                db.addR(tok[1], parseProbability(tok[2]));
            } else if (rel == "T") {
                if (tok.size() != 3) throw std::invalid_argument("expected `T b p`");
                db.addT(tok[1], parseProbability(tok[2]));
            } else if (rel.size() > 1 && rel[0] == 'S' &&
                       std::all_of(rel.begin() + 1, rel.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
                if (tok.size() != 4) throw std::invalid_argument("expected `" + rel + " a b p`");
                int i = std::stoi(rel.substr(1));
                if (i < 1 || i > k) throw std::invalid_argument("relation " + rel + " outside S1..S" + std::to_string(k));
                db.addS(i, tok[1], tok[2], parseProbability(tok[3]));
            } else {
                throw std::invalid_argument("unknown relation `" + rel + "`");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where() + e.what());
        }
    }
    return db;
}

std::string formatDatabase(const TidDatabase& db) {
    std::ostringstream out;
    for (std::size_t i = 0; i < db.size(); ++i) {
        const Tuple& t = db.tuple(i);
        out << db.relationName(t.rel);
        if (t.x >= 0) out << ' ' << db.constantName(t.x);
        if (t.y >= 0) out << ' ' << db.constantName(t.y);
        out << ' ' << db.probability(i).get_str() << '\n';
    }
    return out.str();
}

TidDatabase fullDatabase(int k, int domainSize, const Rational& p) {
    if (domainSize < 0) throw std::invalid_argument("negative domain size");
    TidDatabase db(k);
    std::vector<std::string> names;
    for (int c = 0; c < domainSize; ++c) {
        std::string n = c < 26 ? std::string(1, static_cast<char>('a' + c)) : "c" + std::to_string(c);
        names.push_back(n);
        db.constant(n);
    }
    for (const auto& a : names) db.addR(a, p);
    for (int i = 1; i <= k; ++i)
        for (const auto& a : names)
            for (const auto& b : names) db.addS(i, a, b, p);
    for (const auto& b : names) db.addT(b, p);
    return db;
}

TidDatabase restrictDatabase(const TidDatabase& db, const std::vector<bool>& keep) {
    if (keep.size() != db.size()) throw std::invalid_argument("mask size mismatch");
    TidDatabase out(db.k());
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (!keep[i]) continue;
        const Tuple& t = db.tuple(i);
        Tuple u{t.rel, t.x >= 0 ? out.constant(db.constantName(t.x)) : -1,
                t.y >= 0 ? out.constant(db.constantName(t.y)) : -1};
        out.add(u, db.probability(i));
    }
    return out;
}

HQuery::HQuery(int k, BoolFn phi) : k(k), phi(std::move(phi)) {
    if (this->phi.k() != k) throw std::invalid_argument("HQuery: phi is not a function on <k>");
}

namespace {

// Pairs of tuples whose joint presence witnesses h_ki.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> witnesses(const TidDatabase& db) {
    int k = db.k();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> w(static_cast<std::size_t>(k + 1));
    for (std::size_t a = 0; a < db.size(); ++a) {
        const Tuple& s = db.tuple(a);
        if (s.rel < 1 || s.rel > k) continue;
        if (s.rel == 1)
            if (auto r = db.find({0, s.x, -1})) w[0].emplace_back(*r, a);
        if (s.rel < k)
            if (auto n = db.find({s.rel + 1, s.x, s.y})) w[s.rel].emplace_back(a, *n);
        if (s.rel == k)
            if (auto t = db.find({k + 1, -1, s.y})) w[k].emplace_back(a, *t);
    }
    return w;
}

void checkPresence(const TidDatabase& db, const SubInstance& present) {
    if (present.size() != db.size()) throw std::invalid_argument("presence mask size mismatch");
}

}  // namespace

bool evalH(int i, const TidDatabase& db, const SubInstance& present) {
    if (i < 0 || i > db.k()) throw std::out_of_range("h index out of range");
    checkPresence(db, present);
    auto w = witnesses(db);
    return std::any_of(w[i].begin(), w[i].end(), [&](auto pr) { return present[pr.first] && present[pr.second]; });
}

bool evalH(int i, const TidDatabase& db) { return evalH(i, db, SubInstance(db.size(), true)); }

VarSet hProfile(const TidDatabase& db, const SubInstance& present) {
    checkPresence(db, present);
    auto w = witnesses(db);
    VarSet out = 0;
    for (int i = 0; i <= db.k(); ++i)
        if (std::any_of(w[i].begin(), w[i].end(), [&](auto pr) { return present[pr.first] && present[pr.second]; }))
            out |= VarSet{1} << i;
    return out;
}

bool evalQuery(const HQuery& q, const TidDatabase& db, const SubInstance& present) {
    if (db.k() != q.k) throw std::invalid_argument("database and query disagree on k");
    return q.phi[hProfile(db, present)];
}

bool evalQuery(const HQuery& q, const TidDatabase& db) { return evalQuery(q, db, SubInstance(db.size(), true)); }

std::vector<bool> lineageTable(const HQuery& q, const TidDatabase& db) {
    if (db.k() != q.k) throw std::invalid_argument("database and query disagree on k");
    std::size_t n = db.size();
    if (n > kMaxOracleTuples) throw std::invalid_argument("lineage table limited to 24 tuples");
    auto w = witnesses(db);
    std::vector<std::vector<std::uint32_t>> masks(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        for (auto [a, b] : w[i]) masks[i].push_back((std::uint32_t{1} << a) | (std::uint32_t{1} << b));
    std::vector<bool> table(std::size_t{1} << n);
    for (std::uint32_t m = 0; m < table.size(); ++m) {
        VarSet profile = 0;
        for (std::size_t i = 0; i < masks.size(); ++i)
            for (std::uint32_t wm : masks[i])
                if ((m & wm) == wm) {
                    profile |= VarSet{1} << i;
                    break;
                }
        table[m] = q.phi[profile];
    }
    return table;
}

Rational bruteForcePqe(const HQuery& q, const TidDatabase& db) {
    std::vector<bool> table = lineageTable(q, db);
    std::size_t n = db.size();
    // With p_t = a_t / b_t, Pr(D') * prod(b_t) = prod over tuples of a_t
    // (present) or b_t - a_t (absent): an integer sum over all subsets.
    std::vector<mpz_class> in(n), out(n), den(n);
    mpz_class scale = 1;
    for (std::size_t t = 0; t < n; ++t) {
        const Rational& p = db.probability(t);
        in[t] = p.get_num();
        den[t] = p.get_den();
        out[t] = den[t] - in[t];
        scale *= den[t];
    }
    std::size_t innerVars = std::min<std::size_t>(n, 12);
    std::size_t outerVars = n - innerVars;
    std::vector<mpz_class> cur(std::size_t{1} << innerVars), nxt(cur.size() / 2 + 1);
    mpz_class total = 0;
    for (std::size_t o = 0; o < (std::size_t{1} << outerVars); ++o) {
        mpz_class weight = 1;
        for (std::size_t j = 0; j < outerVars; ++j) weight *= ((o >> j) & 1) ? in[innerVars + j] : out[innerVars + j];
        if (weight == 0) continue;
        std::size_t base = o << innerVars;
        for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = table[base + i] ? 1 : 0;
        std::size_t len = cur.size();
        for (std::size_t v = 0; v < innerVars; ++v) {
            len /= 2;
            for (std::size_t m = 0; m < len; ++m) nxt[m] = out[v] * cur[2 * m] + in[v] * cur[2 * m + 1];
            for (std::size_t m = 0; m < len; ++m) std::swap(cur[m], nxt[m]);
        }
        total += weight * cur[0];
    }
    Rational r(total, scale);
    r.canonicalize();
    return r;
}

}  // namespace hq

#include "hq/boolfun.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hq {

namespace {

std::size_t wordCount(int k) { return ((std::size_t{1} << (k + 1)) + 63) / 64; }

void checkK(int k) {
    if (k < 0 || k > kMaxK)
        throw std::out_of_range("k=" + std::to_string(k) + " outside supported range 0.." +
                                std::to_string(kMaxK));
}

std::uint64_t tailMask(int k) {
    std::size_t bits = std::size_t{1} << (k + 1);
    return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

std::string formatVarSet(VarSet v) {
    std::string out = "{";
    bool first = true;
    for (int i = 0; v >> i; ++i) {
        if (!((v >> i) & 1)) continue;
        if (!first) out += ',';
        out += std::to_string(i);
        first = false;
    }
    return out + "}";
}

BoolFn::BoolFn(int k) : k_(k) {
    checkK(k);
    words_.assign(wordCount(k), 0);
}

BoolFn BoolFn::constant(int k, bool value) {
    BoolFn f(k);
    if (value) {
        std::fill(f.words_.begin(), f.words_.end(), ~std::uint64_t{0});
        f.words_.back() &= tailMask(k);
    }
    return f;
}

BoolFn BoolFn::variable(int k, int var) {
    if (var < 0 || var > k) throw std::out_of_range("variable outside <k>");
    return fromPredicate(k, [var](VarSet nu) { return (nu >> var) & 1; });
}

BoolFn BoolFn::fromWords(int k, std::vector<std::uint64_t> words) {
    BoolFn f(k);
    if (words.size() != f.words_.size()) throw std::invalid_argument("table length mismatch");
    if (words.back() & ~tailMask(k)) throw std::invalid_argument("table has bits beyond 2^(k+1)");
    f.words_ = std::move(words);
    return f;
}

void BoolFn::set(VarSet nu, bool value) {
    std::uint64_t bit = std::uint64_t{1} << (nu & 63);
    if (value)
        words_[nu >> 6] |= bit;
    else
        words_[nu >> 6] &= ~bit;
}

std::size_t BoolFn::countSat() const {
    std::size_t n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
}

bool BoolFn::isConstant() const {
    std::size_t n = countSat();
    return n == 0 || n == size();
}

std::strong_ordering BoolFn::operator<=>(const BoolFn& other) const {
    if (auto c = k_ <=> other.k_; c != 0) return c;
    for (std::size_t i = words_.size(); i-- > 0;)
        if (auto c = words_[i] <=> other.words_[i]; c != 0) return c;
    return std::strong_ordering::equal;
}

bool MonotoneCnf::evaluate(VarSet nu) const {
    return std::all_of(clauses.begin(), clauses.end(), [nu](VarSet c) { return (c & nu) != 0; });
}

std::string MonotoneCnf::toString() const {
    std::string out;
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        if (i) out += '&';
        out += '(';
        bool first = true;
        for (int v = 0; v <= k; ++v) {
            if (!((clauses[i] >> v) & 1)) continue;
            if (!first) out += '|';
            out += std::to_string(v);
            first = false;
        }
        out += ')';
    }
    return out;
}

bool evaluate(const BoolFn& f, VarSet nu) {
    if (nu & ~fullSet(f.k())) throw std::out_of_range("valuation mentions variable outside <k>");
    return f[nu];
}

VarSet tgl(VarSet nu, int l) {
    if (l < 0 || l > kMaxK) throw std::out_of_range("toggle variable out of range");
    return nu ^ (VarSet{1} << l);
}

VarSet dep(const BoolFn& f) {
    VarSet out = 0;
    auto n = static_cast<VarSet>(f.size());
    for (int l = 0; l <= f.k(); ++l) {
        VarSet bit = VarSet{1} << l;
        for (VarSet nu = 0; nu < n; ++nu) {
            if ((nu & bit) == 0 && f[nu] != f[nu | bit]) {
                out |= bit;
                break;
            }
        }
    }
    return out;
}

bool isNondegenerate(const BoolFn& f) { return dep(f) == fullSet(f.k()); }

bool isMonotone(const BoolFn& f) {
    auto n = static_cast<VarSet>(f.size());
    for (VarSet nu = 0; nu < n; ++nu) {
        if (!f[nu]) continue;
        for (int l = 0; l <= f.k(); ++l) {
            VarSet up = nu | (VarSet{1} << l);
            if (!f[up]) return false;
        }
    }
    return true;
}

MonotoneCnf minimizedCnf(const BoolFn& f) {
    if (!isMonotone(f)) throw std::invalid_argument("minimizedCnf: function is not monotone");
    if (f.isConstant()) throw std::invalid_argument("minimizedCnf: function is constant");
    MonotoneCnf cnf{f.k(), {}};
    VarSet all = fullSet(f.k());
    auto n = static_cast<VarSet>(f.size());
    // Each maximal false point nu contributes the clause <k> \ nu.
    for (VarSet nu = 0; nu < n; ++nu) {
        if (f[nu]) continue;
        bool maximal = true;
        for (int l = 0; l <= f.k() && maximal; ++l) {
            VarSet up = nu | (VarSet{1} << l);
            if (up != nu && !f[up]) maximal = false;
        }
        if (maximal) cnf.clauses.push_back(all & ~nu);
    }
    std::sort(cnf.clauses.begin(), cnf.clauses.end());
    return cnf;
}

BoolFn fromCnf(const MonotoneCnf& cnf) {
    return BoolFn::fromPredicate(cnf.k, [&](VarSet nu) { return cnf.evaluate(nu); });
}

namespace {

// img[m] = image of valuation m under the variable renaming.
void imageMap(int k, std::span<const int> perm, std::vector<VarSet>& img) {
    std::size_t n = std::size_t{1} << (k + 1);
    img.resize(n);
    img[0] = 0;
    for (std::size_t m = 1; m < n; ++m) {
        int low = std::countr_zero(m);
        img[m] = img[m & (m - 1)] | (VarSet{1} << perm[low]);
    }
}

void applyImage(const BoolFn& f, const std::vector<VarSet>& img, std::vector<std::uint64_t>& out) {
    std::fill(out.begin(), out.end(), 0);
    auto words = f.words();
    for (std::size_t w = 0; w < words.size(); ++w) {
        for (std::uint64_t bits = words[w]; bits; bits &= bits - 1) {
            VarSet to = img[w * 64 + std::countr_zero(bits)];
            out[to >> 6] |= std::uint64_t{1} << (to & 63);
        }
    }
}

bool lessWords(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    for (std::size_t i = a.size(); i-- > 0;)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

}  // namespace

BoolFn permute(const BoolFn& f, std::span<const int> perm) {
    if (perm.size() != static_cast<std::size_t>(f.numVars()))
        throw std::invalid_argument("permutation size mismatch");
    std::vector<int> seen(perm.size(), 0);
    for (int p : perm) {
        if (p < 0 || p > f.k() || seen[p]++) throw std::invalid_argument("not a permutation");
    }
    std::vector<VarSet> img;
    imageMap(f.k(), perm, img);
    std::vector<std::uint64_t> out(f.words().size());
    applyImage(f, img, out);
    return BoolFn::fromWords(f.k(), std::move(out));
}

BoolFn canonicalize(const BoolFn& f) {
    std::vector<int> perm(f.numVars());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::uint64_t> best(f.words().begin(), f.words().end());
    std::vector<std::uint64_t> cur(best.size());
    std::vector<VarSet> img;
    while (std::next_permutation(perm.begin(), perm.end())) {
        imageMap(f.k(), perm, img);
        applyImage(f, img, cur);
        if (lessWords(cur, best)) best = cur;
    }
    return BoolFn::fromWords(f.k(), std::move(best));
}

BoolFn negate(const BoolFn& f) {
    std::vector<std::uint64_t> w(f.words().begin(), f.words().end());
    for (auto& x : w) x = ~x;
    w.back() &= tailMask(f.k());
    return BoolFn::fromWords(f.k(), std::move(w));
}

std::vector<VarSet> satValuations(const BoolFn& f) {
    std::vector<VarSet> out;
    out.reserve(f.countSat());
    auto n = static_cast<VarSet>(f.size());
    for (VarSet nu = 0; nu < n; ++nu)
        if (f[nu]) out.push_back(nu);
    return out;
}

std::string toHex(const BoolFn& f) {
    static constexpr char digits[] = "0123456789abcdef";
    std::size_t nibbles = std::max<std::size_t>(1, f.size() / 4);
    std::string out(nibbles, '0');
    auto words = f.words();
    for (std::size_t i = 0; i < nibbles; ++i) {
        std::size_t bit = i * 4;
        out[nibbles - 1 - i] = digits[(words[bit >> 6] >> (bit & 63)) & 0xF];
    }
    return out;
}

BoolFn fromHex(int k, std::string_view hex) {
    BoolFn f(k);
    std::size_t nibbles = std::max<std::size_t>(1, f.size() / 4);
    if (hex.size() != nibbles)
        throw std::invalid_argument("hex table for k=" + std::to_string(k) + " must have " +
                                    std::to_string(nibbles) + " digits");
    std::vector<std::uint64_t> words(f.words().size(), 0);
    for (std::size_t i = 0; i < nibbles; ++i) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[nibbles - 1 - i])));
        std::uint64_t v;
        if (c >= '0' && c <= '9')
            v = static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v = static_cast<std::uint64_t>(c - 'a' + 10);
        else
            throw std::invalid_argument(std::string("bad hex digit '") + hex[nibbles - 1 - i] + "'");
        std::size_t bit = i * 4;
        words[bit >> 6] |= v << (bit & 63);
    }
    return BoolFn::fromWords(k, std::move(words));
}

std::string serialize(const BoolFn& f) {
    return "k:" + std::to_string(f.k()) + " table:" + toHex(f);
}

BoolFn parseSerialized(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::string kTok, tTok;
    in >> kTok >> tTok;
    if (kTok.rfind("k:", 0) != 0 || tTok.rfind("table:", 0) != 0)
        throw std::invalid_argument("expected `k:<int> table:<hex>`, got `" + std::string(line) + "`");
    int k;
    try {
        k = std::stoi(kTok.substr(2));
    } catch (const std::exception&) {
        throw std::invalid_argument("bad k in `" + kTok + "`");
    }
    return fromHex(k, tTok.substr(6));
}

BoolFn parseFunction(std::string_view text, std::optional<int> k) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.rfind("k:", 0) == 0) {
        std::string spaced{text};
        return parseSerialized(spaced);
    }
    if (s == "true" || s == "false") {
        if (!k) throw std::invalid_argument("constant function needs an explicit k");
        return BoolFn::constant(*k, s == "true");
    }
    if (s.empty()) throw std::invalid_argument("empty function");

    std::vector<VarSet> clauses;
    int maxVar = -1;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t amp = s.find('&', pos);
        if (amp == std::string::npos) amp = s.size();
        std::string clause = s.substr(pos, amp - pos);
        pos = amp + 1;
        if (!clause.empty() && clause.front() == '(') {
            if (clause.back() != ')') throw std::invalid_argument("unbalanced parenthesis in `" + clause + "`");
            clause = clause.substr(1, clause.size() - 2);
        }
        if (clause.empty()) throw std::invalid_argument("empty clause");
        VarSet c = 0;
        auto addVar = [&](int v) {
            if (v > kMaxK) throw std::invalid_argument("variable " + std::to_string(v) + " too large");
            c |= VarSet{1} << v;
            maxVar = std::max(maxVar, v);
        };
        bool separated = clause.find_first_of("|,") != std::string::npos;
        if (separated) {
            std::size_t p = 0;
            while (p <= clause.size()) {
                std::size_t q = clause.find_first_of("|,", p);
                if (q == std::string::npos) q = clause.size();
                std::string tok = clause.substr(p, q - p);
                if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit))
                    throw std::invalid_argument("bad variable `" + tok + "`");
                addVar(std::stoi(tok));
                p = q + 1;
            }
        } else {
            for (char ch : clause) {
                if (!std::isdigit(static_cast<unsigned char>(ch)))
                    throw std::invalid_argument(std::string("unexpected character '") + ch + "'");
                addVar(ch - '0');
            }
        }
        clauses.push_back(c);
    }
    int kk = k.value_or(std::max(maxVar, 1));
    if (maxVar > kk)
        throw std::invalid_argument("variable " + std::to_string(maxVar) + " exceeds k=" + std::to_string(kk));
    MonotoneCnf cnf{kk, clauses};
    return fromCnf(cnf);
}

}  // namespace hq

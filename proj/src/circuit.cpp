#include "hq/circuit.hpp"

#include <algorithm>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace hq {

const char* gateKindName(GateKind kind) {
    switch (kind) {
        case GateKind::Const: return "CONST";
        case GateKind::Var: return "VAR";
        case GateKind::Not: return "NOT";
        case GateKind::And: return "AND";
        case GateKind::Or: return "OR";
    }
    return "?";
}

std::size_t Circuit::KeyHash::operator()(const Gate& g) const {
    std::uint64_t h = static_cast<std::uint64_t>(g.kind) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(g.var + 7);
    for (int in : g.inputs) {
        h ^= static_cast<std::uint64_t>(in) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
}

Circuit::Circuit(int numVars, std::size_t nodeBudget)
    : numVars_(numVars),
      budget_(nodeBudget),
      wordsPerSet_(std::max<std::size_t>(1, (static_cast<std::size_t>(numVars) + 63) / 64)) {
    if (numVars < 0) throw std::invalid_argument("negative variable count");
}

int Circuit::intern(Gate g) {
    if (auto it = index_.find(g); it != index_.end()) return it->second;
    if (gates_.size() >= budget_) throw BudgetExceeded(budget_);
    int id = static_cast<int>(gates_.size());
    varsWords_.resize(varsWords_.size() + wordsPerSet_, 0);
    std::uint64_t* w = varsWords_.data() + static_cast<std::size_t>(id) * wordsPerSet_;
    if (g.kind == GateKind::Var) w[g.var >> 6] |= std::uint64_t{1} << (g.var & 63);
    for (int in : g.inputs) {
        const std::uint64_t* src = varsWords(in);
        for (std::size_t i = 0; i < wordsPerSet_; ++i) w[i] |= src[i];
    }
    index_.emplace(g, id);
    gates_.push_back(std::move(g));
    return id;
}

int Circuit::constant(bool value) { return intern({GateKind::Const, value ? 1 : 0, {}}); }

int Circuit::var(int v) {
    if (v < 0 || v >= numVars_) throw std::out_of_range("variable index out of range");
    return intern({GateKind::Var, v, {}});
}

int Circuit::rawNot(int in) { return rawGate(GateKind::Not, {in}); }

int Circuit::rawGate(GateKind kind, std::vector<int> in) {
    if (kind != GateKind::Not && kind != GateKind::And && kind != GateKind::Or)
        throw std::invalid_argument("rawGate builds NOT, AND or OR gates");
    if (kind == GateKind::Not && in.size() != 1) throw std::invalid_argument("NOT takes exactly one input");
    for (int i : in)
        if (i < 0 || static_cast<std::size_t>(i) >= gates_.size()) throw std::out_of_range("unknown input gate");
    return intern({kind, -1, std::move(in)});
}

int Circuit::notGate(int in) {
    const Gate& g = gate(in);
    if (g.kind == GateKind::Const) return constant(g.var == 0);
    if (g.kind == GateKind::Not) return g.inputs[0];
    return rawNot(in);
}

int Circuit::andGate(std::vector<int> in) {
    std::vector<int> keep;
    for (int i : in) {
        const Gate& g = gate(i);
        if (g.kind == GateKind::Const) {
            if (g.var == 0) return constant(false);
            continue;
        }
        keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.empty()) return constant(true);
    if (keep.size() == 1) return keep[0];
    return rawGate(GateKind::And, std::move(keep));
}

int Circuit::orGate(std::vector<int> in) {
    std::vector<int> keep;
    for (int i : in) {
        const Gate& g = gate(i);
        if (g.kind == GateKind::Const) {
            if (g.var == 1) return constant(true);
            continue;
        }
        keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.empty()) return constant(false);
    if (keep.size() == 1) return keep[0];
    return rawGate(GateKind::Or, std::move(keep));
}

void Circuit::setOutput(int id) {
    gate(id);
    output_ = id;
}

int Circuit::output() const {
    if (output_ < 0) throw std::logic_error("circuit has no output gate");
    return output_;
}

std::vector<int> Circuit::vars(int id) const {
    std::vector<int> out;
    const std::uint64_t* w = varsWords(id);
    for (std::size_t i = 0; i < wordsPerSet_; ++i)
        for (std::uint64_t x = w[i]; x; x &= x - 1) out.push_back(static_cast<int>(i * 64) + __builtin_ctzll(x));
    return out;
}

std::vector<int> Circuit::cone(int root) const {
    gate(root);
    std::vector<char> seen(gates_.size(), 0);
    seen[static_cast<std::size_t>(root)] = 1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int g = stack.back();
        stack.pop_back();
        for (int in : gates_[static_cast<std::size_t>(g)].inputs)
            if (!seen[static_cast<std::size_t>(in)]) {
                seen[static_cast<std::size_t>(in)] = 1;
                stack.push_back(in);
            }
    }
    // Inputs always have smaller ids, so id order is topological.
    std::vector<int> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(static_cast<int>(i));
    return out;
}

CircuitStats stats(const Circuit& c) {
    CircuitStats s;
    for (int id : c.cone()) {
        const Gate& g = c.gate(id);
        ++s.gates;
        s.edges += g.inputs.size();
        if (g.kind == GateKind::And) ++s.andGates;
        if (g.kind == GateKind::Or) ++s.orGates;
        if (g.kind == GateKind::Not) ++s.notGates;
    }
    s.vars = c.vars(c.output()).size();
    return s;
}

bool evaluate(const Circuit& c, int root, const std::vector<bool>& assignment) {
    if (assignment.size() < static_cast<std::size_t>(c.numVars())) throw std::invalid_argument("assignment too short");
    std::vector<char> val(c.size(), 0);
    for (int id : c.cone(root)) {
        const Gate& g = c.gate(id);
        bool v = false;
        switch (g.kind) {
            case GateKind::Const: v = g.var == 1; break;
            case GateKind::Var: v = assignment[static_cast<std::size_t>(g.var)]; break;
            case GateKind::Not: v = !val[static_cast<std::size_t>(g.inputs[0])]; break;
            case GateKind::And:
                v = std::all_of(g.inputs.begin(), g.inputs.end(), [&](int i) { return val[static_cast<std::size_t>(i)]; });
                break;
            case GateKind::Or:
                v = std::any_of(g.inputs.begin(), g.inputs.end(), [&](int i) { return val[static_cast<std::size_t>(i)]; });
                break;
        }
        val[static_cast<std::size_t>(id)] = v;
    }
    return val[static_cast<std::size_t>(root)];
}

bool evaluate(const Circuit& c, const std::vector<bool>& assignment) { return evaluate(c, c.output(), assignment); }

bool isNnf(const Circuit& c) {
    for (int id : c.cone()) {
        const Gate& g = c.gate(id);
        if (g.kind == GateKind::Not && c.gate(g.inputs[0]).kind != GateKind::Var) return false;
    }
    return true;
}

std::size_t nonLeafNotCount(const Circuit& c) {
    std::size_t n = 0;
    for (int id : c.cone()) {
        const Gate& g = c.gate(id);
        if (g.kind == GateKind::Not && c.gate(g.inputs[0]).kind != GateKind::Var) ++n;
    }
    return n;
}

bool checkDecomposable(const Circuit& c) {
    std::vector<std::uint64_t> acc(c.wordsPerSet());
    for (int id : c.cone()) {
        const Gate& g = c.gate(id);
        if (g.kind != GateKind::And) continue;
        std::fill(acc.begin(), acc.end(), 0);
        for (int in : g.inputs) {
            const std::uint64_t* w = c.varsWords(in);
            for (std::size_t i = 0; i < acc.size(); ++i) {
                if (acc[i] & w[i]) return false;
                acc[i] |= w[i];
            }
        }
    }
    return true;
}

namespace {

// Bit-parallel evaluation of a gate set over every assignment to `vars`,
// 64 assignments per word.  Calls onBlock(values, validMask) per block.
template <class OnBlock>
bool forEachBlock(const Circuit& c, const std::vector<int>& gates, const std::vector<int>& vars, OnBlock&& onBlock) {
    static constexpr std::uint64_t kPattern[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
                                                  0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
    std::size_t n = vars.size();
    std::vector<int> position(static_cast<std::size_t>(c.numVars()), -1);
    for (std::size_t j = 0; j < n; ++j) position[static_cast<std::size_t>(vars[j])] = static_cast<int>(j);
    std::size_t blocks = n <= 6 ? 1 : std::size_t{1} << (n - 6);
    std::uint64_t valid = n >= 6 ? ~std::uint64_t{0} : (std::uint64_t{1} << (std::size_t{1} << n)) - 1;
    std::vector<std::uint64_t> val(c.size(), 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (int id : gates) {
            const Gate& g = c.gate(id);
            std::uint64_t v = 0;
            switch (g.kind) {
                case GateKind::Const: v = g.var ? ~std::uint64_t{0} : 0; break;
                case GateKind::Var: {
                    int j = position[static_cast<std::size_t>(g.var)];
                    if (j < 6)
                        v = kPattern[j];
                    else
                        v = ((b >> (j - 6)) & 1) ? ~std::uint64_t{0} : 0;
                    break;
                }
                case GateKind::Not: v = ~val[static_cast<std::size_t>(g.inputs[0])]; break;
                case GateKind::And:
                    v = ~std::uint64_t{0};
                    for (int in : g.inputs) v &= val[static_cast<std::size_t>(in)];
                    break;
                case GateKind::Or:
                    for (int in : g.inputs) v |= val[static_cast<std::size_t>(in)];
                    break;
            }
            val[static_cast<std::size_t>(id)] = v;
        }
        if (!onBlock(val, valid)) return false;
    }
    return true;
}

std::vector<int> unionCone(const Circuit& c, const std::vector<int>& roots) {
    std::vector<char> seen(c.size(), 0);
    for (int r : roots)
        for (int id : c.cone(r)) seen[static_cast<std::size_t>(id)] = 1;
    std::vector<int> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> unionVars(const Circuit& c, const std::vector<int>& roots) {
    std::vector<std::uint64_t> acc(c.wordsPerSet(), 0);
    for (int r : roots) {
        const std::uint64_t* w = c.varsWords(r);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] |= w[i];
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < acc.size(); ++i)
        for (std::uint64_t x = acc[i]; x; x &= x - 1) out.push_back(static_cast<int>(i * 64) + __builtin_ctzll(x));
    return out;
}

// Literals (v+1 or -(v+1)) a gate forces when true, read off syntactically.
std::vector<int> forcedLiterals(const Circuit& c, int id) {
    auto literal = [&](int g) -> int {
        const Gate& x = c.gate(g);
        if (x.kind == GateKind::Var) return x.var + 1;
        if (x.kind == GateKind::Not && c.gate(x.inputs[0]).kind == GateKind::Var) return -(c.gate(x.inputs[0]).var + 1);
        return 0;
    };
    std::vector<int> out;
    if (int l = literal(id)) out.push_back(l);
    const Gate& g = c.gate(id);
    if (g.kind == GateKind::And)
        for (int in : g.inputs)
            if (int l = literal(in)) out.push_back(l);
    return out;
}

bool syntacticallyDisjoint(const Circuit& c, int a, int b) {
    auto isFalse = [&](int g) { return c.gate(g).kind == GateKind::Const && c.gate(g).var == 0; };
    if (isFalse(a) || isFalse(b)) return true;
    std::vector<int> la = forcedLiterals(c, a), lb = forcedLiterals(c, b);
    for (int x : la)
        if (std::find(lb.begin(), lb.end(), -x) != lb.end()) return true;
    return false;
}

class Tseitin {
public:
    Tseitin(const Circuit& c, const std::vector<int>& roots) {
        for (int id : unionCone(c, roots)) {
            const Gate& g = c.gate(id);
            int y = ++cnf.numVars;
            satVar.emplace(id, y);
            auto in = [&](std::size_t i) { return satVar.at(g.inputs[i]); };
            switch (g.kind) {
                case GateKind::Const: cnf.clauses.push_back({g.var ? y : -y}); break;
                case GateKind::Var: break;
                case GateKind::Not:
                    cnf.clauses.push_back({-y, -in(0)});
                    cnf.clauses.push_back({y, in(0)});
                    break;
                case GateKind::And: {
                    std::vector<int> big{y};
                    for (std::size_t i = 0; i < g.inputs.size(); ++i) {
                        cnf.clauses.push_back({-y, in(i)});
                        big.push_back(-in(i));
                    }
                    cnf.clauses.push_back(std::move(big));
                    break;
                }
                case GateKind::Or: {
                    std::vector<int> big{-y};
                    for (std::size_t i = 0; i < g.inputs.size(); ++i) {
                        cnf.clauses.push_back({y, -in(i)});
                        big.push_back(in(i));
                    }
                    cnf.clauses.push_back(std::move(big));
                    break;
                }
            }
        }
    }

    bool bothSatisfiable(int a, int b, SatBackend& backend) const {
        CnfFormula f = cnf;
        f.clauses.push_back({satVar.at(a)});
        f.clauses.push_back({satVar.at(b)});
        SatResult r = backend.solve(f);
        if (r.status == SatStatus::Unknown) throw std::runtime_error("determinism check inconclusive: " + r.diagnostic);
        return r.status == SatStatus::Sat;
    }

private:
    CnfFormula cnf;
    std::unordered_map<int, int> satVar;
};

DeterminismMode resolve(DeterminismMode mode, std::size_t numVars) {
    if (mode == DeterminismMode::Auto)
        return numVars <= static_cast<std::size_t>(kAutoExhaustiveVars) ? DeterminismMode::Exhaustive
                                                                          : DeterminismMode::Sat;
    if (mode == DeterminismMode::Exhaustive && numVars > static_cast<std::size_t>(kMaxExhaustiveVars))
        throw std::invalid_argument("exhaustive determinism check limited to 22 variables");
    return mode;
}

bool disjointBySat(const Circuit& c, const std::vector<int>& children, SatBackend* backend) {
    std::unique_ptr<SatBackend> owned;
    std::unique_ptr<Tseitin> enc;
    for (std::size_t i = 0; i < children.size(); ++i)
        for (std::size_t j = i + 1; j < children.size(); ++j) {
            if (syntacticallyDisjoint(c, children[i], children[j])) continue;
            if (!backend) {
                owned = std::make_unique<EmbeddedSolver>();
                backend = owned.get();
            }
            if (!enc) enc = std::make_unique<Tseitin>(c, children);
            if (enc->bothSatisfiable(children[i], children[j], *backend)) return false;
        }
    return true;
}

}  // namespace

bool checkDeterministic(const Circuit& c, DeterminismMode mode, SatBackend* backend) {
    std::vector<int> gates = c.cone();
    std::vector<int> vars = c.vars(c.output());
    mode = resolve(mode, vars.size());
    if (mode == DeterminismMode::Exhaustive) {
        std::vector<int> ors;
        for (int id : gates)
            if (c.gate(id).kind == GateKind::Or) ors.push_back(id);
        return forEachBlock(c, gates, vars, [&](const std::vector<std::uint64_t>& val, std::uint64_t valid) {
            for (int id : ors) {
                std::uint64_t seen = 0;
                for (int in : c.gate(id).inputs) {
                    std::uint64_t w = val[static_cast<std::size_t>(in)] & valid;
                    if (seen & w) return false;
                    seen |= w;
                }
            }
            return true;
        });
    }
    for (int id : gates) {
        const Gate& g = c.gate(id);
        if (g.kind == GateKind::Or && !disjointBySat(c, g.inputs, backend)) return false;
    }
    return true;
}

bool pairwiseDisjoint(const Circuit& c, const std::vector<int>& roots, DeterminismMode mode, SatBackend* backend) {
    std::vector<int> vars = unionVars(c, roots);
    mode = resolve(mode, vars.size());
    if (mode == DeterminismMode::Sat) return disjointBySat(c, roots, backend);
    return forEachBlock(c, unionCone(c, roots), vars, [&](const std::vector<std::uint64_t>& val, std::uint64_t valid) {
        std::uint64_t seen = 0;
        for (int r : roots) {
            std::uint64_t w = val[static_cast<std::size_t>(r)] & valid;
            if (seen & w) return false;
            seen |= w;
        }
        return true;
    });
}

namespace {

template <class T>
T probability(const Circuit& c, const std::vector<T>& probs) {
    std::vector<T> val(c.size());
    for (int id : c.cone()) {
        const Gate& g = c.gate(id);
        T v{};
        switch (g.kind) {
            case GateKind::Const: v = g.var; break;
            case GateKind::Var:
                if (static_cast<std::size_t>(g.var) >= probs.size())
                    throw std::invalid_argument("no probability for variable " + std::to_string(g.var));
                v = probs[static_cast<std::size_t>(g.var)];
                break;
            case GateKind::Not: v = 1 - val[static_cast<std::size_t>(g.inputs[0])]; break;
            case GateKind::And:
                v = 1;
                for (int in : g.inputs) v *= val[static_cast<std::size_t>(in)];
                break;
            case GateKind::Or:
                v = 0;
                for (int in : g.inputs) v += val[static_cast<std::size_t>(in)];
                break;
        }
        val[static_cast<std::size_t>(id)] = v;
    }
    return val[static_cast<std::size_t>(c.output())];
}

}  // namespace

Rational evalProbability(const Circuit& c, const std::vector<Rational>& probs) {
    Rational r = probability<Rational>(c, probs);
    r.canonicalize();
    return r;
}

double evalProbabilityDouble(const Circuit& c, const std::vector<double>& probs) { return probability<double>(c, probs); }

std::string dumpCircuit(const Circuit& c) {
    std::ostringstream out;
    out << "c vars " << c.numVars() << '\n';
    for (std::size_t id = 0; id < c.size(); ++id) {
        const Gate& g = c.gate(static_cast<int>(id));
        out << "gate " << id << ' ' << gateKindName(g.kind);
        if (g.kind == GateKind::Const || g.kind == GateKind::Var) out << ' ' << g.var;
        for (int in : g.inputs) out << ' ' << in;
        out << '\n';
    }
    if (c.hasOutput()) out << "output " << c.output() << '\n';
    return out.str();
}

Circuit parseCircuit(std::string_view text, std::size_t nodeBudget) {
    struct Line {
        long id;
        std::string kind;
        std::vector<long> args;
    };
    std::vector<Line> lines;
    long output = -1;
    int numVars = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        std::istringstream ls(raw);
        std::string head;
        if (!(ls >> head)) continue;
        auto fail = [&](const std::string& why) {
            return std::invalid_argument("circuit line " + std::to_string(lineNo) + ": " + why);
        };
        if (head == "c") {
            std::string word;
            long n;
            if (ls >> word && word == "vars" && ls >> n) numVars = std::max(numVars, static_cast<int>(n));
            continue;
        }
        if (head == "output") {
            if (!(ls >> output)) throw fail("missing output id");
            continue;
        }
        if (head != "gate") throw fail("expected `gate` or `output`");
        Line l;
        if (!(ls >> l.id >> l.kind)) throw fail("expected `gate <id> <kind>`");
        for (long a; ls >> a;) l.args.push_back(a);
        if (!ls.eof()) throw fail("non-numeric argument");
        if (l.kind == "VAR") {
            if (l.args.size() != 1 || l.args[0] < 0) throw fail("VAR takes one variable index");
            numVars = std::max(numVars, static_cast<int>(l.args[0]) + 1);
        }
        lines.push_back(std::move(l));
    }
    Circuit c(numVars, nodeBudget);
    std::unordered_map<long, int> ids;
    auto ref = [&](long id) {
        auto it = ids.find(id);
        if (it == ids.end()) throw std::invalid_argument("gate " + std::to_string(id) + " used before definition");
        return it->second;
    };
    for (const Line& l : lines) {
        if (ids.count(l.id)) throw std::invalid_argument("gate " + std::to_string(l.id) + " defined twice");
        int g;
        if (l.kind == "CONST") {
            if (l.args.size() != 1 || (l.args[0] != 0 && l.args[0] != 1)) throw std::invalid_argument("CONST takes 0 or 1");
            g = c.constant(l.args[0] == 1);
        } else if (l.kind == "VAR") {
            g = c.var(static_cast<int>(l.args[0]));
        } else {
            GateKind kind;
            if (l.kind == "NOT")
                kind = GateKind::Not;
            else if (l.kind == "AND")
                kind = GateKind::And;
            else if (l.kind == "OR")
                kind = GateKind::Or;
            else
                throw std::invalid_argument("unknown gate kind `" + l.kind + "`");
            std::vector<int> in;
            for (long a : l.args) in.push_back(ref(a));
            g = c.rawGate(kind, std::move(in));
        }
        ids.emplace(l.id, g);
    }
    if (output >= 0) c.setOutput(ref(output));
    return c;
}

}  // namespace hq

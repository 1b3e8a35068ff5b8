#include "hq/sat.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unistd.h>
#include <sys/wait.h>

namespace hq {

const char* statusName(SatStatus s) {
    switch (s) {
        case SatStatus::Sat: return "SAT";
        case SatStatus::Unsat: return "UNSAT";
        case SatStatus::Unknown: return "UNKNOWN";
    }
    return "?";
}

namespace {

using Lit = int;  // 2*var + negated, var 0-based

inline Lit mkLit(int dimacs) { return dimacs > 0 ? 2 * (dimacs - 1) : 2 * (-dimacs - 1) + 1; }
inline int varOf(Lit l) { return l >> 1; }
inline Lit neg(Lit l) { return l ^ 1; }

class Cdcl {
public:
    Cdcl(const CnfFormula& cnf, std::uint64_t seed) : n_(cnf.numVars), rng_(seed) {
        value_.assign(n_, -1);
        level_.assign(n_, 0);
        reason_.assign(n_, -1);
        activity_.assign(n_, 0.0);
        phase_.assign(n_, 0);
        seen_.assign(n_, 0);
        watches_.resize(2 * static_cast<std::size_t>(n_));
        heapPos_.assign(n_, -1);
        std::uniform_real_distribution<double> jitter(0.0, 1e-5);
        for (int v = 0; v < n_; ++v) {
            activity_[v] = jitter(rng_);
            heapInsert(v);
        }
        for (const auto& raw : cnf.clauses) {
            if (!ok_) break;
            addInput(raw);
        }
    }

    SatStatus run(std::uint64_t budget) {
        if (!ok_) return SatStatus::Unsat;
        if (propagate() != -1) return SatStatus::Unsat;
        std::uint64_t conflicts = 0;
        for (int restart = 0;; ++restart) {
            std::uint64_t limit = 100 * luby(restart);
            SatStatus s = search(limit, conflicts, budget);
            if (s != SatStatus::Unknown) return s;
            if (conflicts >= budget) return SatStatus::Unknown;
        }
    }

    std::vector<bool> model() const {
        std::vector<bool> m(static_cast<std::size_t>(n_) + 1, false);
        for (int v = 0; v < n_; ++v) m[v + 1] = value_[v] == 1;
        return m;
    }

private:
    int n_;
    bool ok_ = true;
    std::mt19937_64 rng_;
    std::vector<std::vector<Lit>> clauses_;
    std::vector<std::uint8_t> learnt_;
    std::vector<std::uint8_t> deleted_;
    std::vector<std::vector<int>> watches_;
    std::vector<int> value_;  // -1 unassigned, 0 false, 1 true
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<Lit> trail_;
    std::vector<std::size_t> trailLim_;
    std::size_t qhead_ = 0;
    std::vector<double> activity_;
    double varInc_ = 1.0;
    std::vector<std::uint8_t> phase_;
    std::vector<std::uint8_t> seen_;
    std::vector<int> heap_;
    std::vector<int> heapPos_;
    std::size_t numLearnt_ = 0;
    std::size_t maxLearnt_ = 0;

    static std::uint64_t luby(int i) {
        // Luby sequence 1,1,2,1,1,2,4,...
        std::uint64_t size = 1;
        int seq = 0;
        while (size < static_cast<std::uint64_t>(i) + 1) {
            ++seq;
            size = 2 * size + 1;
        }
        std::uint64_t x = static_cast<std::uint64_t>(i);
        while (size - 1 != x) {
            size = (size - 1) >> 1;
            --seq;
            x = x % size;
        }
        return std::uint64_t{1} << seq;
    }

    int litValue(Lit l) const {
        int v = value_[varOf(l)];
        return v < 0 ? -1 : (v ^ (l & 1));
    }
    int decisionLevel() const { return static_cast<int>(trailLim_.size()); }

    void addInput(const std::vector<int>& raw) {
        std::vector<Lit> c;
        for (int d : raw) {
            if (d == 0 || std::abs(d) > n_) throw std::invalid_argument("literal out of range");
            c.push_back(mkLit(d));
        }
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        for (std::size_t i = 1; i < c.size(); ++i)
            if (c[i] == neg(c[i - 1])) return;  // tautology
        std::vector<Lit> kept;
        for (Lit l : c) {
            int lv = litValue(l);
            if (lv == 1) return;
            if (lv == -1) kept.push_back(l);
        }
        if (kept.empty()) {
            ok_ = false;
        } else if (kept.size() == 1) {
            enqueue(kept[0], -1);
            if (propagate() != -1) ok_ = false;
        } else {
            attach(std::move(kept), false);
        }
    }

    int attach(std::vector<Lit> c, bool learnt) {
        int idx = static_cast<int>(clauses_.size());
        watches_[c[0]].push_back(idx);
        watches_[c[1]].push_back(idx);
        clauses_.push_back(std::move(c));
        learnt_.push_back(learnt);
        deleted_.push_back(0);
        if (learnt) ++numLearnt_;
        return idx;
    }

    void enqueue(Lit l, int reason) {
        int v = varOf(l);
        value_[v] = (l & 1) ? 0 : 1;
        level_[v] = decisionLevel();
        reason_[v] = reason;
        trail_.push_back(l);
    }

    // Returns conflicting clause index or -1.
    int propagate() {
        while (qhead_ < trail_.size()) {
            Lit p = trail_[qhead_++];
            Lit falseLit = neg(p);
            auto& ws = watches_[falseLit];
            std::size_t i = 0, j = 0;
            int conflict = -1;
            while (i < ws.size()) {
                int ci = ws[i++];
                if (deleted_[ci]) continue;
                auto& c = clauses_[ci];
                if (c[0] == falseLit) std::swap(c[0], c[1]);
                if (litValue(c[0]) == 1) {
                    ws[j++] = ci;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.size(); ++k) {
                    if (litValue(c[k]) != 0) {
                        std::swap(c[1], c[k]);
                        watches_[c[1]].push_back(ci);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[j++] = ci;
                if (litValue(c[0]) == 0) {
                    conflict = ci;
                    while (i < ws.size()) ws[j++] = ws[i++];
                } else {
                    enqueue(c[0], ci);
                }
            }
            ws.resize(j);
            if (conflict != -1) return conflict;
        }
        return -1;
    }

    void bumpVar(int v) {
        activity_[v] += varInc_;
        if (activity_[v] > 1e100) {
            for (auto& a : activity_) a *= 1e-100;
            varInc_ *= 1e-100;
        }
        if (heapPos_[v] >= 0) siftUp(heapPos_[v]);
    }

    void analyze(int confl, std::vector<Lit>& learnt, int& btLevel) {
        learnt.assign(1, 0);
        int pathC = 0;
        Lit p = -1;
        std::size_t index = trail_.size();
        do {
            const auto& c = clauses_[confl];
            for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
                Lit q = c[k];
                int v = varOf(q);
                if (!seen_[v] && level_[v] > 0) {
                    seen_[v] = 1;
                    bumpVar(v);
                    if (level_[v] >= decisionLevel())
                        ++pathC;
                    else
                        learnt.push_back(q);
                }
            }
            while (!seen_[varOf(trail_[--index])]) {
            }
            p = trail_[index];
            confl = reason_[varOf(p)];
            seen_[varOf(p)] = 0;
            --pathC;
            if (pathC > 0 && confl >= 0) {
                // reason clauses keep the implied literal first
                auto& rc = clauses_[confl];
                if (rc[0] != p) {
                    auto it = std::find(rc.begin(), rc.end(), p);
                    std::swap(rc[0], *it);
                }
            }
        } while (pathC > 0);
        learnt[0] = neg(p);
        for (std::size_t k = 1; k < learnt.size(); ++k) seen_[varOf(learnt[k])] = 0;

        btLevel = 0;
        if (learnt.size() > 1) {
            std::size_t maxI = 1;
            for (std::size_t k = 2; k < learnt.size(); ++k)
                if (level_[varOf(learnt[k])] > level_[varOf(learnt[maxI])]) maxI = k;
            std::swap(learnt[1], learnt[maxI]);
            btLevel = level_[varOf(learnt[1])];
        }
        varInc_ /= 0.95;
    }

    void backtrack(int lvl) {
        if (decisionLevel() <= lvl) return;
        for (std::size_t i = trail_.size(); i-- > trailLim_[lvl];) {
            int v = varOf(trail_[i]);
            phase_[v] = static_cast<std::uint8_t>(value_[v]);
            value_[v] = -1;
            reason_[v] = -1;
            if (heapPos_[v] < 0) heapInsert(v);
        }
        trail_.resize(trailLim_[lvl]);
        trailLim_.resize(lvl);
        qhead_ = trail_.size();
    }

    bool locked(int ci) const {
        const auto& c = clauses_[ci];
        int v = varOf(c[0]);
        return value_[v] != -1 && reason_[v] == ci;
    }

    void reduceLearnts() {
        std::vector<int> cand;
        for (int ci = 0; ci < static_cast<int>(clauses_.size()); ++ci)
            if (learnt_[ci] && !deleted_[ci] && clauses_[ci].size() > 2 && !locked(ci)) cand.push_back(ci);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            return clauses_[a].size() != clauses_[b].size() ? clauses_[a].size() > clauses_[b].size() : a < b;
        });
        for (std::size_t i = 0; i < cand.size() / 2; ++i) {
            deleted_[cand[i]] = 1;
            clauses_[cand[i]].clear();
            clauses_[cand[i]].shrink_to_fit();
            --numLearnt_;
        }
        for (auto& ws : watches_)
            ws.erase(std::remove_if(ws.begin(), ws.end(), [&](int ci) { return deleted_[ci] != 0; }), ws.end());
    }

    SatStatus search(std::uint64_t limit, std::uint64_t& conflicts, std::uint64_t budget) {
        std::uint64_t local = 0;
        std::vector<Lit> learnt;
        if (maxLearnt_ == 0) maxLearnt_ = std::max<std::size_t>(clauses_.size() / 3, 2000);
        for (;;) {
            int confl = propagate();
            if (confl != -1) {
                ++conflicts;
                ++local;
                if (decisionLevel() == 0) return SatStatus::Unsat;
                int bt;
                analyze(confl, learnt, bt);
                backtrack(bt);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    Lit first = learnt[0];
                    int ci = attach(learnt, true);
                    enqueue(first, ci);
                }
                if (conflicts >= budget) return SatStatus::Unknown;
                continue;
            }
            if (local >= limit) {
                backtrack(0);
                return SatStatus::Unknown;
            }
            if (numLearnt_ >= maxLearnt_ + trail_.size()) {
                reduceLearnts();
                maxLearnt_ = maxLearnt_ * 11 / 10;
            }
            int next = -1;
            while (!heap_.empty()) {
                int v = heapPop();
                if (value_[v] == -1) {
                    next = v;
                    break;
                }
            }
            if (next == -1) return SatStatus::Sat;
            trailLim_.push_back(trail_.size());
            enqueue(2 * next + (phase_[next] ? 0 : 1), -1);
        }
    }

    // max-heap on activity
    bool heapLess(int a, int b) const { return activity_[a] > activity_[b]; }
    void heapInsert(int v) {
        heapPos_[v] = static_cast<int>(heap_.size());
        heap_.push_back(v);
        siftUp(heapPos_[v]);
    }
    void siftUp(int i) {
        int v = heap_[i];
        while (i > 0) {
            int parent = (i - 1) / 2;
            if (!heapLess(v, heap_[parent])) break;
            heap_[i] = heap_[parent];
            heapPos_[heap_[i]] = i;
            i = parent;
        }
        heap_[i] = v;
        heapPos_[v] = i;
    }
    int heapPop() {
        int top = heap_[0];
        heapPos_[top] = -1;
        int last = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            int i = 0;
            int size = static_cast<int>(heap_.size());
            for (;;) {
                int child = 2 * i + 1;
                if (child >= size) break;
                if (child + 1 < size && heapLess(heap_[child + 1], heap_[child])) ++child;
                if (!heapLess(heap_[child], last)) break;
                heap_[i] = heap_[child];
                heapPos_[heap_[i]] = i;
                i = child;
            }
            heap_[i] = last;
            heapPos_[last] = i;
        }
        return top;
    }
};

}  // namespace

SatResult EmbeddedSolver::solve(const CnfFormula& cnf) {
    SatResult r;
    Cdcl solver(cnf, seed_);
    r.status = solver.run(conflictBudget_);
    if (r.status == SatStatus::Sat) {
        r.model = solver.model();
        if (!satisfies(cnf, r.model)) {
            r.status = SatStatus::Unknown;
            r.diagnostic = "embedded solver produced a non-model";
            r.model.clear();
        }
    } else if (r.status == SatStatus::Unknown) {
        r.diagnostic = "conflict budget exhausted";
    }
    return r;
}

bool satisfies(const CnfFormula& cnf, const std::vector<bool>& model) {
    if (model.size() < static_cast<std::size_t>(cnf.numVars) + 1) return false;
    for (const auto& c : cnf.clauses) {
        bool sat = false;
        for (int l : c) {
            if (model[std::abs(l)] == (l > 0)) {
                sat = true;
                break;
            }
        }
        if (!sat) return false;
    }
    return true;
}

std::string toDimacs(const CnfFormula& cnf, const std::vector<std::string>& comments) {
    std::ostringstream out;
    for (const auto& c : comments) out << "c " << c << '\n';
    out << "p cnf " << cnf.numVars << ' ' << cnf.clauses.size() << '\n';
    for (const auto& c : cnf.clauses) {
        for (int l : c) out << l << ' ';
        out << "0\n";
    }
    return out.str();
}

CnfFormula parseDimacs(std::string_view text) {
    std::istringstream in{std::string(text)};
    CnfFormula cnf;
    std::string line;
    bool header = false;
    std::size_t declared = 0;
    std::vector<int> cur;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
        std::istringstream ls(line);
        if (line[0] == 'p') {
            std::string p, fmt;
            ls >> p >> fmt >> cnf.numVars >> declared;
            if (fmt != "cnf" || !ls) throw std::invalid_argument("bad DIMACS header: " + line);
            header = true;
            continue;
        }
        if (!header) throw std::invalid_argument("DIMACS clause before header");
        int lit;
        while (ls >> lit) {
            if (lit == 0) {
                cnf.clauses.push_back(cur);
                cur.clear();
            } else {
                if (std::abs(lit) > cnf.numVars) throw std::invalid_argument("DIMACS literal out of range");
                cur.push_back(lit);
            }
        }
    }
    if (!header) throw std::invalid_argument("missing DIMACS header");
    if (!cur.empty()) cnf.clauses.push_back(cur);
    if (cnf.clauses.size() != declared) throw std::invalid_argument("DIMACS clause count mismatch");
    return cnf;
}

SatResult parseSolverOutput(std::string_view text, int numVars) {
    SatResult r;
    std::istringstream in{std::string(text)};
    std::string line;
    bool sawStatus = false;
    std::vector<bool> model(static_cast<std::size_t>(numVars) + 1, false);
    while (std::getline(in, line)) {
        if (line.rfind("s ", 0) == 0) {
            sawStatus = true;
            std::string s = line.substr(2);
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            if (s == "SATISFIABLE")
                r.status = SatStatus::Sat;
            else if (s == "UNSATISFIABLE")
                r.status = SatStatus::Unsat;
            else
                r.status = SatStatus::Unknown;
        } else if (line.rfind("v ", 0) == 0) {
            std::istringstream ls(line.substr(2));
            int lit;
            while (ls >> lit) {
                if (lit == 0) break;
                if (std::abs(lit) <= numVars) model[std::abs(lit)] = lit > 0;
            }
        }
    }
    if (!sawStatus) {
        r.status = SatStatus::Unknown;
        r.diagnostic = "solver printed no status line";
    } else if (r.status == SatStatus::Unknown) {
        r.diagnostic = "solver reported UNKNOWN";
    }
    if (r.status == SatStatus::Sat) r.model = std::move(model);
    return r;
}

std::string formatSolverOutput(const SatResult& result, int numVars) {
    std::ostringstream out;
    switch (result.status) {
        case SatStatus::Sat: out << "s SATISFIABLE\n"; break;
        case SatStatus::Unsat: out << "s UNSATISFIABLE\n"; break;
        case SatStatus::Unknown: out << "s UNKNOWN\n"; break;
    }
    if (result.status == SatStatus::Sat) {
        out << 'v';
        for (int v = 1; v <= numVars; ++v) out << ' ' << (result.model[v] ? v : -v);
        out << " 0\n";
    }
    return out.str();
}

SatResult ExternalSolver::solve(const CnfFormula& cnf) {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    fs::path file = fs::temp_directory_path() /
                    ("hq-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".cnf");
    {
        std::ofstream out(file);
        if (!out) return {SatStatus::Unknown, {}, "cannot write " + file.string()};
        out << toDimacs(cnf);
    }
    std::string cmd = command_ + " '" + file.string() + "' 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        fs::remove(file);
        return {SatStatus::Unknown, {}, "cannot start `" + command_ + "`"};
    }
    std::string output;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) output.append(buf, got);
    int rc = ::pclose(pipe);
    fs::remove(file);
    SatResult r = parseSolverOutput(output, cnf.numVars);
    // Exit codes 10/20 are the competition convention; anything else with no status is a failure.
    if (r.status == SatStatus::Unknown && r.diagnostic.empty())
        r.diagnostic = "external solver exit status " + std::to_string(WEXITSTATUS(rc));
    if (r.status == SatStatus::Sat && !satisfies(cnf, r.model)) {
        r.status = SatStatus::Unknown;
        r.diagnostic = "external solver model does not satisfy the formula";
        r.model.clear();
    }
    return r;
}

std::unique_ptr<SatBackend> makeBackend(const std::string& spec, std::uint64_t seed) {
    if (spec.empty() || spec == "embedded") return std::make_unique<EmbeddedSolver>(seed);
    return std::make_unique<ExternalSolver>(spec);
}

}  // namespace hq

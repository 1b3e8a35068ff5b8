#include "hq/niceness.hpp"

#include <algorithm>
#include <stdexcept>

namespace hq {

const char* nicenessName(Niceness n) {
    switch (n) {
        case Niceness::NotComputed: return "-";
        case Niceness::Nice: return "N";
        case Niceness::CoNice: return "coN";
        case Niceness::Bad: return "BAD";
        case Niceness::Unknown: return "UNKNOWN";
    }
    return "?";
}

int NiceInstance::var(VarSet nu, int l) const {
    auto it = std::lower_bound(sat.begin(), sat.end(), nu);
    if (it == sat.end() || *it != nu) throw std::out_of_range("valuation is not satisfying");
    if (l < 0 || l > k) throw std::out_of_range("box index out of range");
    return static_cast<int>(it - sat.begin()) * (k + 1) + l + 1;
}

std::pair<VarSet, int> NiceInstance::decode(int satVar) const {
    if (satVar < 1 || satVar > cnf.numVars) throw std::out_of_range("SAT variable out of range");
    int idx = satVar - 1;
    return {sat[static_cast<std::size_t>(idx / (k + 1))], idx % (k + 1)};
}

BoolFn NiceDecomposition::boxFunction(int l) const {
    BoolFn g(source.k());
    for (VarSet nu : boxes.at(static_cast<std::size_t>(l))) g.set(nu, true);
    return g;
}

NiceInstance buildNiceInstance(const BoolFn& f) {
    NiceInstance inst;
    inst.k = f.k();
    inst.sat = satValuations(f);
    int width = f.k() + 1;
    inst.cnf.numVars = static_cast<int>(inst.sat.size()) * width;
    auto x = [&](std::size_t i, int l) { return static_cast<int>(i) * width + l + 1; };
    auto& cl = inst.cnf.clauses;

    // (1) every satisfying valuation goes in some box
    for (std::size_t i = 0; i < inst.sat.size(); ++i) {
        std::vector<int> c;
        for (int l = 0; l < width; ++l) c.push_back(x(i, l));
        cl.push_back(std::move(c));
    }
    // (2) at most one box, pairwise
    for (std::size_t i = 0; i < inst.sat.size(); ++i)
        for (int l = 0; l < width; ++l)
            for (int m = l + 1; m < width; ++m) cl.push_back({-x(i, l), -x(i, m)});
    // (3) box l is symmetric around l
    for (std::size_t i = 0; i < inst.sat.size(); ++i) {
        for (int l = 0; l < width; ++l) {
            VarSet t = tgl(inst.sat[i], l);
            if (!f[t])
                cl.push_back({-x(i, l)});
            else
                cl.push_back({-x(i, l), inst.var(t, l)});
        }
    }
    return inst;
}

SatResult solve(const NiceInstance& inst, SatBackend& backend) { return backend.solve(inst.cnf); }

NiceDecomposition extractDecomposition(const NiceInstance& inst, const BoolFn& f, const std::vector<bool>& model) {
    if (f.k() != inst.k || satValuations(f) != inst.sat)
        throw std::invalid_argument("instance was not built from this function");
    if (!satisfies(inst.cnf, model)) throw std::logic_error("model does not satisfy nice(f)");
    NiceDecomposition d{f, std::vector<std::vector<VarSet>>(static_cast<std::size_t>(inst.k + 1))};
    for (std::size_t i = 0; i < inst.sat.size(); ++i)
        for (int l = 0; l <= inst.k; ++l)
            if (model[static_cast<std::size_t>(inst.var(inst.sat[i], l))]) d.boxes[l].push_back(inst.sat[i]);
    if (!verifyDecomposition(f, d)) throw std::logic_error("extracted boxes are not a nice decomposition");
    return d;
}

bool verifyDecomposition(const BoolFn& f, const NiceDecomposition& d) {
    if (d.source != f) return false;
    if (d.boxes.size() != static_cast<std::size_t>(f.k() + 1)) return false;
    std::vector<int> owner(f.size(), -1);
    for (int l = 0; l <= f.k(); ++l) {
        for (VarSet nu : d.boxes[l]) {
            if (nu >= f.size() || !f[nu] || owner[nu] != -1) return false;
            owner[nu] = l;
        }
    }
    for (VarSet nu = 0; nu < f.size(); ++nu) {
        if (f[nu] && owner[nu] == -1) return false;
        if (owner[nu] >= 0 && owner[tgl(nu, owner[nu])] != owner[nu]) return false;
    }
    return true;
}

namespace {

bool assignBoxes(const BoolFn& f, const std::vector<VarSet>& sat, std::vector<int>& box, std::size_t next) {
    while (next < sat.size() && box[sat[next]] != -1) ++next;
    if (next == sat.size()) return true;
    VarSet nu = sat[next];
    for (int l = 0; l <= f.k(); ++l) {
        VarSet t = tgl(nu, l);
        if (!f[t] || box[t] != -1) continue;
        box[nu] = l;
        box[t] = l;
        if (assignBoxes(f, sat, box, next + 1)) return true;
        box[nu] = -1;
        box[t] = -1;
    }
    return false;
}

}  // namespace

bool bruteForceNice(const BoolFn& f) {
    if (f.k() > 3) throw std::invalid_argument("bruteForceNice supports k <= 3");
    std::vector<int> box(f.size(), -1);
    return assignBoxes(f, satValuations(f), box, 0);
}

std::string emitDimacs(const NiceInstance& inst) {
    std::vector<std::string> comments;
    comments.push_back("nice(phi) k=" + std::to_string(inst.k) + " sat=" + std::to_string(inst.sat.size()));
    for (int v = 1; v <= inst.cnf.numVars; ++v) {
        auto [nu, l] = inst.decode(v);
        comments.push_back("x " + std::to_string(v) + " nu=" + formatVarSet(nu) + " l=" + std::to_string(l));
    }
    return toDimacs(inst.cnf, comments);
}

NiceCheck checkNice(const BoolFn& f, SatBackend& backend) {
    NiceCheck out;
    NiceInstance inst = buildNiceInstance(f);
    SatResult r = solve(inst, backend);
    out.status = r.status;
    out.diagnostic = r.diagnostic;
    if (r.status == SatStatus::Sat) {
        try {
            out.decomposition = extractDecomposition(inst, f, r.model);
        } catch (const std::logic_error& e) {
            out.status = SatStatus::Unknown;
            out.diagnostic = std::string("unverifiable model: ") + e.what();
        }
    }
    return out;
}

NicenessVerdict classifyFunction(const BoolFn& f, SatBackend& backend) {
    NicenessVerdict v;
    v.nice = checkNice(f, backend);
    if (v.nice.status == SatStatus::Sat) {
        v.niceness = Niceness::Nice;
        return v;
    }
    if (v.nice.status == SatStatus::Unknown) {
        v.niceness = Niceness::Unknown;
        return v;
    }
    v.coNice = checkNice(negate(f), backend);
    switch (v.coNice.status) {
        case SatStatus::Sat: v.niceness = Niceness::CoNice; break;
        case SatStatus::Unsat: v.niceness = Niceness::Bad; break;
        case SatStatus::Unknown: v.niceness = Niceness::Unknown; break;
    }
    return v;
}

}  // namespace hq

#pragma once

#include "hq/boolfun.hpp"
#include "hq/niceness.hpp"

namespace fixture {

inline hq::BoolFn q9() { return hq::parseFunction("(2|3)&(0|3)&(1|3)&(0|1|2)", 3); }

inline hq::BoolFn coNice5() { return hq::parseFunction("24&034&013&12&15&05&35&23&02&25&014&45", 5); }

// Hand decomposition of q9 into 0&~2&3, ~1&2&3, ~0&1&3, 0&1&2, each placed in
// the box of a variable it does not depend on.
inline hq::NiceDecomposition q9Boxes() {
    hq::BoolFn f = q9();
    hq::NiceDecomposition d{f, std::vector<std::vector<hq::VarSet>>(4)};
    auto has = [](hq::VarSet nu, int v) { return (nu >> v & 1) != 0; };
    for (hq::VarSet nu = 0; nu < 16; ++nu) {
        if (has(nu, 0) && !has(nu, 2) && has(nu, 3)) d.boxes[1].push_back(nu);
        if (!has(nu, 1) && has(nu, 2) && has(nu, 3)) d.boxes[0].push_back(nu);
        if (!has(nu, 0) && has(nu, 1) && has(nu, 3)) d.boxes[2].push_back(nu);
        if (has(nu, 0) && has(nu, 1) && has(nu, 2)) d.boxes[3].push_back(nu);
    }
    return d;
}

}  // namespace fixture

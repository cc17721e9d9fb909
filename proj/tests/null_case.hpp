#pragma once
// Manufactured case whose solution lies in the k=1 spaces: quadratic
// divergence-free velocity, linear mean-zero pressure, constant potential.
// All data are then polynomial and reproduced by the elementwise projections.

#include "spb/harness.hpp"
#include "spb/jet.hpp"

namespace testcases {

inline spb::CaseSpec null_case() {
    spb::CaseSpec c = spb::make_case("convergence-square");
    c.name = "polynomial-null";
    c.exact = spb::fields_from_stream(
        [](const spb::Jet& x, const spb::Jet& y) { return x * x * y + x * y * y - y * y * y * (1.0 / 3.0); },
        [](const spb::Jet& x, const spb::Jet& y) { return x - y; },
        [](const spb::Jet&, const spb::Jet&) { return spb::Jet(0.3); });
    c.loads = spb::manufactured_data(*c.exact, c.params);
    return c;
}

} // namespace testcases

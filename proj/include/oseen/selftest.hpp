#pragma once

#include <string>
#include <vector>

#include "oseen/mixed_assembly.hpp"

namespace oseen {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Deterministic invariant suite over all modules (quadrature exactness,
/// mesh consistency, trace continuity, commuting diagram, coercivity, IPP
/// equivalence, stabilisation positivity/scaling, jump-form semidefiniteness,
/// uniqueness with zero data). The stabilisation constants of `params` are
/// honoured so corrupted configurations are caught.
std::vector<CheckResult> run_selftest(const OseenParams& params);

}  // namespace oseen

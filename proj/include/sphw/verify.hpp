#pragma once

#include "sphw/kernels.hpp"

#include <string>
#include <vector>

namespace sphw {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    /// Deliberate kernel defect for mutation testing of the checks.
    GradientFault fault = GradientFault::None;
};

/// Fast self-checks: scheme coincidence at gamma = 2, LP against the exact
/// 1D solver, the equipartition 1/(4n) identity and momentum conservation.
std::vector<CheckResult> run_fast_checks(const VerifyOptions& opt = {});

} // namespace sphw

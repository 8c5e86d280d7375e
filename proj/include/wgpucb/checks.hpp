#pragma once

#include <string>
#include <vector>

namespace wgpucb {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Runs the invariant suite on small instances (a few seconds in total).
std::vector<CheckResult> run_invariant_checks();

}  // namespace wgpucb

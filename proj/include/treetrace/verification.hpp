#pragma once

#include <string>
#include <vector>

namespace treetrace {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Named invariant suites behind the `verify` command. The quick tier covers
// oracle equivalence on small trees plus the structural matrix identities;
// the full tier widens the oracle sweep and adds seeded Monte Carlo checks.
std::vector<CheckResult> run_verification(bool full);

} // namespace treetrace

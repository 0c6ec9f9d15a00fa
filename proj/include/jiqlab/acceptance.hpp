#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jiqlab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::vector<int> only;  // empty = all criteria
};

// Runs the acceptance criteria, printing one PASS/FAIL line per criterion to log.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts, std::ostream& log);

}  // namespace jiqlab

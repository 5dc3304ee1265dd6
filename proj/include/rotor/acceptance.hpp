#pragma once

#include <string>
#include <vector>

namespace rotor::app {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool check_passed = false; ///< numerical condition alone
    double seconds = 0.0;
    double limit_seconds = 0.0;
    std::string detail;

    bool passed() const noexcept { return check_passed && seconds < limit_seconds; }
};

/// Ids of all acceptance criteria, in order.
std::vector<int> criterion_ids();

/// Runs one criterion; unknown ids throw InvalidInput. Exceptions raised by
/// the computation are caught and reported as a failure.
CriterionResult run_criterion(int id);

/// "[PASS] 3  title  (12.3 s / 120 s)  detail"
std::string format_criterion(const CriterionResult& r);

struct Diagnostic {
    std::string name;
    double value = 0.0;
    std::string note;
};

/// Reported ratios for the asymptotic statements that have no desk-scale
/// pass/fail form.
std::vector<Diagnostic> report_diagnostics();

} // namespace rotor::app

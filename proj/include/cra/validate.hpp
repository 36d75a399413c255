#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cra {

struct CheckResult {
    std::string name;
    double margin = 0.0;     // worst observed deviation (units depend on the check)
    double tolerance = 0.0;  // pass bound on margin
    bool pass = false;
    std::string detail;
};

struct ValidateOptions {
    int tuples = 200;          // random parameter tuples per analytical check
    std::uint64_t seed = 1;
    long long series_n = 2000; // truncation of the series route
    bool sim = true;           // include the simulation-agreement check
    long long sim_horizon = 5000;
    int sim_runs = 50;
    int sim_tuples = 8;
    double sim_sigma = 5.0;    // acceptance band in standard errors
    bool inject_fault = false; // corrupt one coefficient to prove checks can fail
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool pass = false;
};

/// Cross-validation battery over randomized parameter tuples: the three
/// stationary routes against each other, the rational form against the
/// stationary route, marginal closed forms, partition identities, the
/// optimizer certificate, and optionally simulation agreement.
ValidationReport run_validation(const ValidateOptions& opt);

}  // namespace cra

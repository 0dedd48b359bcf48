#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "pandexit/scenario.hpp"

namespace pandexit::cli {

enum ExitCode : int {
    kOk = 0,
    kUsageOrValidation = 1,
    kNotConverged = 2,
    kIoError = 3,
};

/// Entry point of the `pandexit` tool. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Self-test suites seeded from a scenario: closed-form vs integrated
/// costates in both conventions, contagion partials vs finite differences,
/// and quadrature on known integrals. Deterministic for a fixed seed.
std::vector<SuiteResult> run_verification(const Scenario& s, std::uint64_t seed = 20201);

}  // namespace pandexit::cli

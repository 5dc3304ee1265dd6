#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rotor::app {

/// Everything a run depends on. Echoed verbatim into JSON output metadata.
struct RunConfig {
    std::string command;
    std::optional<long> P;
    std::optional<long> Q;
    std::optional<long> p;
    std::optional<long> q;
    std::optional<double> beta;
    std::optional<long> nu;
    double mu = 0.0;
    std::optional<std::size_t> grid;
    std::vector<double> mu_list;
    std::string output_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::optional<int> j;
    long N = 1;
    std::optional<long> T;
    double threshold = 1e-9;
    std::vector<long> q_list;
    int quadrature_points = 4000;
    bool report = false;
    std::string config_path;
    unsigned threads = 0; ///< not echoed: output must not depend on it
};

/// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name. Results go to the
/// --output file when given (summary on `out`), otherwise to `out` with the
/// summary on `err`. Diagnostics always go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rotor::app

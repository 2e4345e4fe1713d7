#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace epsweep::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Subcommand { Validate, Derive, Simulate, Analyze, Sweep, Direct };
const char* to_string(Subcommand s);

struct RunConfig {
    Subcommand subcommand = Subcommand::Validate;
    std::filesystem::path input_path;
    std::filesystem::path output_dir = ".";
    std::optional<double> dt;        ///< default: period / 2160
    std::optional<int> periods;      ///< simulate/direct: periods integrated (3); analyze/sweep: cap (50)
    double tol_converge = 1e-8;
    double tol_distinct = 1e-3;
    std::uint64_t seed = 0;
    double epsilon = 0.01;
    int trials = 50;
    int decimate = 1;
};

/// Exit codes: 0 success, 1 input/schema error, 2 violated mathematical
/// precondition, 3 solver failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Re-runs the configuration recorded in a manifest document.
int replay(const std::filesystem::path& manifest, std::ostream& out, std::ostream& err,
           std::optional<std::filesystem::path> output_dir = {});

int main(int argc, char** argv);

}  // namespace epsweep::cli

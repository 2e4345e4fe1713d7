#pragma once

#include "epsweep/format.hpp"
#include "epsweep/model.hpp"
#include "epsweep/qp.hpp"
#include "epsweep/signal.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace epsweep {

/// Accepts a JSON number, a decimal string, or an integer fraction "p/q".
/// Throws InputError naming `field` otherwise.
double parse_number(const Json& value, const std::string& field);

/// {"period": T, "points": [[t, v], ...]} where v is a number or an array.
PiecewiseLinearSignal parse_signal(const Json& value, const std::string& field);
Json signal_to_json(const PiecewiseLinearSignal& s);

/// Network document: `nodes`, `springs`, `displacement_loadings`, and an
/// optional `H_signal` or `f_signal`.
SpringNetwork parse_network(const Json& doc);
Json network_to_json(const SpringNetwork& network);

/// Raw moving polyhedron C + c(t) for direct-mode runs: `rows`, `lower`,
/// `upper` (null = unbounded), optional `metric` (identity by default),
/// `translation` signal and `initial_points`.
struct DirectProblem {
    qp::StaticPolytope shape;
    PiecewiseLinearSignal translation;
    std::vector<Vector> initial_points;
};
DirectProblem parse_direct_problem(const Json& doc);
Json direct_problem_to_json(const DirectProblem& problem);

/// Reads and parses a JSON file; parse errors become InputError with the
/// parser's line/column diagnostic.
Json read_json_file(const std::filesystem::path& path);

SpringNetwork load_network(const std::filesystem::path& path);
DirectProblem load_direct_problem(const std::filesystem::path& path);

}  // namespace epsweep

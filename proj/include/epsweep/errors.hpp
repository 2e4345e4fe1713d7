#pragma once

#include <stdexcept>
#include <string>

namespace epsweep {

/// Malformed input: bad schema, out-of-range ids, dimension mismatches.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A mathematical precondition of the model does not hold (rank condition,
/// connectivity, safe load, infeasible constraint set).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical kernel failed to converge or produced an invalid certificate.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace epsweep

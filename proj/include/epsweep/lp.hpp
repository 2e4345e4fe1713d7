#pragma once

#include "epsweep/linalg.hpp"

namespace epsweep::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
    Status status = Status::Infeasible;
    Vector x;
    double objective = 0.0;
};

/// min c.x subject to G x <= b with x free. Dense two-phase tableau simplex
/// with Bland's rule; meant for the tiny systems of this library.
Result minimize(const Vector& c, const Matrix& g, const Vector& b);

}  // namespace epsweep::lp

#pragma once

#include "epsweep/linalg.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace epsweep {

using Json = nlohmann::json;

/// Decimal with 17 significant digits ("%.17g"); round-trips every double.
std::string format_double(double x);

/// Serializes a JSON tree, printing every floating-point number with 17
/// significant digits. Non-finite numbers are written as null.
void write_json(std::ostream& os, const Json& value, int indent = 2);
std::string dump_json(const Json& value, int indent = 2);

/// Row-major nested arrays.
Json matrix_to_json(const Matrix& a);
Json vector_to_json(const Vector& v);

}  // namespace epsweep

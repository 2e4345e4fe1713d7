#include "epsweep/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace epsweep {

std::string format_double(double x) {
    if (x == 0.0) return "0";  // also folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

void write_value(std::ostream& os, const Json& v, int indent, int depth) {
    const auto pad = [&](int level) {
        if (indent > 0) os << '\n' << std::string(static_cast<std::size_t>(level * indent), ' ');
    };
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) { os << "{}"; return; }
            os << '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) os << ',';
                first = false;
                pad(depth + 1);
                os << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
                write_value(os, it.value(), indent, depth + 1);
            }
            pad(depth);
            os << '}';
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) { os << "[]"; return; }
            // arrays of scalars stay on one line so matrices read row by row
            const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) {
                return !e.is_structured();
            });
            os << '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) os << (flat ? ", " : ",");
                first = false;
                if (!flat) pad(depth + 1);
                write_value(os, e, indent, depth + 1);
            }
            if (!flat) pad(depth);
            os << ']';
            return;
        }
        case Json::value_t::number_float: {
            const double x = v.get<double>();
            os << (std::isfinite(x) ? format_double(x) : "null");
            return;
        }
        default:
            os << v.dump();
    }
}

}  // namespace

void write_json(std::ostream& os, const Json& value, int indent) {
    write_value(os, value, indent, 0);
    os << '\n';
}

std::string dump_json(const Json& value, int indent) {
    std::ostringstream os;
    write_json(os, value, indent);
    return os.str();
}

Json matrix_to_json(const Matrix& a) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

}  // namespace epsweep

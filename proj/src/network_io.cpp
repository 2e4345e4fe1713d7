#include "epsweep/network_io.hpp"

#include "epsweep/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace epsweep {

namespace {

double parse_decimal(const std::string& text, const std::string& field) {
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(x))
        throw InputError(field + ": cannot parse number \"" + text + "\"");
    return x;
}

const Json& require(const Json& obj, const char* key, const std::string& field) {
    if (!obj.is_object()) throw InputError(field + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(field + "." + key + ": missing");
    return *it;
}

int parse_int(const Json& v, const std::string& field) {
    if (!v.is_number_integer()) throw InputError(field + ": expected an integer");
    return v.get<int>();
}

Vector parse_vector(const Json& v, const std::string& field) {
    if (v.is_array()) {
        Vector out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i)
            out(static_cast<Eigen::Index>(i)) = parse_number(v[i], field + "[" + std::to_string(i) + "]");
        return out;
    }
    return Vector::Constant(1, parse_number(v, field));
}

Matrix parse_matrix(const Json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) throw InputError(field + ": expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = -1;
    Matrix out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vector row = parse_vector(v[i], field + "[" + std::to_string(i) + "]");
        if (cols < 0) {
            cols = row.size();
            out.resize(rows, cols);
        } else if (row.size() != cols) {
            throw InputError(field + "[" + std::to_string(i) + "]: ragged matrix row");
        }
        out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return out;
}

Vector parse_bounds(const Json& v, const std::string& field, double missing) {
    if (!v.is_array()) throw InputError(field + ": expected an array");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) =
            v[i].is_null() ? missing : parse_number(v[i], field + "[" + std::to_string(i) + "]");
    }
    return out;
}

Json bounds_to_json(const Vector& b) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        if (std::isfinite(b(i))) out.push_back(b(i));
        else out.push_back(nullptr);
    }
    return out;
}

}  // namespace

double parse_number(const Json& value, const std::string& field) {
    if (value.is_number()) return value.get<double>();
    if (!value.is_string()) throw InputError(field + ": expected a number or a \"p/q\" string");
    const std::string text = value.get<std::string>();
    const auto slash = text.find('/');
    if (slash == std::string::npos) return parse_decimal(text, field);
    const double num = parse_decimal(text.substr(0, slash), field);
    const double den = parse_decimal(text.substr(slash + 1), field);
    if (den == 0.0) throw InputError(field + ": zero denominator in \"" + text + "\"");
    return num / den;
}

PiecewiseLinearSignal parse_signal(const Json& value, const std::string& field) {
    const double period = parse_number(require(value, "period", field), field + ".period");
    const Json& points = require(value, "points", field);
    if (!points.is_array() || points.empty())
        throw InputError(field + ".points: expected a non-empty array");
    std::vector<PiecewiseLinearSignal::Breakpoint> pts;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string f = field + ".points[" + std::to_string(i) + "]";
        const Json& p = points[i];
        if (!p.is_array() || p.size() != 2) throw InputError(f + ": expected [t, value]");
        pts.push_back({parse_number(p[0], f + "[0]"), parse_vector(p[1], f + "[1]")});
    }
    try {
        return PiecewiseLinearSignal(period, std::move(pts));
    } catch (const InputError& e) {
        throw InputError(field + ": " + e.what());
    }
}

Json signal_to_json(const PiecewiseLinearSignal& s) {
    Json points = Json::array();
    for (const auto& p : s.breakpoints()) {
        Json value = s.dimension() == 1 ? Json(p.value(0)) : vector_to_json(p.value);
        points.push_back(Json::array({p.t, value}));
    }
    return Json{{"period", s.period()}, {"points", points}};
}

SpringNetwork parse_network(const Json& doc) {
    if (!doc.is_object()) throw InputError("network: expected a JSON object");
    SpringNetwork net;
    net.nodes = parse_int(require(doc, "nodes", "network"), "nodes");

    const Json& springs = require(doc, "springs", "network");
    if (!springs.is_array()) throw InputError("springs: expected an array");
    for (std::size_t i = 0; i < springs.size(); ++i) {
        const std::string f = "springs[" + std::to_string(i) + "]";
        const Json& s = springs[i];
        Spring sp;
        sp.id = parse_int(require(s, "id", f), f + ".id");
        sp.tail = parse_int(require(s, "tail", f), f + ".tail");
        sp.head = parse_int(require(s, "head", f), f + ".head");
        sp.stiffness = parse_number(require(s, "a", f), f + ".a");
        sp.c_minus = parse_number(require(s, "c_minus", f), f + ".c_minus");
        sp.c_plus = parse_number(require(s, "c_plus", f), f + ".c_plus");
        net.springs.push_back(sp);
    }

    if (auto it = doc.find("displacement_loadings"); it != doc.end()) {
        if (!it->is_array()) throw InputError("displacement_loadings: expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string f = "displacement_loadings[" + std::to_string(k) + "]";
            const Json& l = (*it)[k];
            const Json& chain_json = require(l, "chain", f);
            if (!chain_json.is_array()) throw InputError(f + ".chain: expected an array");
            std::vector<int> chain;
            for (std::size_t j = 0; j < chain_json.size(); ++j)
                chain.push_back(parse_int(chain_json[j], f + ".chain[" + std::to_string(j) + "]"));
            auto signal = parse_signal(require(l, "signal", f), f + ".signal");
            try {
                net.displacement_loadings.push_back(
                    DisplacementLoading::from_chain(std::move(chain), net.m(), std::move(signal)));
            } catch (const InputError& e) {
                throw InputError(f + ".chain: " + e.what());
            }
        }
    }

    const bool has_h = doc.contains("H_signal");
    const bool has_f = doc.contains("f_signal");
    if (has_h && has_f) throw InputError("network: give at most one of H_signal and f_signal");
    if (has_h) {
        net.offset = {OffsetInput::Kind::ControlH, parse_signal(doc["H_signal"], "H_signal")};
    } else if (has_f) {
        net.offset = {OffsetInput::Kind::NodalForces, parse_signal(doc["f_signal"], "f_signal")};
    }
    return net;
}

Json network_to_json(const SpringNetwork& network) {
    Json springs = Json::array();
    for (const auto& s : network.springs) {
        springs.push_back({{"id", s.id},
                           {"tail", s.tail},
                           {"head", s.head},
                           {"a", s.stiffness},
                           {"c_minus", s.c_minus},
                           {"c_plus", s.c_plus}});
    }
    Json loads = Json::array();
    for (const auto& l : network.displacement_loadings) {
        std::vector<int> chain = l.chain;
        if (chain.empty()) {
            for (Eigen::Index i = 0; i < l.incidence.size(); ++i) {
                if (l.incidence(i) > 0) chain.push_back(static_cast<int>(i) + 1);
                if (l.incidence(i) < 0) chain.push_back(-static_cast<int>(i) - 1);
            }
        }
        loads.push_back({{"chain", chain}, {"signal", signal_to_json(l.signal)}});
    }
    Json doc{{"nodes", network.nodes}, {"springs", springs}, {"displacement_loadings", loads}};
    if (network.offset.kind == OffsetInput::Kind::ControlH)
        doc["H_signal"] = signal_to_json(network.offset.signal);
    else if (network.offset.kind == OffsetInput::Kind::NodalForces)
        doc["f_signal"] = signal_to_json(network.offset.signal);
    return doc;
}

DirectProblem parse_direct_problem(const Json& doc) {
    if (!doc.is_object()) throw InputError("direct problem: expected a JSON object");
    DirectProblem p;
    p.shape.rows = parse_matrix(require(doc, "rows", "direct"), "rows");
    const Eigen::Index d = p.shape.rows.cols();
    p.shape.lower = parse_bounds(require(doc, "lower", "direct"), "lower", -qp::kInf);
    p.shape.upper = parse_bounds(require(doc, "upper", "direct"), "upper", qp::kInf);
    p.shape.metric = doc.contains("metric") ? parse_matrix(doc["metric"], "metric")
                                            : Matrix(Matrix::Identity(d, d));
    try {
        p.shape.check();
    } catch (const InputError& e) {
        throw InputError(std::string("direct shape: ") + e.what());
    }
    p.translation = parse_signal(require(doc, "translation", "direct"), "translation");
    if (p.translation.dimension() != d)
        throw InputError("translation: dimension must match the number of columns of rows");
    if (auto it = doc.find("initial_points"); it != doc.end()) {
        if (!it->is_array()) throw InputError("initial_points: expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string f = "initial_points[" + std::to_string(i) + "]";
            Vector v = parse_vector((*it)[i], f);
            if (v.size() != d) throw InputError(f + ": wrong dimension");
            p.initial_points.push_back(std::move(v));
        }
    }
    return p;
}

Json direct_problem_to_json(const DirectProblem& problem) {
    Json pts = Json::array();
    for (const auto& v : problem.initial_points) pts.push_back(vector_to_json(v));
    return Json{{"rows", matrix_to_json(problem.shape.rows)},
                {"lower", bounds_to_json(problem.shape.lower)},
                {"upper", bounds_to_json(problem.shape.upper)},
                {"metric", matrix_to_json(problem.shape.metric)},
                {"translation", signal_to_json(problem.translation)},
                {"initial_points", pts}};
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

SpringNetwork load_network(const std::filesystem::path& path) {
    const Json doc = read_json_file(path);
    try {
        return parse_network(doc);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

DirectProblem load_direct_problem(const std::filesystem::path& path) {
    const Json doc = read_json_file(path);
    try {
        return parse_direct_problem(doc);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

}  // namespace epsweep

#include "epsweep/model.hpp"

#include "epsweep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace epsweep {

DisplacementLoading DisplacementLoading::from_chain(std::vector<int> chain, int spring_count,
                                                    PiecewiseLinearSignal signal) {
    if (chain.empty()) throw InputError("displacement loading chain is empty");
    Vector r = Vector::Zero(spring_count);
    for (int signed_id : chain) {
        const int id = std::abs(signed_id);
        if (signed_id == 0 || id > spring_count)
            throw InputError("chain references unknown spring " + std::to_string(signed_id));
        if (r(id - 1) != 0.0)
            throw InputError("chain visits spring " + std::to_string(id) + " twice");
        r(id - 1) = signed_id > 0 ? 1.0 : -1.0;
    }
    return DisplacementLoading{std::move(r), std::move(signal), std::move(chain)};
}

std::vector<Spring> SpringNetwork::ordered_springs() const {
    std::vector<Spring> out = springs;
    std::sort(out.begin(), out.end(), [](const Spring& a, const Spring& b) { return a.id < b.id; });
    return out;
}

Vector SpringNetwork::stiffness() const {
    const auto s = ordered_springs();
    Vector a(m());
    for (int i = 0; i < m(); ++i) a(i) = s[static_cast<std::size_t>(i)].stiffness;
    return a;
}

Vector SpringNetwork::c_minus() const {
    const auto s = ordered_springs();
    Vector c(m());
    for (int i = 0; i < m(); ++i) c(i) = s[static_cast<std::size_t>(i)].c_minus;
    return c;
}

Vector SpringNetwork::c_plus() const {
    const auto s = ordered_springs();
    Vector c(m());
    for (int i = 0; i < m(); ++i) c(i) = s[static_cast<std::size_t>(i)].c_plus;
    return c;
}

Matrix SpringNetwork::loading_matrix() const {
    Matrix r = Matrix::Zero(m(), q());
    for (int k = 0; k < q(); ++k) {
        const auto& inc = displacement_loadings[static_cast<std::size_t>(k)].incidence;
        if (inc.size() != m())
            throw InputError("incidence vector of loading " + std::to_string(k + 1) +
                             " has length " + std::to_string(inc.size()) + ", expected " +
                             std::to_string(m()));
        r.col(k) = inc;
    }
    return r;
}

PiecewiseLinearSignal SpringNetwork::loading_signal() const {
    if (displacement_loadings.empty()) throw InputError("network has no displacement loadings");
    std::vector<const PiecewiseLinearSignal*> parts;
    for (const auto& l : displacement_loadings) parts.push_back(&l.signal);
    return stack(parts);
}

Matrix build_incidence(const SpringNetwork& network) {
    const int m = network.m();
    const int n = network.n();
    Matrix d = Matrix::Zero(m, n);
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (const auto& s : network.springs) {
        if (s.id < 1 || s.id > m)
            throw InputError("spring id " + std::to_string(s.id) + " outside 1.." +
                             std::to_string(m));
        if (seen[static_cast<std::size_t>(s.id - 1)])
            throw InputError("duplicate spring id " + std::to_string(s.id));
        seen[static_cast<std::size_t>(s.id - 1)] = true;
        for (int node : {s.tail, s.head}) {
            if (node < 1 || node > n)
                throw InputError("spring " + std::to_string(s.id) + " references node " +
                                 std::to_string(node) + " outside 1.." + std::to_string(n));
        }
        d(s.id - 1, s.tail - 1) -= 1.0;
        d(s.id - 1, s.head - 1) += 1.0;
    }
    return d;
}

bool is_connected(int nodes, const std::vector<Spring>& springs) {
    if (nodes <= 0) return false;
    std::vector<int> parent(static_cast<std::size_t>(nodes));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    int components = nodes;
    for (const auto& s : springs) {
        if (s.tail < 1 || s.tail > nodes || s.head < 1 || s.head > nodes) continue;
        const int a = find(s.tail - 1);
        const int b = find(s.head - 1);
        if (a != b) {
            parent[static_cast<std::size_t>(a)] = b;
            --components;
        }
    }
    return components == 1;
}

namespace {

// The support of an incidence vector must be a simple path from I to J
// traversed consistently: D^T R = e_J - e_I, support connected, degree <= 2.
std::optional<std::string> chain_problem(const Matrix& d, const Vector& r,
                                         const std::vector<Spring>& ordered) {
    const Vector net = d.transpose() * r;
    int plus = 0, minus = 0;
    for (Eigen::Index j = 0; j < net.size(); ++j) {
        if (net(j) == 1.0) ++plus;
        else if (net(j) == -1.0) ++minus;
        else if (net(j) != 0.0) return "chain orientation is inconsistent";
    }
    if (plus != 1 || minus != 1) return "chain is not an oriented path between two distinct nodes";

    std::vector<Spring> support;
    std::vector<int> degree(static_cast<std::size_t>(d.cols()), 0);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r(i) == 0.0) continue;
        const auto& s = ordered[static_cast<std::size_t>(i)];
        support.push_back(s);
        ++degree[static_cast<std::size_t>(s.tail - 1)];
        ++degree[static_cast<std::size_t>(s.head - 1)];
    }
    if (std::any_of(degree.begin(), degree.end(), [](int k) { return k > 2; }))
        return "chain branches at a node";

    // connectivity restricted to the nodes the chain touches
    std::vector<int> touched;
    for (std::size_t j = 0; j < degree.size(); ++j)
        if (degree[j] > 0) touched.push_back(static_cast<int>(j) + 1);
    std::vector<Spring> relabeled;
    for (const auto& s : support) {
        const auto pos = [&](int node) {
            return static_cast<int>(std::lower_bound(touched.begin(), touched.end(), node) -
                                    touched.begin()) + 1;
        };
        relabeled.push_back({s.id, pos(s.tail), pos(s.head), s.stiffness, s.c_minus, s.c_plus});
    }
    if (!is_connected(static_cast<int>(touched.size()), relabeled)) return "chain is disconnected";
    return std::nullopt;
}

}  // namespace

ValidationReport validate(const SpringNetwork& network) {
    ValidationReport report;
    report.q = static_cast<std::size_t>(network.q());
    using Cat = ValidationReport::Category;
    auto flag = [&](std::string msg, Cat cat = Cat::Input) {
        report.violations.push_back({cat, std::move(msg)});
    };

    const int m = network.m();
    const int n = network.n();
    if (n < 2) flag("network needs at least 2 nodes");
    if (m < 1) flag("network needs at least 1 spring");

    bool structural = true;
    std::set<int> ids;
    for (const auto& s : network.springs) {
        const std::string tag = "spring " + std::to_string(s.id);
        if (!ids.insert(s.id).second) {
            flag("duplicate spring id " + std::to_string(s.id));
            structural = false;
        }
        if (s.id < 1 || s.id > m) {
            flag(tag + ": id outside 1.." + std::to_string(m));
            structural = false;
        }
        if (s.tail < 1 || s.tail > n || s.head < 1 || s.head > n) {
            flag(tag + ": node id outside 1.." + std::to_string(n));
            structural = false;
        }
        if (s.tail == s.head) flag(tag + ": tail equals head");
        if (!(s.stiffness > 0.0)) flag(tag + ": stiffness must be positive");
        if (!(s.c_minus < s.c_plus)) flag(tag + ": requires c_minus < c_plus");
    }
    if (!structural || m < 1 || n < 2) return report;

    const Matrix d = build_incidence(network);
    report.connected = is_connected(n, network.springs);
    if (!report.connected) flag("spring graph is not connected", Cat::Precondition);

    const auto ordered = network.ordered_springs();
    bool loadings_ok = true;
    std::vector<const PiecewiseLinearSignal*> signals;
    for (int k = 0; k < network.q(); ++k) {
        const auto& load = network.displacement_loadings[static_cast<std::size_t>(k)];
        const std::string tag = "displacement loading " + std::to_string(k + 1);
        signals.push_back(&load.signal);
        if (load.signal.empty() || load.signal.dimension() != 1)
            flag(tag + ": signal must be scalar");
        if (load.incidence.size() != m) {
            flag(tag + ": incidence vector length differs from spring count");
            loadings_ok = false;
            continue;
        }
        bool entries_ok = true;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double v = load.incidence(i);
            if (v != 0.0 && v != 1.0 && v != -1.0) entries_ok = false;
        }
        if (!entries_ok) {
            flag(tag + ": incidence entries must be -1, 0 or +1");
            loadings_ok = false;
            continue;
        }
        if (load.incidence.isZero()) {
            flag(tag + ": incidence vector is zero");
            loadings_ok = false;
            continue;
        }
        if (auto problem = chain_problem(d, load.incidence, ordered)) flag(tag + ": " + *problem);
    }

    if (loadings_ok) {
        const Matrix r = network.loading_matrix();
        const Matrix dtr = d.transpose() * r;
        report.rank_loading = network.q() == 0 ? 0 : numeric_rank(dtr);
        if (report.rank_loading != report.q)
            flag("rank(D^T R) = " + std::to_string(report.rank_loading) + " differs from q = " +
                 std::to_string(report.q) + " (displacement loadings contradict one another)",
                 Cat::Precondition);
    }

    const auto& off = network.offset;
    if (off.kind == OffsetInput::Kind::ControlH) {
        signals.push_back(&off.signal);
        report.balance = ValidationReport::Balance::ControlGiven;
        const int dim_u = n - network.q() - 1;
        if (off.signal.empty() || off.signal.dimension() != dim_u)
            flag("H signal must have dimension n - q - 1 = " + std::to_string(dim_u));
    } else if (off.kind == OffsetInput::Kind::NodalForces) {
        signals.push_back(&off.signal);
        if (off.signal.empty() || off.signal.dimension() != n) {
            flag("f signal must have dimension n = " + std::to_string(n));
        } else {
            report.balance = ValidationReport::Balance::Holds;
            for (const auto& p : off.signal.breakpoints()) {
                const double scale = std::max(1.0, p.value.cwiseAbs().maxCoeff());
                if (std::abs(p.value.sum()) > kRankTolerance * scale) {
                    report.balance = ValidationReport::Balance::Violated;
                    flag("nodal forces do not sum to zero at t = " + std::to_string(p.t), Cat::Precondition);
                    break;
                }
            }
        }
    }

    try {
        (void)common_period(signals);
    } catch (const InputError& e) {
        flag(e.what());
    }
    return report;
}

bool ValidationReport::has(Category c) const {
    return std::any_of(violations.begin(), violations.end(),
                       [c](const Violation& v) { return v.category == c; });
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "balance: ";
    switch (balance) {
        case Balance::NoForces: os << "n/a (H = 0)"; break;
        case Balance::ControlGiven: os << "n/a (H given)"; break;
        case Balance::Holds: os << "holds"; break;
        case Balance::Violated: os << "violated"; break;
    }
    os << "; rank: " << rank_loading << (rank_loading == q ? " = q" : " != q");
    if (rank_loading != q) os << " = " << q;
    return os.str();
}

}  // namespace epsweep

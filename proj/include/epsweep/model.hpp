#pragma once

#include "epsweep/linalg.hpp"
#include "epsweep/signal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace epsweep {

/// One elastoplastic spring. Nodes are numbered 1..n, springs 1..m.
struct Spring {
    int id = 0;
    int tail = 0;
    int head = 0;
    double stiffness = 1.0;  ///< Hooke coefficient a_i > 0
    double c_minus = -1.0;   ///< lower elastic limit (force)
    double c_plus = 1.0;     ///< upper elastic limit (force)
};

/// Prescribed total elongation l_k(t) along a chain of springs.
///
/// `incidence` has one entry per spring: +1 when the chain traverses the
/// spring from tail to head, -1 when it traverses it backwards, 0 otherwise.
struct DisplacementLoading {
    Vector incidence;
    PiecewiseLinearSignal signal;
    /// Signed spring ids as read from the input file; empty when the loading
    /// was built directly from an incidence vector.
    std::vector<int> chain;

    /// Compiles a signed chain into an incidence vector of length m. Throws
    /// InputError on unknown or repeated springs.
    static DisplacementLoading from_chain(std::vector<int> chain, int spring_count,
                                          PiecewiseLinearSignal signal);
};

/// Offset input: either the free control H(t) (dimension n-q-1) or nodal
/// stress loadings f(t) (dimension n). Absent means H == 0.
struct OffsetInput {
    enum class Kind { None, ControlH, NodalForces };
    Kind kind = Kind::None;
    PiecewiseLinearSignal signal;
};

struct SpringNetwork {
    int nodes = 0;
    std::vector<Spring> springs;
    std::vector<DisplacementLoading> displacement_loadings;
    OffsetInput offset;

    int m() const { return static_cast<int>(springs.size()); }
    int n() const { return nodes; }
    int q() const { return static_cast<int>(displacement_loadings.size()); }

    /// Springs sorted by id.
    std::vector<Spring> ordered_springs() const;
    Vector stiffness() const;
    Vector c_minus() const;
    Vector c_plus() const;
    /// m x q matrix whose columns are the incidence vectors R^k.
    Matrix loading_matrix() const;
    /// All l_k(t) stacked into one q-dimensional signal.
    PiecewiseLinearSignal loading_signal() const;
};

/// m x n incidence matrix: row i has -1 at tail(i) and +1 at head(i).
/// Throws InputError on duplicate or out-of-range spring ids and on node ids
/// outside 1..n.
Matrix build_incidence(const SpringNetwork& network);

struct ValidationReport {
    enum class Balance { NoForces, ControlGiven, Holds, Violated };

    /// Input violations are malformed data; precondition violations are
    /// well-formed networks that break a mathematical assumption
    /// (connectivity, loading rank, balance).
    enum class Category { Input, Precondition };
    struct Violation {
        Category category;
        std::string message;
    };

    std::vector<Violation> violations;
    std::size_t rank_loading = 0;  ///< rank(D^T R)
    std::size_t q = 0;
    Balance balance = Balance::NoForces;
    bool connected = false;

    bool ok() const { return violations.empty(); }
    bool has(Category c) const;
    /// One-line human summary, e.g. "balance: n/a (H given); rank: 1 = q".
    std::string summary() const;
};

/// Checks every structural and loading invariant. Violations are returned as
/// data; this never throws.
ValidationReport validate(const SpringNetwork& network);

/// Undirected connectivity of the spring graph on nodes 1..n.
bool is_connected(int nodes, const std::vector<Spring>& springs);

}  // namespace epsweep

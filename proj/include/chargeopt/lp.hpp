#ifndef CHARGEOPT_LP_HPP
#define CHARGEOPT_LP_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace chargeopt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };

struct SparseRow {
    std::vector<int> cols;
    std::vector<double> vals;

    void add(int col, double val) {
        cols.push_back(col);
        vals.push_back(val);
    }
    std::size_t size() const { return cols.size(); }
};

// Maximization LP with box-bounded variables (either bound may be infinite).
struct LinearProgram {
    int num_vars = 0;
    std::vector<double> objective;
    double objective_constant = 0.0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<SparseRow> rows;
    std::vector<Relation> relations;
    std::vector<double> rhs;

    int add_variable(double lo, double up, double obj_coef);
    void add_row(SparseRow row, Relation rel, double rhs_value);
    int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };
std::string lp_status_name(LpStatus s);

// Simplex basis: one basic column per row (structural j < num_vars, or
// num_vars + r for the slack of row r) plus the rest position of every
// nonbasic column.  Returned by one solve, accepted as a warm start by the
// next; an inconsistent warm basis silently falls back to the cold start.
struct Basis {
    std::vector<int> basic;
    std::vector<std::uint8_t> at_upper;

    bool empty() const { return basic.empty(); }
};

struct SimplexOptions {
    long iteration_limit = -1; // < 0 chooses a size-based default
    double feas_tol = 1e-7;    // primal tolerance on equilibrated rows
    double opt_tol = 1e-9;     // reduced-cost tolerance on the scaled objective
};

struct LpResult {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> x; // structural variables only
    Basis basis;
    long iterations = 0;
};

// Basis inverses carried between solves of the same constraint matrix.  The
// inverse depends only on the ordered basic set, so a solve warm-started from
// a cached basis can skip its opening factorization.  A handful of slots
// covers the bases revisited while a search tree expands around one region.
// Only valid against the exact LinearProgram rows it was filled from; bound
// changes are fine.
struct SimplexCache {
    static constexpr int kSlots = 32;
    struct Entry {
        std::vector<int> basic;
        std::vector<double> binv;
        long age = 0; // pivots applied since the inverse was last rebuilt
        bool valid = false;
    };
    Entry slots[kSlots];
    int next = 0;
};

// Bounded-variable primal simplex with a composite phase 1 (minimizes total
// bound violation without artificial columns), dense basis inverse with
// periodic refactorization, Dantzig pricing, and Bland's rule after a
// degenerate stall.  Deterministic: identical inputs give identical pivot
// sequences.
LpResult simplex_solve(const LinearProgram& lp, const Basis* warm_basis = nullptr,
                       const SimplexOptions& options = {}, SimplexCache* cache = nullptr);

// Test hook: largest violation of primal feasibility or reduced-cost sign
// conditions for a claimed optimal result, measured on equilibrated rows.
double lp_optimality_violation(const LinearProgram& lp, const LpResult& result);

} // namespace chargeopt

#endif

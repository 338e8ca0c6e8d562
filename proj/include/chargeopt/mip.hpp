#ifndef CHARGEOPT_MIP_HPP
#define CHARGEOPT_MIP_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chargeopt/lp.hpp"
#include "chargeopt/model.hpp"

namespace chargeopt {

struct BnBConfig {
    double integrality_tol = 1e-6;
    // Optimality is declared once no open bound exceeds the incumbent by more
    // than this relative amount; 0 demands exact closure.
    double rel_gap_tol = 1e-4;
    std::int64_t node_limit = -1;      // < 0: unlimited
    double time_limit_seconds = -1.0;  // < 0: unlimited (setting it trades determinism)
    enum class Branching { MostFractional, PseudoCost };
    Branching branching = Branching::PseudoCost;
    bool collect_log = true; // one `node, depth, bound, incumbent, gap` line per node
    SimplexOptions lp;
};

enum class MipStatus { Optimal, Feasible, Infeasible, LimitReached };
std::string mip_status_name(MipStatus s);

struct MipResult {
    MipStatus status = MipStatus::Infeasible;
    std::vector<double> values; // integer columns exactly integral
    double objective = -kInfinity;
    double best_bound = kInfinity;
    std::int64_t nodes = 0;
    long lp_iterations = 0;
    double wall_seconds = 0.0;
    std::string log;

    double gap() const {
        return (best_bound - objective) / std::max(1.0, std::abs(objective));
    }
};

// Branch and bound over LP relaxations solved by the bounded-variable
// simplex.  A best-bound queue alternates with dives along pseudo-cost
// estimates; children of narrow integer columns are probed on both sides and
// warm-started from the parent basis.  Deterministic given identical problem
// and config, provided no time limit is set.
MipResult solve_mip(const MipProblem& prob, const BnBConfig& cfg = {});

// Exhaustive oracle for tiny problems: depth-first over integer columns in
// index order with activity-interval and objective-potential pruning, exact
// feasibility via the shared canonical row evaluation.  enumeration_limit
// caps the number of search-tree nodes; continuous columns are completed by
// an LP solve per integer leaf.
MipResult brute_force_mip(const MipProblem& prob, std::int64_t enumeration_limit = 10'000'000);

struct FeasibilityReport {
    std::map<std::string, double> family_violation; // worst residual per row family
    std::vector<std::string> integrality_violations;
    double max_violation = 0.0;
    double objective = 0.0;

    bool feasible(double tol = 1e-6) const {
        return max_violation <= tol && integrality_violations.empty();
    }
};

// Independent re-check of every row, bound, and integrality condition.
FeasibilityReport verify_solution(const MipProblem& prob, std::span<const double> values,
                                  double int_tol = 1e-6);

} // namespace chargeopt

#endif

#include "chargeopt/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>

#include "chargeopt/errors.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

std::string mip_status_name(MipStatus s) {
    switch (s) {
        case MipStatus::Optimal: return "Optimal";
        case MipStatus::Feasible: return "Feasible";
        case MipStatus::Infeasible: return "Infeasible";
        case MipStatus::LimitReached: return "LimitReached";
    }
    return "?";
}

namespace {

constexpr double kPruneSlackRel = 1e-9; // relative slack a bound must beat the incumbent by
constexpr double kFeasTol = 1e-6;       // canonical feasibility for integer points
// A plunge keeps diving while its bound stays above incumbent + gamma * gap
// and it has node budget left; outside that band the queue decides better.
constexpr double kPlungeGamma = 0.0;
constexpr std::int64_t kPlungeMaxNodes = 256;

double fractionality(double v) { return std::abs(v - std::round(v)); }

std::vector<int> integer_columns(const MipProblem& prob) {
    std::vector<int> cols;
    for (int j = 0; j < prob.num_cols(); ++j)
        if (prob.variables[j].kind != VarKind::Continuous) cols.push_back(j);
    return cols;
}

// Largest violation over rows and bounds at an exactly evaluated point.
double canonical_infeasibility(const MipProblem& prob, std::span<const double> values) {
    double worst = 0.0;
    for (int j = 0; j < prob.num_cols(); ++j) {
        worst = std::max(worst, prob.variables[j].lower - values[j]);
        worst = std::max(worst, values[j] - prob.variables[j].upper);
    }
    for (const auto& con : prob.constraints)
        worst = std::max(worst, row_violation(con, values));
    return worst;
}

struct Node {
    std::int64_t id = 0;
    int depth = 0;
    double bound = kInfinity; // tightest known relaxation bound for the subtree
    std::shared_ptr<const Node> parent;
    int branch_col = -1;
    bool tightens_upper = false;
    double branch_bound_value = 0.0;
    double branch_frac = 0.0; // fraction the branch cut away, for pseudo-costs
    std::shared_ptr<const Basis> warm;
    // Relaxation already solved by branch lookahead; consumed on expansion.
    std::shared_ptr<const LpResult> presolved;
    bool probed = false; // branch degradation already fed to the pseudo-costs
};

struct NodeOrder {
    bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
        if (a->bound != b->bound) return a->bound < b->bound;
        return a->id > b->id;
    }
};

struct PseudoCost {
    double up_sum = 0.0, down_sum = 0.0;
    int up_count = 0, down_count = 0;
};

class BranchAndBound {
public:
    BranchAndBound(const MipProblem& prob, const BnBConfig& cfg)
        : prob_(prob), cfg_(cfg), lp_(prob.relaxation()), int_cols_(integer_columns(prob)) {}

    MipResult run() {
        const auto t0 = std::chrono::steady_clock::now();
        MipResult result;
        if (cfg_.branching == BnBConfig::Branching::PseudoCost)
            pseudo_.assign(prob_.num_cols(), {});

        auto root = std::make_shared<Node>();
        root->id = next_id_++;
        std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder>
            open;
        open.push(root);
        // Each best-bound pop starts a plunge: a depth-first run that follows
        // the relaxation downward, with siblings parked on a backtrack stack
        // so an infeasible child retries the other side.  The plunge aborts
        // once its bound sinks below a floor between the incumbent and the
        // popped bound (the subtree can no longer close enough of the gap) or
        // once it exhausts its node budget; leftovers return to the queue.
        std::shared_ptr<Node> dive;
        std::vector<std::shared_ptr<Node>> pending;
        double plunge_floor = -kInfinity;
        std::int64_t plunge_left = 0;
        auto flush_plunge = [&] {
            // Cached relaxations are only worth their memory on the active
            // plunge; queued nodes re-solve from the warm basis instead.
            if (dive) {
                dive->presolved.reset();
                open.push(std::move(dive));
            }
            dive.reset();
            for (auto& n : pending) {
                n->presolved.reset();
                open.push(std::move(n));
            }
            pending.clear();
        };

        double incumbent_obj = -kInfinity;
        std::vector<double> incumbent;
        bool limit_hit = false;

        while (dive || !pending.empty() || !open.empty()) {
            if ((dive || !pending.empty()) && plunge_left <= 0) flush_plunge();
            if (!dive && pending.empty()) {
                const double top_bound = open.top()->bound;
                if (incumbent_obj > -kInfinity && top_bound <= cutoff(incumbent_obj)) {
                    // Best-first order: nothing left can beat the incumbent.
                    break;
                }
            }
            if (cfg_.node_limit >= 0 && result.nodes >= cfg_.node_limit) {
                limit_hit = true;
                break;
            }
            if (cfg_.time_limit_seconds >= 0) {
                const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
                if (dt.count() > cfg_.time_limit_seconds) {
                    limit_hit = true;
                    break;
                }
            }

            std::shared_ptr<Node> node;
            if (dive) {
                node = std::move(dive);
                dive.reset();
            } else if (!pending.empty()) {
                node = std::move(pending.back());
                pending.pop_back();
            } else {
                node = open.top();
                open.pop();
                if (incumbent_obj > -kInfinity) {
                    const double gap_above = std::max(0.0, node->bound - incumbent_obj);
                    plunge_floor = incumbent_obj + kPlungeGamma * gap_above;
                    plunge_left = kPlungeMaxNodes;
                } else {
                    // No feasible point yet: run the dive to an integral leaf
                    // no matter how deep, otherwise pruning never starts.
                    plunge_floor = -kInfinity;
                    plunge_left = std::numeric_limits<std::int64_t>::max();
                }
            }
            --plunge_left;
            ++result.nodes;

            if (incumbent_obj > -kInfinity && node->bound <= cutoff(incumbent_obj)) {
                log_line(result, node->depth, node->bound, incumbent_obj);
                continue;
            }

            // Branch selection reads node-local domains from lp_, so bounds
            // must be in place even when the relaxation comes from the cache.
            apply_bounds(*node);
            LpResult rel;
            if (node->presolved) {
                rel = *node->presolved;
                node->presolved.reset();
            } else {
                rel = solve_relaxation(node->warm.get());
                result.lp_iterations += rel.iterations;
            }

            if (cfg_.branching == BnBConfig::Branching::PseudoCost && node->branch_col >= 0 &&
                !node->probed && rel.status != LpStatus::Unbounded) {
                const double degr = node->bound == kInfinity || rel.status != LpStatus::Optimal
                                        ? 0.0
                                        : std::max(0.0, node->bound - rel.objective);
                update_pseudo(node->branch_col, node->tightens_upper, node->branch_frac, degr);
            }

            if (rel.status == LpStatus::Infeasible) {
                log_line(result, node->depth, -kInfinity, incumbent_obj);
                continue;
            }
            if (rel.status == LpStatus::Unbounded)
                throw DomainError("relaxation is unbounded; integer search needs bounded columns");

            const double bound = rel.objective;
            if (incumbent_obj > -kInfinity && bound <= cutoff(incumbent_obj)) {
                log_line(result, node->depth, bound, incumbent_obj);
                continue;
            }

            const int frac_col = pick_branch_column(rel.x);
            if (frac_col < 0) {
                // Integral relaxation: round exactly and score canonically so
                // equal points carry bit-equal objectives everywhere.
                std::vector<double> point = rel.x;
                for (int j : int_cols_) point[j] = std::round(point[j]);
                if (canonical_infeasibility(prob_, point) <= kFeasTol) {
                    const double obj = canonical_objective(prob_, point);
                    if (obj > incumbent_obj) {
                        incumbent_obj = obj;
                        incumbent = std::move(point);
                        // A fresh incumbent changes every cutoff; resurface
                        // and let the queue reorder the frontier.
                        plunge_left = 0;
                    }
                } else if (incumbent.empty()) {
                    // Rounding broke a tight row (possible only with huge
                    // big-M coefficients); keep the raw relaxation point
                    // rather than lose feasibility entirely.
                    incumbent_obj = bound;
                    incumbent = rel.x;
                }
                log_line(result, node->depth, bound, incumbent_obj);
                continue;
            }

            const double v = rel.x[frac_col];
            auto warm = std::make_shared<const Basis>(std::move(rel.basis));
            auto mk = [&](bool upper_side) {
                auto child = std::make_shared<Node>();
                child->id = next_id_++;
                child->depth = node->depth + 1;
                child->bound = bound;
                child->parent = node;
                child->branch_col = frac_col;
                child->tightens_upper = upper_side;
                child->branch_bound_value = upper_side ? std::floor(v) : std::floor(v) + 1.0;
                child->branch_frac = upper_side ? v - std::floor(v) : std::floor(v) + 1.0 - v;
                child->warm = warm;
                return child;
            };
            auto down = mk(true);  // v <= floor
            auto up = mk(false);   // v >= ceil
            bool have_down = true;
            bool have_up = true;
            bool dive_up = v - std::floor(v) > 0.5;

            // Columns with narrow whole domains (open flags and connector
            // counts) move real money, and a bad side commits the whole dive.
            // Solve both children once, keep the tighter bounds, drop dead
            // sides, and dive where the relaxation stays highest.  Wide
            // vehicle columns are not worth the second solve; for those the
            // fractional part already points at the cheaper side.
            const MipVariable& bvar = prob_.variables[frac_col];
            if (bvar.upper - bvar.lower <= 8.5) {
                double est_down = -kInfinity;
                double est_up = -kInfinity;
                auto probe = [&](Node& child, double& est) {
                    apply_bounds(child);
                    LpResult r = solve_relaxation(warm.get());
                    result.lp_iterations += r.iterations;
                    if (r.status == LpStatus::Infeasible) return false;
                    if (r.status == LpStatus::Optimal) {
                        update_pseudo(child.branch_col, child.tightens_upper, child.branch_frac,
                                      std::max(0.0, bound - r.objective));
                        child.probed = true;
                        est = leaf_estimate(r);
                    }
                    child.bound = std::min(child.bound, r.objective);
                    child.presolved = std::make_shared<const LpResult>(std::move(r));
                    return true;
                };
                have_down = probe(*down, est_down);
                have_up = probe(*up, est_up);
                if (incumbent_obj > -kInfinity) {
                    have_down = have_down && down->bound > cutoff(incumbent_obj);
                    have_up = have_up && up->bound > cutoff(incumbent_obj);
                }
                if (cfg_.branching == BnBConfig::Branching::PseudoCost) {
                    // Dive where the relaxation minus the predicted cost of
                    // restoring integrality is highest; the raw bound alone
                    // rewards fractional slack a leaf cannot keep.
                    dive_up = have_up && (!have_down || est_up >= est_down);
                } else {
                    dive_up = have_up && (!have_down || up->bound >= down->bound);
                }
            }

            if (!have_down && !have_up) {
                // Both sides infeasible or cut off; backtrack.
            } else if (bound < plunge_floor) {
                // Subtree bound fell out of the band worth diving for; hand
                // both sides to the queue and resurface.
                down->presolved.reset();
                up->presolved.reset();
                if (have_down) open.push(std::move(down));
                if (have_up) open.push(std::move(up));
                flush_plunge();
            } else if (dive_up) {
                // Follow the relaxation: dive toward the integer the LP leans to.
                dive = std::move(up);
                if (have_down) pending.push_back(std::move(down));
            } else {
                dive = std::move(down);
                if (have_up) pending.push_back(std::move(up));
            }
            log_line(result, node->depth, bound, incumbent_obj);
        }

        if (dive) open.push(std::move(dive));
        for (auto& node : pending) open.push(std::move(node));
        const double open_bound = open.empty() ? -kInfinity : open.top()->bound;
        result.objective = incumbent_obj;
        result.values = std::move(incumbent);
        if (limit_hit) {
            result.status = MipStatus::LimitReached;
            result.best_bound = std::max(incumbent_obj, open_bound);
        } else if (result.values.empty()) {
            result.status = MipStatus::Infeasible;
            result.best_bound = -kInfinity;
        } else {
            // Every remaining node is at or below the cutoff, so the
            // incumbent is optimal within rel_gap_tol.
            result.status = MipStatus::Optimal;
            result.best_bound = std::max(incumbent_obj, open_bound);
        }
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        result.wall_seconds = dt.count();
        return result;
    }

private:
    const MipProblem& prob_;
    BnBConfig cfg_;
    LinearProgram lp_;
    std::vector<int> int_cols_;
    std::vector<PseudoCost> pseudo_;
    SimplexCache lp_cache_;
    std::int64_t next_id_ = 0;

    double cutoff(double incumbent_obj) const {
        return incumbent_obj +
               (kPruneSlackRel + cfg_.rel_gap_tol) * std::max(1.0, std::abs(incumbent_obj));
    }

    void apply_bounds(const Node& node) {
        lp_.lower = prob_base_lower();
        lp_.upper = prob_base_upper();
        for (const Node* a = &node; a != nullptr; a = a->parent.get()) {
            if (a->branch_col < 0) continue;
            if (a->tightens_upper)
                lp_.upper[a->branch_col] = std::min(lp_.upper[a->branch_col], a->branch_bound_value);
            else
                lp_.lower[a->branch_col] = std::max(lp_.lower[a->branch_col], a->branch_bound_value);
        }
    }

    const std::vector<double>& prob_base_lower() {
        if (base_lower_.empty() && prob_.num_cols() > 0) {
            base_lower_.reserve(prob_.num_cols());
            base_upper_.reserve(prob_.num_cols());
            for (const auto& var : prob_.variables) {
                base_lower_.push_back(var.lower);
                base_upper_.push_back(var.upper);
            }
        }
        return base_lower_;
    }
    const std::vector<double>& prob_base_upper() {
        prob_base_lower();
        return base_upper_;
    }
    std::vector<double> base_lower_, base_upper_;

    LpResult solve_relaxation(const Basis* warm) {
        LpResult rel = simplex_solve(lp_, warm, cfg_.lp, &lp_cache_);
        if (rel.status == LpStatus::IterationLimit) {
            SimplexOptions retry = cfg_.lp;
            retry.iteration_limit =
                (retry.iteration_limit >= 0 ? retry.iteration_limit
                                            : 20000L + 100L * (lp_.num_vars + lp_.num_rows())) *
                10;
            rel = simplex_solve(lp_, nullptr, retry, &lp_cache_);
            if (rel.status == LpStatus::IterationLimit)
                throw DomainError("simplex iteration limit exceeded inside the search tree");
        }
        return rel;
    }

    // Narrow domains first (binaries, then small integer ranges): resolving
    // the columns that gate the rest of the model moves the bound far more
    // than splitting a wide vehicle-count column, and their subtrees are
    // shallow.  Within a domain size, most fractional wins; ties go to the
    // lowest column index.
    int pick_branch_column(const std::vector<double>& x) const {
        int best = -1;
        double best_range = kInfinity;
        double best_score = 0.0;
        for (int j : int_cols_) {
            const double f = fractionality(x[j]);
            if (f <= cfg_.integrality_tol) continue;
            const double range = lp_.upper[j] - lp_.lower[j]; // node-local domain
            if (best >= 0 && range > best_range) continue;
            double score;
            if (cfg_.branching == BnBConfig::Branching::PseudoCost) {
                const double down = x[j] - std::floor(x[j]);
                const double up = 1.0 - down;
                score = std::max(pseudo_estimate(j, true) * down, 1e-6) *
                        std::max(pseudo_estimate(j, false) * up, 1e-6);
            } else {
                score = 0.5 - std::abs(x[j] - std::floor(x[j]) - 0.5);
            }
            if (best < 0 || range < best_range || score > best_score) {
                best_range = range;
                best_score = score;
                best = j;
            }
        }
        return best;
    }

    // Relaxation value minus the pseudo-cost prediction for rounding every
    // fractional integer column to its cheaper side.
    double leaf_estimate(const LpResult& rel) const {
        double est = rel.objective;
        for (int j : int_cols_) {
            const double f = rel.x[j] - std::floor(rel.x[j]);
            if (f <= cfg_.integrality_tol || f >= 1.0 - cfg_.integrality_tol) continue;
            est -= std::min(pseudo_estimate(j, true) * f, pseudo_estimate(j, false) * (1.0 - f));
        }
        return est;
    }

    double pseudo_estimate(int col, bool down) const {
        const PseudoCost& pc = pseudo_[col];
        const int count = down ? pc.down_count : pc.up_count;
        const double sum = down ? pc.down_sum : pc.up_sum;
        if (count == 0) return std::abs(prob_.objective[col]) + 1.0;
        return sum / count;
    }

    void update_pseudo(int col, bool tightened_upper, double frac, double degradation) {
        if (pseudo_.empty() || frac <= 1e-9) return;
        PseudoCost& pc = pseudo_[col];
        if (tightened_upper) {
            pc.down_sum += degradation / frac;
            ++pc.down_count;
        } else {
            pc.up_sum += degradation / frac;
            ++pc.up_count;
        }
    }

    void log_line(MipResult& result, int depth, double bound, double incumbent_obj) {
        if (!cfg_.collect_log) return;
        const double gap = incumbent_obj > -kInfinity
                               ? (std::max(bound, incumbent_obj) - incumbent_obj) /
                                     std::max(1.0, std::abs(incumbent_obj))
                               : kInfinity;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%lld, %d, %.10g, %.10g, %.6g\n",
                      static_cast<long long>(result.nodes), depth, bound, incumbent_obj, gap);
        result.log += buf;
    }
};

// Depth-first exhaustive search used as the test oracle.
class BruteForce {
public:
    BruteForce(const MipProblem& prob, std::int64_t limit)
        : prob_(prob), limit_(limit), int_cols_(integer_columns(prob)) {}

    MipResult run() {
        MipResult result;
        for (int j : int_cols_) {
            const MipVariable& var = prob_.variables[j];
            if (var.lower == -kInfinity || var.upper == kInfinity)
                throw DomainError("exhaustive search needs finite integer bounds (" + var.name +
                                  ")");
            lo_.push_back(static_cast<std::int64_t>(std::ceil(var.lower - 1e-9)));
            hi_.push_back(static_cast<std::int64_t>(std::floor(var.upper + 1e-9)));
            if (lo_.back() > hi_.back()) {
                result.status = MipStatus::Infeasible;
                result.best_bound = -kInfinity;
                return result;
            }
        }
        for (int j = 0; j < prob_.num_cols(); ++j)
            if (prob_.variables[j].kind == VarKind::Continuous) cont_cols_.push_back(j);

        if (int_cols_.empty()) return pure_lp();

        build_suffix_tables();
        point_.assign(prob_.num_cols(), 0.0);
        for (int j : cont_cols_) point_[j] = 0.0;
        activity_.assign(prob_.num_rows(), 0.0);
        columns_of_rows();

        best_obj_ = -kInfinity;
        dfs(0, 0.0);

        if (best_.empty()) {
            result.status = MipStatus::Infeasible;
            result.best_bound = -kInfinity;
        } else {
            result.status = MipStatus::Optimal;
            result.values = best_;
            result.objective = best_obj_;
            result.best_bound = best_obj_;
        }
        result.nodes = nodes_;
        return result;
    }

private:
    const MipProblem& prob_;
    std::int64_t limit_;
    std::vector<int> int_cols_, cont_cols_;
    std::vector<std::int64_t> lo_, hi_;
    std::vector<std::vector<double>> row_min_rest_, row_max_rest_; // [row][depth]
    std::vector<double> obj_max_rest_;                             // [depth]
    std::vector<std::vector<std::pair<int, double>>> entries_of_col_;
    std::vector<double> point_, activity_, best_;
    double best_obj_ = -kInfinity;
    std::int64_t nodes_ = 0;

    MipResult pure_lp() {
        const LpResult rel = simplex_solve(prob_.relaxation());
        MipResult result;
        switch (rel.status) {
            case LpStatus::Optimal:
                result.status = MipStatus::Optimal;
                result.values = rel.x;
                result.objective = rel.objective;
                result.best_bound = rel.objective;
                break;
            case LpStatus::Infeasible:
                result.status = MipStatus::Infeasible;
                result.best_bound = -kInfinity;
                break;
            default:
                throw DomainError("continuous relaxation did not solve to optimality");
        }
        result.nodes = 1;
        return result;
    }

    static double lo_contrib(double a, double lo, double up) {
        return a >= 0 ? a * lo : a * up;
    }
    static double hi_contrib(double a, double lo, double up) {
        return a >= 0 ? a * up : a * lo;
    }

    void build_suffix_tables() {
        const std::size_t D = int_cols_.size();
        std::vector<int> pos(prob_.num_cols(), -1);
        for (std::size_t d = 0; d < D; ++d) pos[int_cols_[d]] = static_cast<int>(d);

        row_min_rest_.assign(prob_.num_rows(), std::vector<double>(D + 1, 0.0));
        row_max_rest_.assign(prob_.num_rows(), std::vector<double>(D + 1, 0.0));
        for (int r = 0; r < prob_.num_rows(); ++r) {
            const MipConstraint& con = prob_.constraints[r];
            // Continuous columns contribute their full interval everywhere.
            double cont_min = 0.0, cont_max = 0.0;
            std::vector<double> per_depth_min(D, 0.0), per_depth_max(D, 0.0);
            for (std::size_t p = 0; p < con.row.size(); ++p) {
                const int col = con.row.cols[p];
                const double a = con.row.vals[p];
                const MipVariable& var = prob_.variables[col];
                if (pos[col] < 0) {
                    cont_min += lo_contrib(a, var.lower, var.upper);
                    cont_max += hi_contrib(a, var.lower, var.upper);
                } else {
                    per_depth_min[pos[col]] += lo_contrib(a, var.lower, var.upper);
                    per_depth_max[pos[col]] += hi_contrib(a, var.lower, var.upper);
                }
            }
            row_min_rest_[r][D] = cont_min;
            row_max_rest_[r][D] = cont_max;
            for (int d = static_cast<int>(D) - 1; d >= 0; --d) {
                row_min_rest_[r][d] = row_min_rest_[r][d + 1] + per_depth_min[d];
                row_max_rest_[r][d] = row_max_rest_[r][d + 1] + per_depth_max[d];
            }
        }

        obj_max_rest_.assign(D + 1, 0.0);
        double cont_obj = 0.0;
        for (int j : cont_cols_) {
            const MipVariable& var = prob_.variables[j];
            cont_obj += hi_contrib(prob_.objective[j], var.lower, var.upper);
        }
        obj_max_rest_[D] = cont_obj;
        for (int d = static_cast<int>(D) - 1; d >= 0; --d) {
            const int col = int_cols_[d];
            obj_max_rest_[d] =
                obj_max_rest_[d + 1] +
                hi_contrib(prob_.objective[col], static_cast<double>(lo_[d]),
                           static_cast<double>(hi_[d]));
        }
    }

    void columns_of_rows() {
        entries_of_col_.assign(prob_.num_cols(), {});
        for (int r = 0; r < prob_.num_rows(); ++r) {
            const MipConstraint& con = prob_.constraints[r];
            for (std::size_t p = 0; p < con.row.size(); ++p)
                entries_of_col_[con.row.cols[p]].push_back({r, con.row.vals[p]});
        }
    }

    bool rows_can_complete(std::size_t depth) const {
        constexpr double margin = 1e-5;
        for (int r = 0; r < prob_.num_rows(); ++r) {
            const double below = activity_[r] + row_min_rest_[r][depth];
            const double above = activity_[r] + row_max_rest_[r][depth];
            switch (prob_.constraints[r].rel) {
                case Relation::LessEqual:
                    if (below > prob_.constraints[r].rhs + margin) return false;
                    break;
                case Relation::GreaterEqual:
                    if (above < prob_.constraints[r].rhs - margin) return false;
                    break;
                case Relation::Equal:
                    if (below > prob_.constraints[r].rhs + margin ||
                        above < prob_.constraints[r].rhs - margin)
                        return false;
                    break;
            }
        }
        return true;
    }

    void dfs(std::size_t depth, double partial_obj) {
        if (depth == int_cols_.size()) {
            leaf();
            return;
        }
        const int col = int_cols_[depth];
        for (std::int64_t val = lo_[depth]; val <= hi_[depth]; ++val) {
            if (++nodes_ > limit_)
                throw EnumerationLimitError("exhaustive search exceeded its node budget of " +
                                            std::to_string(limit_));
            const double x = static_cast<double>(val);
            point_[col] = x;
            for (const auto& [r, a] : entries_of_col_[col]) activity_[r] += a * x;
            const double obj_here = partial_obj + prob_.objective[col] * x;

            const bool worth = obj_here + obj_max_rest_[depth + 1] > best_obj_ - 1e-6 ||
                               best_.empty();
            if (worth && rows_can_complete(depth + 1)) dfs(depth + 1, obj_here);

            for (const auto& [r, a] : entries_of_col_[col]) activity_[r] -= a * x;
        }
        point_[col] = static_cast<double>(lo_[depth]);
    }

    void leaf() {
        std::vector<double> candidate = point_;
        if (!cont_cols_.empty()) {
            LinearProgram lp = prob_.relaxation();
            for (std::size_t d = 0; d < int_cols_.size(); ++d) {
                lp.lower[int_cols_[d]] = point_[int_cols_[d]];
                lp.upper[int_cols_[d]] = point_[int_cols_[d]];
            }
            const LpResult rel = simplex_solve(lp);
            if (rel.status != LpStatus::Optimal) return;
            candidate = rel.x;
            for (int j : int_cols_) candidate[j] = std::round(candidate[j]);
        }
        if (canonical_infeasibility(prob_, candidate) > kFeasTol) return;
        const double obj = canonical_objective(prob_, candidate);
        if (obj > best_obj_) {
            best_obj_ = obj;
            best_ = candidate;
        }
    }
};

} // namespace

MipResult solve_mip(const MipProblem& prob, const BnBConfig& cfg) {
    if (!(cfg.integrality_tol > 0)) throw DomainError("integrality tolerance must be positive");
    if (cfg.rel_gap_tol < 0) throw DomainError("gap tolerance must be nonnegative");
    BranchAndBound search(prob, cfg);
    return search.run();
}

MipResult brute_force_mip(const MipProblem& prob, std::int64_t enumeration_limit) {
    if (enumeration_limit <= 0) throw DomainError("enumeration limit must be positive");
    BruteForce search(prob, enumeration_limit);
    return search.run();
}

FeasibilityReport verify_solution(const MipProblem& prob, std::span<const double> values,
                                  double int_tol) {
    if (static_cast<int>(values.size()) != prob.num_cols())
        throw DomainError("value vector length does not match the problem");
    FeasibilityReport report;
    for (int j = 0; j < prob.num_cols(); ++j) {
        const MipVariable& var = prob.variables[j];
        const double bound_viol =
            std::max(std::max(var.lower - values[j], values[j] - var.upper), 0.0);
        if (bound_viol > 0.0) {
            auto& worst = report.family_violation["bounds"];
            worst = std::max(worst, bound_viol);
            report.max_violation = std::max(report.max_violation, bound_viol);
        }
        if (var.kind != VarKind::Continuous && fractionality(values[j]) > int_tol)
            report.integrality_violations.push_back(var.name);
    }
    for (const auto& con : prob.constraints) {
        const double viol = row_violation(con, values);
        const std::string family = con.name.substr(0, con.name.find('['));
        auto& worst = report.family_violation[family];
        worst = std::max(worst, viol);
        report.max_violation = std::max(report.max_violation, viol);
    }
    report.objective = canonical_objective(prob, values);
    return report;
}

} // namespace chargeopt

#include "chargeopt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "chargeopt/errors.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

int LinearProgram::add_variable(double lo, double up, double obj_coef) {
    if (std::isnan(lo) || std::isnan(up) || std::isnan(obj_coef))
        throw DomainError("NaN in variable definition");
    if (lo > up) throw DomainError("variable lower bound exceeds upper bound");
    lower.push_back(lo);
    upper.push_back(up);
    objective.push_back(obj_coef);
    return num_vars++;
}

void LinearProgram::add_row(SparseRow row, Relation rel, double rhs_value) {
    for (std::size_t p = 0; p < row.cols.size(); ++p) {
        if (row.cols[p] < 0 || row.cols[p] >= num_vars)
            throw DomainError("row references undeclared variable");
        if (std::isnan(row.vals[p])) throw DomainError("NaN coefficient in row");
    }
    if (std::isnan(rhs_value)) throw DomainError("NaN right-hand side");
    rows.push_back(std::move(row));
    relations.push_back(rel);
    rhs.push_back(rhs_value);
}

std::string lp_status_name(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
        case LpStatus::IterationLimit: return "IterationLimit";
    }
    return "?";
}

namespace {

enum VarPos : std::uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFreeZero = 3 };

// Bounded-variable primal simplex on the slack form A x + s = b.  Slack
// bounds encode the relation: [0, inf) for <=, (-inf, 0] for >=, {0} for =.
// The basis inverse is kept dense and updated by elementary row operations,
// with a full refactorization every kRefactorEvery pivots and before any
// final status is declared.
class Simplex {
public:
    Simplex(const LinearProgram& lp, const SimplexOptions& opt, SimplexCache* cache)
        : lp_(lp), opt_(opt), cache_(cache) {
        n_ = lp.num_vars;
        m_ = lp.num_rows();
        N_ = n_ + m_;
        build_scaled_problem();
    }

    LpResult run(const Basis* warm) {
        LpResult result;
        const long limit = opt_.iteration_limit >= 0 ? opt_.iteration_limit
                                                     : 20000L + 100L * (n_ + m_);
        init_basis(warm);
        long since_refactor = load_cached_inverse();
        if (since_refactor < 0) {
            factorize();
            since_refactor = 0;
        }
        compute_values();

        long degenerate_run = 0;
        bool bland = false;
        bool fresh = since_refactor == 0; // inverse exact for the current basis

        while (true) {
            if (result.iterations >= limit) {
                result.status = LpStatus::IterationLimit;
                break;
            }
            if (since_refactor >= kRefactorEvery) {
                factorize();
                compute_values();
                since_refactor = 0;
                fresh = true;
            }

            const bool feasible = max_infeasibility() <= opt_.feas_tol;
            int q = -1;
            int dir = 0;
            if (feasible)
                price_phase2(bland, q, dir);
            else
                price_phase1(bland, q, dir);

            if (q < 0) {
                // No improving column.  Confirm before declaring a terminal
                // status: accept the product-form state if both certificates
                // check out against the exact problem data, otherwise rebuild
                // the inverse and take another pass.
                if (!fresh) {
                    if (certificates_hold(feasible)) {
                        fresh = true;
                    } else {
                        factorize();
                        compute_values();
                        since_refactor = 0;
                        fresh = true;
                        continue;
                    }
                }
                result.status = feasible ? LpStatus::Optimal : LpStatus::Infeasible;
                break;
            }

            ++result.iterations;
            compute_pivot_column(q);

            double t = 0.0;
            int leave_slot = -1;
            bool leave_to_upper = false;
            const bool blocked = feasible
                                     ? ratio_phase2(q, dir, bland, t, leave_slot, leave_to_upper)
                                     : ratio_phase1(q, dir, bland, t, leave_slot, leave_to_upper);
            if (!blocked) {
                if (!feasible) {
                    // Phase-1 objective is bounded below by zero, so an
                    // unblocked ray signals numerical breakdown.
                    if (!fresh) {
                        factorize();
                        compute_values();
                        since_refactor = 0;
                        fresh = true;
                        continue;
                    }
                    result.status = LpStatus::IterationLimit;
                    break;
                }
                if (!fresh) {
                    factorize();
                    compute_values();
                    since_refactor = 0;
                    fresh = true;
                    continue;
                }
                result.status = LpStatus::Unbounded;
                break;
            }

            apply_step(q, dir, t, leave_slot, leave_to_upper);
            fresh = false;
            if (leave_slot >= 0) ++since_refactor;

            if (t <= 1e-10) {
                if (++degenerate_run > kStallLimit) bland = true;
            } else {
                degenerate_run = 0;
                if (t > 1e-8) bland = false;
            }
        }

        if (cache_ != nullptr &&
            (result.status == LpStatus::Optimal || result.status == LpStatus::Infeasible))
            store_cached_inverse(since_refactor);
        extract(result);
        return result;
    }

    // Residual / reduced-cost audit used by lp_optimality_violation.
    double audit(const LpResult& result) {
        if (static_cast<int>(result.basis.basic.size()) != m_ ||
            static_cast<int>(result.basis.at_upper.size()) != N_ ||
            static_cast<int>(result.x.size()) != n_)
            return kInfinity;
        double worst = 0.0;

        // Primal: variable bounds, then row activity against the relation.
        for (int j = 0; j < n_; ++j) {
            worst = std::max(worst, lo_[j] - result.x[j]);
            worst = std::max(worst, result.x[j] - up_[j]);
        }
        for (int r = 0; r < m_; ++r) {
            KahanSum act;
            const SparseRow& row = lp_.rows[r];
            for (std::size_t p = 0; p < row.size(); ++p)
                act.add(row_scale_[r] * row.vals[p] * result.x[row.cols[p]]);
            const double resid = act.value() - rhs_[r];
            switch (lp_.relations[r]) {
                case Relation::LessEqual: worst = std::max(worst, resid); break;
                case Relation::GreaterEqual: worst = std::max(worst, -resid); break;
                case Relation::Equal: worst = std::max(worst, std::abs(resid)); break;
            }
        }

        // Dual: reduced-cost signs at the claimed basis.
        init_basis(&result.basis);
        factorize();
        compute_dual();
        for (int j = 0; j < N_; ++j) {
            if (pos_[j] == kBasic || lo_[j] == up_[j]) continue;
            const double d = reduced_cost(j);
            if (pos_[j] == kAtLower) worst = std::max(worst, d);
            else if (pos_[j] == kAtUpper) worst = std::max(worst, -d);
            else worst = std::max(worst, std::abs(d));
        }
        return worst;
    }

private:
    static constexpr long kRefactorEvery = 64;
    static constexpr long kStallLimit = 100;
    static constexpr double kPivotTol = 1e-9;

    const LinearProgram& lp_;
    SimplexOptions opt_;
    SimplexCache* cache_ = nullptr;
    int n_ = 0, m_ = 0, N_ = 0;

    // scaled problem
    std::vector<double> c_;          // size N_, slack costs 0
    std::vector<double> lo_, up_;    // size N_
    std::vector<double> rhs_;        // scaled
    std::vector<double> row_scale_;
    std::vector<int> col_ptr_, col_row_;
    std::vector<double> col_val_;

    // state
    std::vector<int> basic_;            // size m_
    std::vector<std::uint8_t> pos_;     // size N_
    std::vector<double> values_;        // size N_
    std::vector<double> binv_;          // m_ x m_, row-major
    std::vector<double> y_;             // dual work vector, size m_
    std::vector<double> w_;             // pivot column in basis coordinates
    std::vector<double> g_;             // phase-1 gradient per row

    template <typename F>
    void for_col(int j, F&& f) const {
        if (j < n_) {
            for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) f(col_row_[p], col_val_[p]);
        } else {
            f(j - n_, 1.0);
        }
    }

    static double pow2_scale(double max_abs) {
        if (!(max_abs > 0)) return 1.0;
        return std::exp2(-std::ilogb(max_abs));
    }

    void build_scaled_problem() {
        row_scale_.assign(m_, 1.0);
        for (int r = 0; r < m_; ++r) {
            double max_abs = 0.0;
            for (double v : lp_.rows[r].vals) max_abs = std::max(max_abs, std::abs(v));
            row_scale_[r] = pow2_scale(max_abs);
        }
        double max_c = 0.0;
        for (double v : lp_.objective) max_c = std::max(max_c, std::abs(v));
        const double obj_scale = pow2_scale(max_c);

        c_.assign(N_, 0.0);
        for (int j = 0; j < n_; ++j) c_[j] = lp_.objective[j] * obj_scale;
        lo_.assign(N_, 0.0);
        up_.assign(N_, 0.0);
        for (int j = 0; j < n_; ++j) {
            lo_[j] = lp_.lower[j];
            up_[j] = lp_.upper[j];
        }
        rhs_.resize(m_);
        for (int r = 0; r < m_; ++r) {
            rhs_[r] = lp_.rhs[r] * row_scale_[r];
            const int s = n_ + r;
            switch (lp_.relations[r]) {
                case Relation::LessEqual: lo_[s] = 0.0; up_[s] = kInfinity; break;
                case Relation::GreaterEqual: lo_[s] = -kInfinity; up_[s] = 0.0; break;
                case Relation::Equal: lo_[s] = 0.0; up_[s] = 0.0; break;
            }
        }

        // CSC of the scaled structural columns.
        std::vector<int> count(n_, 0);
        for (int r = 0; r < m_; ++r)
            for (int col : lp_.rows[r].cols) ++count[col];
        col_ptr_.assign(n_ + 1, 0);
        for (int j = 0; j < n_; ++j) col_ptr_[j + 1] = col_ptr_[j] + count[j];
        col_row_.resize(col_ptr_[n_]);
        col_val_.resize(col_ptr_[n_]);
        std::vector<int> fill(col_ptr_.begin(), col_ptr_.end() - 1);
        for (int r = 0; r < m_; ++r) {
            const SparseRow& row = lp_.rows[r];
            for (std::size_t p = 0; p < row.size(); ++p) {
                const int j = row.cols[p];
                col_row_[fill[j]] = r;
                col_val_[fill[j]] = row.vals[p] * row_scale_[r];
                ++fill[j];
            }
        }
    }

    std::uint8_t rest_position(int j, bool prefer_upper) const {
        if (lo_[j] == -kInfinity && up_[j] == kInfinity) return kFreeZero;
        if (prefer_upper && up_[j] != kInfinity) return kAtUpper;
        if (lo_[j] != -kInfinity) return kAtLower;
        return kAtUpper;
    }

    bool warm_basis_usable(const Basis& b) const {
        if (static_cast<int>(b.basic.size()) != m_) return false;
        if (static_cast<int>(b.at_upper.size()) != N_) return false;
        std::vector<std::uint8_t> seen(N_, 0);
        for (int col : b.basic) {
            if (col < 0 || col >= N_ || seen[col]) return false;
            seen[col] = 1;
        }
        return true;
    }

    // Adopt a cached inverse matching the current ordered basic set.  Returns
    // the cached pivot age, or -1 when nothing matches and a factorization is
    // required.  The entry is consumed; the finishing solve re-stores it.
    long load_cached_inverse() {
        if (cache_ == nullptr) return -1;
        for (auto& e : cache_->slots) {
            if (!e.valid || e.basic != basic_) continue;
            binv_ = std::move(e.binv);
            e.valid = false;
            return e.age;
        }
        return -1;
    }

    void store_cached_inverse(long age) {
        int pick = -1;
        for (int s = 0; s < SimplexCache::kSlots; ++s)
            if (!cache_->slots[s].valid) pick = s;
        if (pick < 0) {
            pick = cache_->next;
            cache_->next = (cache_->next + 1) % SimplexCache::kSlots;
        }
        SimplexCache::Entry& e = cache_->slots[pick];
        e.basic = basic_;
        e.binv = std::move(binv_);
        e.age = age;
        e.valid = true;
    }

    // Validates the terminal state against exact problem data: row activity
    // at the current values, and consistency of the pricing duals with the
    // costs they were formed from (phase-2 basic costs, or the phase-1
    // infeasibility gradient).  Bounds the product-form drift of both the
    // values and the inverse behind y_, so a pass makes the terminal claim
    // safe without a rebuild.
    bool certificates_hold(bool feasible) const {
        for (int r = 0; r < m_; ++r) {
            const SparseRow& row = lp_.rows[r];
            KahanSum acc;
            for (std::size_t p = 0; p < row.size(); ++p)
                acc.add(row_scale_[r] * row.vals[p] * values_[row.cols[p]]);
            acc.add(values_[n_ + r]);
            const double resid = std::abs(acc.value() - rhs_[r]);
            if (resid > opt_.feas_tol * (1.0 + std::abs(rhs_[r]))) return false;
        }
        for (int k = 0; k < m_; ++k) {
            double d = feasible ? c_[basic_[k]] : g_[k];
            for_col(basic_[k], [&](int r, double a) { d -= y_[r] * a; });
            if (std::abs(d) > opt_.opt_tol * 16.0) return false;
        }
        return true;
    }

    void init_basis(const Basis* warm) {
        pos_.assign(N_, kAtLower);
        basic_.resize(m_);
        if (warm != nullptr && warm_basis_usable(*warm)) {
            basic_ = warm->basic;
            for (int j = 0; j < N_; ++j) pos_[j] = rest_position(j, warm->at_upper[j] != 0);
            for (int col : basic_) pos_[col] = kBasic;
        } else {
            for (int r = 0; r < m_; ++r) {
                basic_[r] = n_ + r;
                pos_[n_ + r] = kBasic;
            }
            for (int j = 0; j < n_; ++j) pos_[j] = rest_position(j, false);
        }
    }

    // Dense Gauss-Jordan inversion of the basis matrix.  A column without a
    // usable pivot is replaced by the slack of a still-unpivoted row and the
    // displaced variable is parked at a bound; the pass then restarts.
    void factorize() {
        binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        if (m_ == 0) return;
        for (int attempt = 0; attempt <= m_; ++attempt) {
            std::vector<double> mat(static_cast<std::size_t>(m_) * m_, 0.0);
            for (int k = 0; k < m_; ++k)
                for_col(basic_[k], [&](int r, double v) { mat[static_cast<std::size_t>(r) * m_ + k] = v; });
            std::fill(binv_.begin(), binv_.end(), 0.0);
            for (int r = 0; r < m_; ++r) binv_[static_cast<std::size_t>(r) * m_ + r] = 1.0;

            std::vector<int> pivot_row_of(m_, -1);
            std::vector<std::uint8_t> row_used(m_, 0);
            std::vector<int> failed;
            for (int k = 0; k < m_; ++k) {
                int best_r = -1;
                double best = 1e-11;
                for (int r = 0; r < m_; ++r) {
                    if (row_used[r]) continue;
                    const double a = std::abs(mat[static_cast<std::size_t>(r) * m_ + k]);
                    if (a > best) {
                        best = a;
                        best_r = r;
                    }
                }
                if (best_r < 0) {
                    failed.push_back(k);
                    continue;
                }
                row_used[best_r] = 1;
                pivot_row_of[k] = best_r;
                const double pe = mat[static_cast<std::size_t>(best_r) * m_ + k];
                const double inv_pe = 1.0 / pe;
                double* mrow = &mat[static_cast<std::size_t>(best_r) * m_];
                double* erow = &binv_[static_cast<std::size_t>(best_r) * m_];
                for (int jj = 0; jj < m_; ++jj) {
                    mrow[jj] *= inv_pe;
                    erow[jj] *= inv_pe;
                }
                for (int r = 0; r < m_; ++r) {
                    if (r == best_r) continue;
                    const double f = mat[static_cast<std::size_t>(r) * m_ + k];
                    if (f == 0.0) continue;
                    double* mr = &mat[static_cast<std::size_t>(r) * m_];
                    double* er = &binv_[static_cast<std::size_t>(r) * m_];
                    for (int jj = 0; jj < m_; ++jj) {
                        mr[jj] -= f * mrow[jj];
                        er[jj] -= f * erow[jj];
                    }
                }
            }
            if (failed.empty()) {
                // Undo the row permutation: basic slot k owns pivot row p,
                // but slot k of the inverse must map onto row index k of the
                // basis ordering.  Reorder so binv_ row k corresponds to
                // basic_[k].
                std::vector<double> reordered(binv_.size());
                for (int k = 0; k < m_; ++k) {
                    const int p = pivot_row_of[k];
                    std::copy_n(&binv_[static_cast<std::size_t>(p) * m_], m_,
                                &reordered[static_cast<std::size_t>(k) * m_]);
                }
                binv_.swap(reordered);
                return;
            }
            // Repair: park the unsupported variables and pull in slacks of
            // the rows no pivot reached.
            std::size_t fi = 0;
            for (int r = 0; r < m_ && fi < failed.size(); ++r) {
                if (row_used[r]) continue;
                const int k = failed[fi++];
                const int old_col = basic_[k];
                pos_[old_col] = rest_position(old_col, false);
                basic_[k] = n_ + r;
                pos_[n_ + r] = kBasic;
            }
        }
        throw DomainError("basis factorization failed to stabilize");
    }

    void compute_values() {
        values_.assign(N_, 0.0);
        for (int j = 0; j < N_; ++j) {
            switch (pos_[j]) {
                case kAtLower: values_[j] = lo_[j]; break;
                case kAtUpper: values_[j] = up_[j]; break;
                default: values_[j] = 0.0; break;
            }
        }
        std::vector<double> rhs_eff = rhs_;
        for (int j = 0; j < N_; ++j) {
            if (pos_[j] == kBasic || values_[j] == 0.0) continue;
            const double v = values_[j];
            for_col(j, [&](int r, double a) { rhs_eff[r] -= a * v; });
        }
        for (int k = 0; k < m_; ++k) {
            const double* row = &binv_[static_cast<std::size_t>(k) * m_];
            KahanSum acc;
            for (int r = 0; r < m_; ++r) acc.add(row[r] * rhs_eff[r]);
            values_[basic_[k]] = acc.value();
        }
    }

    double max_infeasibility() const {
        double worst = 0.0;
        for (int k = 0; k < m_; ++k) {
            const int j = basic_[k];
            worst = std::max(worst, lo_[j] - values_[j]);
            worst = std::max(worst, values_[j] - up_[j]);
        }
        return worst;
    }

    void compute_dual() {
        y_.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            const double cb = c_[basic_[k]];
            if (cb == 0.0) continue;
            const double* row = &binv_[static_cast<std::size_t>(k) * m_];
            for (int i = 0; i < m_; ++i) y_[i] += cb * row[i];
        }
    }

    double reduced_cost(int j) const {
        double d = c_[j];
        for_col(j, [&](int r, double a) { d -= y_[r] * a; });
        return d;
    }

    void price_phase2(bool bland, int& q, int& dir) {
        compute_dual();
        q = -1;
        dir = 0;
        double best = opt_.opt_tol;
        for (int j = 0; j < N_; ++j) {
            if (pos_[j] == kBasic || lo_[j] == up_[j]) continue;
            const double d = reduced_cost(j);
            int cand_dir = 0;
            if (pos_[j] == kAtLower && d > opt_.opt_tol) cand_dir = +1;
            else if (pos_[j] == kAtUpper && d < -opt_.opt_tol) cand_dir = -1;
            else if (pos_[j] == kFreeZero && std::abs(d) > opt_.opt_tol) cand_dir = d > 0 ? +1 : -1;
            if (cand_dir == 0) continue;
            if (bland) {
                q = j;
                dir = cand_dir;
                return;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                q = j;
                dir = cand_dir;
            }
        }
    }

    // Phase-1 gradient: the rate of change of total bound violation per unit
    // increase of each basic variable.
    void compute_phase1_gradient() {
        g_.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            const int j = basic_[k];
            if (values_[j] < lo_[j] - opt_.feas_tol) g_[k] = -1.0;
            else if (values_[j] > up_[j] + opt_.feas_tol) g_[k] = +1.0;
        }
    }

    void price_phase1(bool bland, int& q, int& dir) {
        compute_phase1_gradient();
        y_.assign(m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            if (g_[k] == 0.0) continue;
            const double* row = &binv_[static_cast<std::size_t>(k) * m_];
            for (int i = 0; i < m_; ++i) y_[i] += g_[k] * row[i];
        }
        q = -1;
        dir = 0;
        double best = opt_.opt_tol;
        for (int j = 0; j < N_; ++j) {
            if (pos_[j] == kBasic || lo_[j] == up_[j]) continue;
            // d1 = d(infeasibility)/d(x_j); nonbasic columns move x_B by
            // -binv * A_j per unit.
            double d1 = 0.0;
            for_col(j, [&](int r, double a) { d1 -= y_[r] * a; });
            int cand_dir = 0;
            if ((pos_[j] == kAtLower || pos_[j] == kFreeZero) && d1 < -opt_.opt_tol) cand_dir = +1;
            else if ((pos_[j] == kAtUpper || pos_[j] == kFreeZero) && d1 > opt_.opt_tol) cand_dir = -1;
            if (cand_dir == 0) continue;
            if (bland) {
                q = j;
                dir = cand_dir;
                return;
            }
            if (std::abs(d1) > best) {
                best = std::abs(d1);
                q = j;
                dir = cand_dir;
            }
        }
    }

    void compute_pivot_column(int q) {
        w_.assign(m_, 0.0);
        for_col(q, [&](int r, double a) {
            for (int k = 0; k < m_; ++k) w_[k] += binv_[static_cast<std::size_t>(k) * m_ + r] * a;
        });
    }

    struct Block {
        double t = kInfinity;
        int slot = -1;       // -1: the entering column's own opposite bound
        bool to_upper = false;
        double pivot_mag = 0.0;
    };

    void consider(Block& blk, double t, int slot, bool to_upper, double pivot_mag, bool bland) const {
        t = std::max(t, 0.0);
        if (t > blk.t + 1e-9) return;
        if (t < blk.t - 1e-9) {
            blk = {t, slot, to_upper, pivot_mag};
            return;
        }
        // Tied within tolerance: prefer the larger pivot for stability, or
        // under Bland's rule the smallest basic variable index.
        if (bland) {
            const int cur = blk.slot < 0 ? N_ : basic_[blk.slot];
            const int cand = slot < 0 ? N_ : basic_[slot];
            if (cand < cur) blk = {std::min(t, blk.t), slot, to_upper, pivot_mag};
        } else if (pivot_mag > blk.pivot_mag) {
            blk = {std::min(t, blk.t), slot, to_upper, pivot_mag};
        }
    }

    double own_flip_distance(int q) const {
        if (lo_[q] == -kInfinity || up_[q] == kInfinity) return kInfinity;
        return up_[q] - lo_[q];
    }

    bool ratio_phase2(int q, int dir, bool bland, double& t, int& leave_slot,
                      bool& leave_to_upper) {
        Block blk;
        const double own = own_flip_distance(q);
        if (own < kInfinity) consider(blk, own, -1, false, kInfinity, bland);
        for (int k = 0; k < m_; ++k) {
            const double rate = -dir * w_[k];
            if (std::abs(rate) <= kPivotTol) continue;
            const int j = basic_[k];
            if (rate < 0.0 && lo_[j] != -kInfinity)
                consider(blk, (values_[j] - lo_[j]) / -rate, k, false, std::abs(w_[k]), bland);
            else if (rate > 0.0 && up_[j] != kInfinity)
                consider(blk, (up_[j] - values_[j]) / rate, k, true, std::abs(w_[k]), bland);
        }
        if (blk.t == kInfinity) return false;
        t = blk.t;
        leave_slot = blk.slot;
        leave_to_upper = blk.to_upper;
        return true;
    }

    bool ratio_phase1(int q, int dir, bool bland, double& t, int& leave_slot,
                      bool& leave_to_upper) {
        Block blk;
        const double own = own_flip_distance(q);
        if (own < kInfinity) consider(blk, own, -1, false, kInfinity, bland);
        for (int k = 0; k < m_; ++k) {
            const double rate = -dir * w_[k];
            if (std::abs(rate) <= kPivotTol) continue;
            const int j = basic_[k];
            const double mag = std::abs(w_[k]);
            if (values_[j] < lo_[j] - opt_.feas_tol) {
                // Below its lower bound: blocks when rising back to it.
                if (rate > 0.0) consider(blk, (lo_[j] - values_[j]) / rate, k, false, mag, bland);
            } else if (values_[j] > up_[j] + opt_.feas_tol) {
                if (rate < 0.0) consider(blk, (values_[j] - up_[j]) / -rate, k, true, mag, bland);
            } else {
                if (rate < 0.0 && lo_[j] != -kInfinity)
                    consider(blk, (values_[j] - lo_[j]) / -rate, k, false, mag, bland);
                else if (rate > 0.0 && up_[j] != kInfinity)
                    consider(blk, (up_[j] - values_[j]) / rate, k, true, mag, bland);
            }
        }
        if (blk.t == kInfinity) return false;
        t = blk.t;
        leave_slot = blk.slot;
        leave_to_upper = blk.to_upper;
        return true;
    }

    void apply_step(int q, int dir, double t, int leave_slot, bool leave_to_upper) {
        for (int k = 0; k < m_; ++k) {
            if (w_[k] == 0.0) continue;
            values_[basic_[k]] += -dir * w_[k] * t;
        }
        if (leave_slot < 0) {
            // Bound flip: snap exactly to the opposite bound.
            values_[q] = dir > 0 ? up_[q] : lo_[q];
            pos_[q] = dir > 0 ? kAtUpper : kAtLower;
            return;
        }
        const int out = basic_[leave_slot];
        values_[out] = leave_to_upper ? up_[out] : lo_[out];
        pos_[out] = leave_to_upper ? kAtUpper : kAtLower;
        values_[q] += dir * t;
        pos_[q] = kBasic;
        basic_[leave_slot] = q;

        // binv <- E * binv with the eta column derived from w.
        const double pe = w_[leave_slot];
        double* prow = &binv_[static_cast<std::size_t>(leave_slot) * m_];
        const double inv_pe = 1.0 / pe;
        for (int i = 0; i < m_; ++i) prow[i] *= inv_pe;
        for (int k = 0; k < m_; ++k) {
            if (k == leave_slot) continue;
            const double f = w_[k];
            if (f == 0.0) continue;
            double* row = &binv_[static_cast<std::size_t>(k) * m_];
            for (int i = 0; i < m_; ++i) row[i] -= f * prow[i];
        }
    }

    void extract(LpResult& result) const {
        result.x.assign(lp_.num_vars, 0.0);
        for (int j = 0; j < n_; ++j) result.x[j] = values_[j];
        KahanSum obj;
        for (int j = 0; j < n_; ++j) obj.add(lp_.objective[j] * result.x[j]);
        result.objective = obj.value() + lp_.objective_constant;
        result.basis.basic = basic_;
        result.basis.at_upper.assign(N_, 0);
        for (int j = 0; j < N_; ++j)
            if (pos_[j] == kAtUpper) result.basis.at_upper[j] = 1;
    }
};

} // namespace

LpResult simplex_solve(const LinearProgram& lp, const Basis* warm_basis,
                       const SimplexOptions& options, SimplexCache* cache) {
    if (static_cast<int>(lp.objective.size()) != lp.num_vars ||
        static_cast<int>(lp.lower.size()) != lp.num_vars ||
        static_cast<int>(lp.upper.size()) != lp.num_vars)
        throw DomainError("inconsistent variable arrays in LP");
    if (lp.rows.size() != lp.relations.size() || lp.rows.size() != lp.rhs.size())
        throw DomainError("inconsistent row arrays in LP");
    Simplex solver(lp, options, cache);
    return solver.run(warm_basis);
}

double lp_optimality_violation(const LinearProgram& lp, const LpResult& result) {
    Simplex solver(lp, SimplexOptions{}, nullptr);
    return solver.audit(result);
}

} // namespace chargeopt

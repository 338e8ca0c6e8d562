#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "chargeopt/lp.hpp"
#include "chargeopt/rng.hpp"

using namespace chargeopt;
using doctest::Approx;

TEST_CASE("box-only maximization hits the upper bound") {
    LinearProgram lp;
    lp.add_variable(0.0, 1.0, 1.0);
    const LpResult r = simplex_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == Approx(1.0));
    CHECK(r.x[0] == Approx(1.0));
}

TEST_CASE("two-variable corner") {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, kInfinity, 3.0);
    const int y = lp.add_variable(0.0, kInfinity, 2.0);
    SparseRow both;
    both.add(x, 1.0);
    both.add(y, 1.0);
    lp.add_row(both, Relation::LessEqual, 4.0);
    SparseRow cap;
    cap.add(x, 1.0);
    lp.add_row(cap, Relation::LessEqual, 2.0);

    const LpResult r = simplex_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == Approx(10.0).epsilon(1e-12));
    CHECK(r.x[x] == Approx(2.0));
    CHECK(r.x[y] == Approx(2.0));
    CHECK(lp_optimality_violation(lp, r) <= 1e-8);
}

TEST_CASE("equality and greater-equal rows") {
    // max -x - 2y  s.t.  x + y = 3,  y >= 1,  0 <= x,y <= 5.
    LinearProgram lp;
    const int x = lp.add_variable(0.0, 5.0, -1.0);
    const int y = lp.add_variable(0.0, 5.0, -2.0);
    SparseRow sum;
    sum.add(x, 1.0);
    sum.add(y, 1.0);
    lp.add_row(sum, Relation::Equal, 3.0);
    SparseRow floor_y;
    floor_y.add(y, 1.0);
    lp.add_row(floor_y, Relation::GreaterEqual, 1.0);

    const LpResult r = simplex_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.x[x] == Approx(2.0));
    CHECK(r.x[y] == Approx(1.0));
    CHECK(r.objective == Approx(-4.0));
}

TEST_CASE("negative lower bounds") {
    // max x + y with x in [-3, -1], y in [-2, 4], x + y <= 1.
    LinearProgram lp;
    const int x = lp.add_variable(-3.0, -1.0, 1.0);
    const int y = lp.add_variable(-2.0, 4.0, 1.0);
    SparseRow row;
    row.add(x, 1.0);
    row.add(y, 1.0);
    lp.add_row(row, Relation::LessEqual, 1.0);
    const LpResult r = simplex_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == Approx(1.0));
    CHECK(r.x[x] + r.x[y] == Approx(1.0));
}

TEST_CASE("infeasibility detected") {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, 1.0, 1.0);
    SparseRow row;
    row.add(x, 1.0);
    lp.add_row(row, Relation::GreaterEqual, 3.0);
    CHECK(simplex_solve(lp).status == LpStatus::Infeasible);

    // Contradictory equalities.
    LinearProgram eq;
    const int a = eq.add_variable(0.0, 10.0, 0.0);
    const int b = eq.add_variable(0.0, 10.0, 1.0);
    SparseRow r1, r2;
    r1.add(a, 1.0);
    r1.add(b, 1.0);
    r2.add(a, 1.0);
    r2.add(b, 1.0);
    eq.add_row(r1, Relation::Equal, 2.0);
    eq.add_row(r2, Relation::Equal, 5.0);
    CHECK(simplex_solve(eq).status == LpStatus::Infeasible);
}

TEST_CASE("unboundedness detected") {
    LinearProgram lp;
    lp.add_variable(0.0, kInfinity, 1.0);
    CHECK(simplex_solve(lp).status == LpStatus::Unbounded);

    // Ray hidden behind one constraint.
    LinearProgram ray;
    const int x = ray.add_variable(0.0, kInfinity, 1.0);
    const int y = ray.add_variable(0.0, kInfinity, 1.0);
    SparseRow row;
    row.add(x, 1.0);
    row.add(y, -1.0);
    ray.add_row(row, Relation::LessEqual, 1.0);
    CHECK(simplex_solve(ray).status == LpStatus::Unbounded);
}

TEST_CASE("degenerate vertices do not cycle") {
    // Klee-Minty style stack of redundant rows through one corner.
    LinearProgram lp;
    const int x = lp.add_variable(0.0, kInfinity, 1.0);
    const int y = lp.add_variable(0.0, kInfinity, 1.0);
    for (double s : {1.0, 2.0, 3.0, 4.0}) {
        SparseRow row;
        row.add(x, s);
        row.add(y, s);
        lp.add_row(row, Relation::LessEqual, 2.0 * s);
    }
    const LpResult r = simplex_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == Approx(2.0));
    CHECK(lp_optimality_violation(lp, r) <= 1e-8);
}

TEST_CASE("iteration limit reported") {
    LinearProgram lp;
    for (int j = 0; j < 6; ++j) lp.add_variable(0.0, kInfinity, 1.0 + j);
    for (int i = 0; i < 6; ++i) {
        SparseRow row;
        for (int j = 0; j < 6; ++j) row.add(j, 1.0 + ((i * 7 + j) % 3));
        lp.add_row(row, Relation::LessEqual, 10.0 + i);
    }
    SimplexOptions opt;
    opt.iteration_limit = 1;
    CHECK(simplex_solve(lp, nullptr, opt).status == LpStatus::IterationLimit);
}

namespace {

// Random bounded-feasible LPs: boxes keep everything finite, right-hand
// sides at least the row value at the origin keep the start feasible.
LinearProgram random_lp(std::uint64_t seed, int vars, int rows) {
    CounterRng rng(seed, 0x1700ULL);
    std::uint64_t c = 0;
    auto unit = [&] { return rng.uniform(c++); };

    LinearProgram lp;
    for (int j = 0; j < vars; ++j) lp.add_variable(0.0, 2.0 + 8.0 * unit(), -2.0 + 4.0 * unit());
    for (int i = 0; i < rows; ++i) {
        SparseRow row;
        for (int j = 0; j < vars; ++j)
            if (unit() < 0.6) row.add(j, -1.0 + 2.0 * unit());
        if (row.size() == 0) row.add(i % vars, 1.0);
        lp.add_row(row, Relation::LessEqual, 1.0 + 10.0 * unit());
    }
    return lp;
}

} // namespace

TEST_CASE("random programs satisfy the optimality conditions") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const LinearProgram lp = random_lp(seed, 20, 14);
        const LpResult r = simplex_solve(lp);
        REQUIRE(r.status == LpStatus::Optimal);
        CHECK(lp_optimality_violation(lp, r) <= 1e-6);
    }
}

TEST_CASE("warm starts reproduce the cold optimum") {
    LinearProgram lp = random_lp(77, 24, 16);
    const LpResult cold = simplex_solve(lp);
    REQUIRE(cold.status == LpStatus::Optimal);

    // Restart on the same problem: the optimal basis verifies immediately.
    const LpResult same = simplex_solve(lp, &cold.basis);
    REQUIRE(same.status == LpStatus::Optimal);
    CHECK(same.objective == Approx(cold.objective).epsilon(1e-12));
    CHECK(same.iterations <= cold.iterations);

    // Tighten one box and re-solve warm; a cold solve agrees.
    lp.upper[3] = std::min(lp.upper[3], 0.5);
    const LpResult warm = simplex_solve(lp, &cold.basis);
    const LpResult fresh = simplex_solve(lp);
    REQUIRE(warm.status == LpStatus::Optimal);
    REQUIRE(fresh.status == LpStatus::Optimal);
    CHECK(warm.objective == Approx(fresh.objective).epsilon(1e-10));
    CHECK(lp_optimality_violation(lp, warm) <= 1e-6);

    // A nonsense warm basis falls back to the cold start, not an error.
    Basis junk;
    junk.basic.assign(static_cast<std::size_t>(lp.num_rows()), 0);
    junk.at_upper.assign(static_cast<std::size_t>(lp.num_vars + lp.num_rows()), 0);
    const LpResult fallback = simplex_solve(lp, &junk);
    REQUIRE(fallback.status == LpStatus::Optimal);
    CHECK(fallback.objective == Approx(fresh.objective).epsilon(1e-10));
}

TEST_CASE("a shared cache changes cost, not answers") {
    SimplexCache cache;
    LinearProgram lp = random_lp(5, 18, 12);
    const LpResult no_cache = simplex_solve(lp);
    REQUIRE(no_cache.status == LpStatus::Optimal);

    LpResult prev = simplex_solve(lp, nullptr, {}, &cache);
    for (int round = 0; round < 4; ++round) {
        // Alternate tightening and relaxing a box around the optimum.
        lp.upper[round] = round % 2 == 0 ? 1.0 : 6.0;
        const LpResult warm = simplex_solve(lp, &prev.basis, {}, &cache);
        const LpResult cold = simplex_solve(lp);
        REQUIRE(warm.status == cold.status);
        if (cold.status == LpStatus::Optimal) {
            CHECK(warm.objective == Approx(cold.objective).epsilon(1e-10));
            CHECK(lp_optimality_violation(lp, warm) <= 1e-6);
        }
        prev = warm;
    }
}

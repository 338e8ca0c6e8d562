#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "chargeopt/errors.hpp"
#include "chargeopt/mip.hpp"
#include "chargeopt/model.hpp"
#include "toy_instances.hpp"

using namespace chargeopt;
using namespace chargeopt::testing;
using doctest::Approx;

namespace {

bool same_structure(const MipProblem& a, const MipProblem& b) {
    if (a.num_cols() != b.num_cols() || a.num_rows() != b.num_rows()) return false;
    for (int j = 0; j < a.num_cols(); ++j) {
        const auto& va = a.variables[j];
        const auto& vb = b.variables[j];
        if (va.name != vb.name || va.lower != vb.lower || va.upper != vb.upper ||
            va.kind != vb.kind)
            return false;
        if (a.objective[j] != b.objective[j]) return false;
    }
    for (int r = 0; r < a.num_rows(); ++r) {
        const auto& ra = a.constraints[r];
        const auto& rb = b.constraints[r];
        if (ra.name != rb.name || ra.rel != rb.rel || ra.rhs != rb.rhs) return false;
        if (ra.row.cols != rb.row.cols || ra.row.vals != rb.row.vals) return false;
    }
    return true;
}

bool same_rows(const MipProblem& a, const MipProblem& b) {
    if (a.num_rows() != b.num_rows()) return false;
    for (int r = 0; r < a.num_rows(); ++r) {
        const auto& ra = a.constraints[r];
        const auto& rb = b.constraints[r];
        if (ra.name != rb.name || ra.rel != rb.rel || ra.rhs != rb.rhs) return false;
        if (ra.row.cols != rb.row.cols || ra.row.vals != rb.row.vals) return false;
    }
    return true;
}

} // namespace

TEST_CASE("variant labels round-trip") {
    CHECK(variant_label({Variant::Kind::Robust, 1.0}) == "robust");
    CHECK(variant_label({Variant::Kind::NonRobust, 1.0}) == "nonrobust");
    CHECK(variant_label({Variant::Kind::Misspecified, 0.95}) == "misspecified-0.95");

    const Variant m = variant_from_label("misspecified-1.05");
    CHECK(m.kind == Variant::Kind::Misspecified);
    CHECK(m.factor == 1.05);
    CHECK(variant_from_label("ROBUST").kind == Variant::Kind::Robust);
    CHECK_THROWS_AS(variant_from_label("pessimistic"), ConfigError);
    CHECK_THROWS_AS(variant_from_label("misspecified--2"), ConfigError);
}

TEST_CASE("effective reliabilities by variant") {
    const Instance inst = tiny_instance(3, 2, 1);
    const ReliabilityEstimates est = fixed_estimates(inst, {0.9, 0.8, 0.7});

    CHECK(effective_reliabilities(inst, est, {Variant::Kind::Robust, 1.0}) ==
          std::vector<double>{0.9, 0.8, 0.7});
    CHECK(effective_reliabilities(inst, est, {Variant::Kind::NonRobust, 1.0}) ==
          std::vector<double>{1.0, 1.0, 1.0});
    const auto under = effective_reliabilities(inst, est, {Variant::Kind::Misspecified, 0.5});
    CHECK(under == std::vector<double>{0.45, 0.4, 0.35});

    // Overestimation is taken literally, even past certainty.
    const auto over = effective_reliabilities(inst, est, {Variant::Kind::Misspecified, 1.2});
    CHECK(over[0] == Approx(1.08).epsilon(1e-15));

    ReliabilityEstimates missing = est;
    missing.stations.pop_back();
    CHECK_THROWS_AS(effective_reliabilities(inst, missing, {Variant::Kind::Robust, 1.0}),
                    DomainError);

    ReliabilityEstimates bad = est;
    bad.stations[0].p_hat = 1.5;
    CHECK_THROWS_AS(effective_reliabilities(inst, bad, {Variant::Kind::Robust, 1.0}),
                    DomainError);
}

TEST_CASE("column layout and objective coefficients") {
    const Instance inst = tiny_instance(2, 2, 2);
    const ReliabilityEstimates est = fixed_estimates(inst, {0.9, 0.75});
    const MipProblem prob = build_model(inst, est, {Variant::Kind::Robust, 1.0});

    // x, y, v, u blocks: 2 + 4 + 8 + 2 columns.
    REQUIRE(prob.num_cols() == 16);
    CHECK(prob.variables[prob.index.x[0]].name == "x[1]");
    CHECK(prob.variables[prob.index.x[0]].kind == VarKind::Binary);
    CHECK(prob.variables[prob.index.y[1][0]].name == "y[2,1]");
    CHECK(prob.variables[prob.index.v[1][0][1]].name == "v[2,1,2]");
    CHECK(prob.variables[prob.index.u[1]].name == "u[2]");
    CHECK(prob.variables[prob.index.u[1]].upper == 3.0);

    // Opening and connector costs enter negatively.
    CHECK(prob.objective[prob.index.x[0]] == -inst.stations[0].daily_cost);
    CHECK(prob.objective[prob.index.u[0]] == -inst.params.connector_cost);
    CHECK(prob.objective[prob.index.y[0][0]] == 0.0);

    // Vehicle term: price * energy * p minus penalty * travel * (1 - p).
    const double expected = 100.0 * 45.0 * 0.75 - 40.0 * inst.travel_time[0][1] * 0.25;
    CHECK(prob.objective[prob.index.v[0][1][1]] == Approx(expected).epsilon(1e-15));

    // v capped by the demand it can serve.
    CHECK(prob.variables[prob.index.v[0][0][0]].upper ==
          static_cast<double>(inst.demand_of(0, 0)));

    // Row families present with the published directions.
    REQUIRE(prob.num_rows() == 4 + 4 + 2 + 2 + 2 + 2 + 1 + 2 + 4);
    CHECK(prob.constraints[0].name == "link_vy[1,1]");
    CHECK(prob.constraints[4].name == "demand[1,1]");
    CHECK(prob.constraints[4].rel == Relation::Equal);
}

TEST_CASE("ineligible pairs are boxed to zero") {
    Instance inst = tiny_instance(2, 2, 1);
    inst.travel_time[0][1] = inst.params.max_travel_time + 1.0;
    const MipProblem prob =
        build_model(inst, fixed_estimates(inst, {0.9, 0.9}), {Variant::Kind::Robust, 1.0});
    CHECK(prob.variables[prob.index.y[0][1]].upper == 0.0);
    CHECK(prob.variables[prob.index.y[0][0]].upper == 1.0);
}

TEST_CASE("invalid instances are rejected at build time") {
    Instance inst = tiny_instance(2, 2, 1);
    inst.params.big_m = 0.0;
    CHECK_THROWS_AS(build_model(inst, fixed_estimates(inst, {0.9, 0.9}),
                                {Variant::Kind::Robust, 1.0}),
                    ValidationError);
}

TEST_CASE("the certainty build equals the robust build at p = 1") {
    const Instance inst = tiny_instance(3, 3, 2);
    const ReliabilityEstimates ones = fixed_estimates(inst, {1.0, 1.0, 1.0});
    const ReliabilityEstimates mixed = fixed_estimates(inst, {0.91, 0.77, 0.84});

    const MipProblem robust_at_one = build_model(inst, ones, {Variant::Kind::Robust, 1.0});
    const MipProblem nonrobust = build_model(inst, mixed, {Variant::Kind::NonRobust, 1.0});
    CHECK(same_structure(robust_at_one, nonrobust));
}

TEST_CASE("misspecification distorts the objective and nothing else") {
    const Instance inst = tiny_instance(2, 2, 1);
    const ReliabilityEstimates est = fixed_estimates(inst, {0.9, 0.8});

    const MipProblem robust = build_model(inst, est, {Variant::Kind::Robust, 1.0});
    const MipProblem under = build_model(inst, est, {Variant::Kind::Misspecified, 0.95});
    const MipProblem over = build_model(inst, est, {Variant::Kind::Misspecified, 1.05});

    CHECK(same_rows(robust, under));
    CHECK(same_rows(robust, over));

    // The vehicle coefficients follow the believed reliability exactly.
    const int col = robust.index.v[0][0][0];
    const double t = inst.travel_time[0][0];
    CHECK(under.objective[col] ==
          Approx(100.0 * 30.0 * 0.855 - 40.0 * t * (1.0 - 0.855)).epsilon(1e-15));
    CHECK(over.objective[col] ==
          Approx(100.0 * 30.0 * 0.945 - 40.0 * t * (1.0 - 0.945)).epsilon(1e-15));

    // Station and connector costs are belief-independent.
    CHECK(under.objective[robust.index.x[0]] == robust.objective[robust.index.x[0]]);
    CHECK(under.objective[robust.index.u[1]] == robust.objective[robust.index.u[1]]);
}

TEST_CASE("presolve drops fixed columns and can fold assignments") {
    Instance inst = tiny_instance(2, 2, 1);
    inst.travel_time[1][1] = inst.params.max_travel_time + 5.0;
    const ReliabilityEstimates est = fixed_estimates(inst, {0.9, 0.8});
    const MipProblem prob = build_model(inst, est, {Variant::Kind::Robust, 1.0});

    SUBCASE("eligibility reductions") {
        const PresolveResult pre = presolve(prob, inst);
        REQUIRE_FALSE(pre.infeasible);
        CHECK(pre.problem.num_cols() < prob.num_cols());
        CHECK(pre.map.reduced_of_original[prob.index.y[1][1]] == -1);
        CHECK(pre.map.fixed_value[prob.index.y[1][1]] == 0.0);
        // Surviving columns keep their names.
        const int reduced_x0 = pre.map.reduced_of_original[prob.index.x[0]];
        REQUIRE(reduced_x0 >= 0);
        CHECK(pre.problem.variables[reduced_x0].name == "x[1]");
    }

    SUBCASE("assignment folding") {
        BuildOptions fold;
        fold.fix_y_to_x = true;
        const MipProblem foldable = build_model(inst, est, {Variant::Kind::Robust, 1.0}, fold);
        const PresolveResult pre = presolve(foldable, inst);
        REQUIRE_FALSE(pre.infeasible);
        for (const auto& var : pre.problem.variables) CHECK(var.name.rfind("y[", 0) != 0);
        const int y00 = foldable.index.y[0][0];
        CHECK(pre.map.substituted_to[y00] == foldable.index.x[0]);
    }
}

TEST_CASE("presolve detects unreachable nodes") {
    Instance inst = tiny_instance(2, 2, 1);
    for (auto& t : inst.travel_time[0]) t = inst.params.max_travel_time + 10.0;
    const MipProblem prob =
        build_model(inst, fixed_estimates(inst, {0.9, 0.8}), {Variant::Kind::Robust, 1.0});
    const PresolveResult pre = presolve(prob, inst);
    CHECK(pre.infeasible);
    CHECK_FALSE(pre.reason.empty());
}

TEST_CASE("presolve preserves the optimum") {
    for (std::uint64_t seed : {101ULL, 102ULL, 103ULL, 104ULL}) {
        const Instance inst = random_toy(seed);
        const ReliabilityEstimates est = random_toy_estimates(inst, seed);
        const MipProblem prob = build_model(inst, est, {Variant::Kind::Robust, 1.0});

        BnBConfig cfg;
        cfg.rel_gap_tol = 0.0;
        const MipResult plain = solve_mip(prob, cfg);

        const PresolveResult pre = presolve(prob, inst);
        if (pre.infeasible) {
            CHECK(plain.status == MipStatus::Infeasible);
            continue;
        }
        const MipResult reduced = solve_mip(pre.problem, cfg);
        REQUIRE(plain.status == reduced.status);
        if (plain.status == MipStatus::Optimal) {
            CHECK(reduced.objective ==
                  Approx(plain.objective).epsilon(1e-6));
        }
    }
}

TEST_CASE("solution extraction and reconstruction") {
    const Instance inst = tiny_instance(2, 2, 1);
    const ReliabilityEstimates est = fixed_estimates(inst, {0.9, 0.8});
    BuildOptions fold;
    fold.fix_y_to_x = true;
    const MipProblem prob = build_model(inst, est, {Variant::Kind::Robust, 1.0}, fold);
    const PresolveResult pre = presolve(prob, inst);
    REQUIRE_FALSE(pre.infeasible);

    BnBConfig cfg;
    cfg.rel_gap_tol = 0.0;
    const MipResult res = solve_mip(pre.problem, cfg);
    REQUIRE(res.status == MipStatus::Optimal);

    const SolutionSummary sum = extract_solution(prob, res.values, &pre.map, res.objective);
    CHECK(sum.model_objective == Approx(res.objective).epsilon(1e-9));
    CHECK_FALSE(sum.open_stations.empty());
    for (int id : sum.open_stations) CHECK(sum.connectors.count(id) == 1);

    // Assignments only where the summary claims an open station.
    for (std::size_t i = 0; i < inst.num_nodes(); ++i)
        for (std::size_t j = 0; j < inst.num_stations(); ++j)
            if (sum.assignment_flags[i][j]) CHECK(sum.is_open(j));

    // A wrong claimed objective is rejected.
    CHECK_THROWS_AS(extract_solution(prob, res.values, &pre.map, res.objective + 1000.0),
                    DomainError);

    // Artifact serialization round-trip.
    SolutionArtifact artifact;
    artifact.summary = sum;
    artifact.instance_checksum = instance_checksum(inst);
    artifact.status = "optimal";
    artifact.best_bound = res.best_bound;
    artifact.nodes = res.nodes;
    artifact.train_seed = 7;
    const SolutionArtifact back = solution_from_json(solution_to_json(artifact));
    CHECK(back.summary.open_stations == sum.open_stations);
    CHECK(back.summary.connectors == sum.connectors);
    CHECK(back.summary.assignments == sum.assignments);
    CHECK(back.summary.model_objective == sum.model_objective);
    CHECK(back.instance_checksum == artifact.instance_checksum);
    CHECK(back.status == "optimal");
    CHECK(back.train_seed == 7);

    const std::string path = "test_model_solution.json";
    save_solution(artifact, path);
    CHECK(load_solution(path).summary.open_stations == sum.open_stations);
    std::remove(path.c_str());
}

TEST_CASE("canonical evaluation is exact on integer points") {
    const Instance inst = tiny_instance(2, 1, 1);
    const ReliabilityEstimates est = fixed_estimates(inst, {0.875, 0.75});
    const MipProblem prob = build_model(inst, est, {Variant::Kind::Robust, 1.0});

    std::vector<double> point(static_cast<std::size_t>(prob.num_cols()), 0.0);
    point[prob.index.x[0]] = 1.0;
    point[prob.index.y[0][0]] = 1.0;
    point[prob.index.v[0][0][0]] = 1.0;
    point[prob.index.u[0]] = 1.0;

    // One vehicle at station 1: coefficients are eighths, so this value is
    // exact in binary floating point.
    const double expected = -inst.stations[0].daily_cost - inst.params.connector_cost +
                            100.0 * 30.0 * 0.875 -
                            40.0 * inst.travel_time[0][0] * 0.125;
    CHECK(canonical_objective(prob, point) == expected);

    const auto& demand_row = prob.constraints[2];
    REQUIRE(demand_row.name.rfind("demand[", 0) == 0);
    CHECK(row_activity(demand_row, point) == 1.0);
    CHECK(row_violation(demand_row, point) == 0.0);
}

TEST_CASE("relaxation drops integrality but keeps geometry") {
    const Instance inst = tiny_instance(2, 2, 1);
    const MipProblem prob =
        build_model(inst, fixed_estimates(inst, {0.9, 0.8}), {Variant::Kind::Robust, 1.0});
    const LinearProgram lp = prob.relaxation();
    CHECK(lp.num_vars == prob.num_cols());
    CHECK(lp.num_rows() == prob.num_rows());
    CHECK(lp.objective == prob.objective);
    for (int j = 0; j < prob.num_cols(); ++j) {
        CHECK(lp.lower[j] == prob.variables[j].lower);
        CHECK(lp.upper[j] == prob.variables[j].upper);
    }
}

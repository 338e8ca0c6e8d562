// Acceptance gate: one verdict line per shipped claim, nonzero exit when any
// claim fails.  Claims 7-9 exercise the bundled instance and the CLI end to
// end; the rest are self-contained statistical and solver properties.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chargeopt/errors.hpp"
#include "chargeopt/evaluation.hpp"
#include "chargeopt/experiment.hpp"
#include "chargeopt/instance.hpp"
#include "chargeopt/mip.hpp"
#include "chargeopt/model.hpp"
#include "chargeopt/normal.hpp"
#include "chargeopt/reliability.hpp"
#include "chargeopt/scenario.hpp"
#include "chargeopt/util.hpp"
#include "toy_instances.hpp"

using namespace chargeopt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string env_path(const char* name) {
    const char* v = std::getenv(name);
    return v == nullptr ? std::string{} : std::string(v);
}

struct Gate {
    int failures = 0;

    void check(int number, const std::string& claim,
               const std::function<std::string()>& body) {
        std::string detail;
        try {
            detail = body();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (detail.empty()) {
            std::printf("[PASS] criterion %d: %s\n", number, claim.c_str());
        } else {
            std::printf("[FAIL] criterion %d: %s; %s\n", number, claim.c_str(), detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
};

// Exact structural equality of two built problems, first difference named.
std::string problem_difference(const MipProblem& a, const MipProblem& b) {
    if (a.num_cols() != b.num_cols()) return "column counts differ";
    for (int j = 0; j < a.num_cols(); ++j) {
        const MipVariable& va = a.variables[j];
        const MipVariable& vb = b.variables[j];
        if (va.name != vb.name || va.lower != vb.lower || va.upper != vb.upper ||
            va.kind != vb.kind)
            return "column " + va.name + " differs";
        if (a.objective[j] != b.objective[j])
            return "objective coefficient of " + va.name + " differs";
    }
    if (a.objective_constant != b.objective_constant) return "objective constants differ";
    if (a.num_rows() != b.num_rows()) return "row counts differ";
    for (int r = 0; r < a.num_rows(); ++r) {
        const MipConstraint& ca = a.constraints[r];
        const MipConstraint& cb = b.constraints[r];
        if (ca.name != cb.name || ca.rel != cb.rel || ca.rhs != cb.rhs ||
            ca.row.cols != cb.row.cols || ca.row.vals != cb.row.vals)
            return "row " + ca.name + " differs";
    }
    return {};
}

// Replication study: the estimator value of every station under R fresh
// scenario sets of size n, MC and CV sharing each set.
struct Replications {
    std::vector<std::vector<double>> mc, cv; // [station][replication]
};

Replications replicate(const Instance& inst, std::size_t r_count, std::size_t n,
                       std::uint64_t seed_base) {
    Replications reps;
    reps.mc.assign(inst.num_stations(), {});
    reps.cv.assign(inst.num_stations(), {});
    for (std::size_t r = 0; r < r_count; ++r) {
        const PairedScenarioSet set =
            sample_paired_scenarios(inst, n, seed_base + r, kDefaultRho);
        const ReliabilityEstimates mc = mc_estimate(set);
        const ReliabilityEstimates cv = cv_estimate(set);
        for (std::size_t j = 0; j < inst.num_stations(); ++j) {
            reps.mc[j].push_back(mc.stations[j].p_hat);
            reps.cv[j].push_back(cv.stations[j].p_hat);
        }
    }
    return reps;
}

} // namespace

int main() {
    Gate gate;
    const Instance table = embedded_surabaya_parameters();
    const ReliabilityEstimates analytic = analytic_reliabilities(table);

    gate.check(1, "analytic reliabilities lie in [0.9765, 0.9785] and match the normal CDF",
               [&]() -> std::string {
        std::string detail;
        for (std::size_t j = 0; j < table.num_stations(); ++j) {
            const double p = analytic.stations[j].p_hat;
            const DisruptionModel& d = table.stations[j].disruption;
            const double phi = standard_normal_cdf((d.threshold - d.mean) / d.std_dev);
            if (std::abs(p - phi) > 1e-10)
                detail += " station " + std::to_string(table.stations[j].id) +
                          " deviates from the CDF by " + fmt(std::abs(p - phi));
            if (!(p >= 0.9765 && p <= 0.9785))
                detail += " station " + std::to_string(table.stations[j].id) + " p=" +
                          fmt(p) + " outside the band";
        }
        return detail.empty() ? detail : detail.substr(1);
    });

    gate.check(2, "MC and CV grand means over 1000 replications at n=1000 are unbiased",
               [&]() -> std::string {
        const Replications reps = replicate(table, 1000, 1000, 100000);
        double worst = 0.0;
        std::string detail;
        for (std::size_t j = 0; j < table.num_stations(); ++j) {
            const double truth = analytic.stations[j].p_hat;
            for (const auto* series : {&reps.mc[j], &reps.cv[j]}) {
                const MeanStdErr g = mean_and_se(*series);
                const double z = std::abs(g.mean - truth) / g.std_err;
                worst = std::max(worst, z);
                if (z > 4.0)
                    detail += " station " + std::to_string(table.stations[j].id) +
                              (series == &reps.mc[j] ? " mc" : " cv") + " off by " + fmt(z) +
                              " grand-mean SEs";
            }
        }
        if (!detail.empty()) return detail.substr(1);
        std::printf("       criterion 2 worst deviation: %.2f grand-mean SEs\n", worst);
        return {};
    });

    gate.check(3, "CV replication SE is at most a fifth of MC at n=10000",
               [&]() -> std::string {
        const Replications reps = replicate(table, 200, 10000, 200000);
        double worst = 0.0;
        std::string detail;
        for (std::size_t j = 0; j < table.num_stations(); ++j) {
            const double mc_se = mean_and_se(reps.mc[j]).std_err;
            const double cv_se = mean_and_se(reps.cv[j]).std_err;
            const double ratio = cv_se / mc_se;
            worst = std::max(worst, ratio);
            if (!(ratio <= 0.2))
                detail += " station " + std::to_string(table.stations[j].id) +
                          " ratio " + fmt(ratio);
        }
        if (!detail.empty()) return detail.substr(1);
        std::printf("       criterion 3 worst CV/MC SE ratio: %.4f\n", worst);
        return {};
    });

    gate.check(4, "Hoeffding sample sizes are formula-exact", [&]() -> std::string {
        const std::int64_t coarse = hoeffding_sample_size(0.1, 0.05);
        const std::int64_t fine = hoeffding_sample_size(0.0001, 0.05);
        if (coarse != 185) return "hoeffding_sample_size(0.1, 0.05) = " + std::to_string(coarse);
        if (fine != 184443973)
            return "hoeffding_sample_size(0.0001, 0.05) = " + std::to_string(fine);
        return {};
    });

    gate.check(5, "branch and bound matches exhaustive enumeration on 50 random toys",
               [&]() -> std::string {
        const auto t0 = Clock::now();
        int matched = 0, infeasible = 0;
        for (std::uint64_t seed = 2000; seed < 2200 && matched < 50; ++seed) {
            const Instance toy = testing::random_toy(seed);
            const ReliabilityEstimates est = testing::random_toy_estimates(toy, seed);
            const MipProblem prob = build_model(toy, est, Variant{}, {true, true});
            const PresolveResult pre = presolve(prob, toy);
            if (pre.infeasible) {
                ++infeasible;
                continue;
            }
            BnBConfig cfg;
            cfg.rel_gap_tol = 0.0;
            cfg.collect_log = false;
            const MipResult bb = solve_mip(pre.problem, cfg);
            const MipResult oracle = brute_force_mip(pre.problem);
            if (bb.status != oracle.status)
                return "seed " + std::to_string(seed) + ": search says " +
                       mip_status_name(bb.status) + ", enumeration says " +
                       mip_status_name(oracle.status);
            if (bb.status == MipStatus::Infeasible) {
                ++infeasible;
                continue;
            }
            if (bb.objective != oracle.objective)
                return "seed " + std::to_string(seed) + ": objectives " +
                       fmt(bb.objective) + " vs " + fmt(oracle.objective);
            const FeasibilityReport rep = verify_solution(pre.problem, bb.values);
            if (!rep.feasible(1e-6))
                return "seed " + std::to_string(seed) + ": residual " +
                       fmt(rep.max_violation);
            ++matched;
        }
        const double elapsed = seconds_since(t0);
        if (matched < 50)
            return "only " + std::to_string(matched) + " solvable toys in the seed range";
        if (elapsed >= 60.0) return "took " + fmt(elapsed) + " s";
        std::printf("       criterion 5: %d optima matched, %d infeasible agreed, %.1f s\n",
                    matched, infeasible, elapsed);
        return {};
    });

    gate.check(6, "NonRobust equals Robust at p=1 and presolve preserves optima",
               [&]() -> std::string {
        const ReliabilityEstimates sampled =
            estimate_reliabilities(table, 1000, 7, EstimatorMethod::CV, kDefaultRho);
        const ReliabilityEstimates ones =
            testing::fixed_estimates(table, std::vector<double>(table.num_stations(), 1.0));
        Variant nonrobust;
        nonrobust.kind = Variant::Kind::NonRobust;
        const std::string diff = problem_difference(build_model(table, ones, Variant{}),
                                                    build_model(table, sampled, nonrobust));
        if (!diff.empty()) return diff;

        for (std::uint64_t seed = 3000; seed < 3012; ++seed) {
            const Instance toy = testing::random_toy(seed);
            const ReliabilityEstimates est = testing::random_toy_estimates(toy, seed);
            const MipProblem prob = build_model(toy, est, Variant{}, {true, false});
            const PresolveResult pre = presolve(prob, toy);
            BnBConfig cfg;
            cfg.rel_gap_tol = 0.0;
            cfg.collect_log = false;
            const MipResult raw = solve_mip(prob, cfg);
            if (pre.infeasible) {
                if (raw.status != MipStatus::Infeasible)
                    return "seed " + std::to_string(seed) +
                           ": presolve infeasible but the raw problem solved";
                continue;
            }
            const MipResult reduced = solve_mip(pre.problem, cfg);
            if (raw.status != reduced.status)
                return "seed " + std::to_string(seed) + ": statuses " +
                       mip_status_name(raw.status) + " vs " + mip_status_name(reduced.status);
            if (raw.status != MipStatus::Optimal) continue;
            const double rel = std::abs(raw.objective - reduced.objective) /
                               std::max(1.0, std::abs(raw.objective));
            if (rel > 1e-6)
                return "seed " + std::to_string(seed) + ": optima drift " + fmt(rel);
        }
        return {};
    });

    // Claims 7 and 8 share one pipeline run on the bundled instance.
    const std::string data_dir = env_path("CHARGEOPT_DATA");
    std::optional<Instance> bundled;
    std::optional<SolutionSummary> robust_solution;

    gate.check(7, "robust beats nonrobust out of sample with misspecified in between, "
                  "full pipeline under 10 minutes",
               [&]() -> std::string {
        if (data_dir.empty()) return "CHARGEOPT_DATA is not set";
        const auto t0 = Clock::now();
        const Instance inst = load_instance(data_dir + "/surabaya_synthetic.json");
        const ReliabilityEstimates est =
            estimate_reliabilities(inst, 10000, 7, EstimatorMethod::CV, kDefaultRho);

        std::vector<Variant> variants(4);
        variants[0].kind = Variant::Kind::Robust;
        variants[1].kind = Variant::Kind::NonRobust;
        variants[2].kind = Variant::Kind::Misspecified;
        variants[2].factor = 0.95;
        variants[3].kind = Variant::Kind::Misspecified;
        variants[3].factor = 1.05;

        std::vector<EvaluationReport> reports;
        for (const Variant& variant : variants) {
            const MipProblem prob = build_model(inst, est, variant, {true, true});
            const PresolveResult pre = presolve(prob, inst);
            if (pre.infeasible)
                return variant_label(variant) + " presolved to infeasible: " + pre.reason;
            BnBConfig cfg;
            cfg.collect_log = false;
            const MipResult res = solve_mip(pre.problem, cfg);
            if (res.status != MipStatus::Optimal)
                return variant_label(variant) + " ended " + mip_status_name(res.status);
            const SolutionSummary sol =
                extract_solution(prob, res.values, &pre.map, res.objective);
            if (variant.kind == Variant::Kind::Robust) robust_solution = sol;
            reports.push_back(
                evaluate_solution(inst, sol, 10000, 1001, EstimatorMethod::CV));
        }
        bundled = inst;

        const EvaluationReport& rob = reports[0];
        const EvaluationReport& non = reports[1];
        auto combined = [](const EvaluationReport& a, const EvaluationReport& b) {
            return std::hypot(a.se_objective, b.se_objective);
        };
        const double edge =
            (rob.mean_objective - non.mean_objective) / combined(rob, non);
        if (!(edge > 2.0))
            return "robust leads nonrobust by only " + fmt(edge) + " combined SEs";
        for (std::size_t q = 2; q < 4; ++q) {
            const EvaluationReport& mis = reports[q];
            if (!(mis.mean_objective >= non.mean_objective - 2.0 * combined(mis, non)))
                return mis.variant + " fell below nonrobust";
            if (!(mis.mean_objective <= rob.mean_objective + 2.0 * combined(mis, rob)))
                return mis.variant + " exceeded robust";
        }

        const std::string golden = data_dir + "/golden/comparison.csv";
        if (!std::filesystem::exists(golden)) return "golden comparison.csv is missing";
        if (read_text_file(golden).rfind("variant,method,", 0) != 0)
            return "golden comparison.csv has an unexpected header";

        const double elapsed = seconds_since(t0);
        if (elapsed >= 600.0) return "pipeline took " + fmt(elapsed) + " s";
        std::printf("       criterion 7: robust %s, nonrobust %s (lead %.1f combined SEs), "
                    "mis-0.95 %s, mis-1.05 %s, %.0f s\n",
                    fmt(rob.mean_objective).c_str(), fmt(non.mean_objective).c_str(), edge,
                    fmt(reports[2].mean_objective).c_str(),
                    fmt(reports[3].mean_objective).c_str(), elapsed);
        return {};
    });

    gate.check(8, "scenario objectives equal their revenue/penalty/cost decomposition exactly",
               [&]() -> std::string {
        if (!bundled || !robust_solution) return "pipeline results unavailable";
        const Instance& inst = *bundled;
        const SolutionSummary& sol = *robust_solution;
        const PairedScenarioSet set = sample_paired_scenarios(inst, 1000, 1001, kDefaultRho);

        std::vector<double> rev_w(inst.num_stations(), 0.0), pen_w(inst.num_stations(), 0.0);
        double cost = 0.0;
        for (std::size_t j = 0; j < inst.num_stations(); ++j) {
            for (std::size_t i = 0; i < inst.num_nodes(); ++i)
                for (std::size_t k = 0; k < inst.num_vehicle_types(); ++k) {
                    const double v = static_cast<double>(sol.assignments[i][j][k]);
                    rev_w[j] += inst.params.price_rate *
                                inst.vehicle_types[k].energy_per_charge * v;
                    pen_w[j] += inst.params.penalty_rate * inst.travel_time[i][j] * v;
                }
            auto it = sol.connectors.find(inst.stations[j].id);
            if (it != sol.connectors.end()) cost += inst.params.connector_cost * it->second;
            if (std::binary_search(sol.open_stations.begin(), sol.open_stations.end(),
                                   inst.stations[j].id))
                cost += inst.stations[j].daily_cost;
        }

        const ScenarioScores scores = score_scenarios(set, rev_w, pen_w, {}, {}, cost, true);
        for (std::size_t l = 0; l < set.n; ++l) {
            std::vector<std::uint8_t> ind(inst.num_stations());
            for (std::size_t j = 0; j < inst.num_stations(); ++j)
                ind[j] = set.stations[j].z_indicators[l];
            const ObjectiveBreakdown bd = decompose_objective(inst, sol, ind);
            if (bd.objective() != scores.objective[l] || bd.revenue != scores.revenue[l] ||
                bd.penalty != scores.penalty[l])
                return "scenario " + std::to_string(l + 1) + " drifts by " +
                       fmt(bd.objective() - scores.objective[l]);
        }
        return {};
    });

    gate.check(9, "two CLI experiment runs from one manifest are byte-identical",
               [&]() -> std::string {
        const std::string bin = env_path("CHARGEOPT_BIN");
        if (bin.empty()) return "CHARGEOPT_BIN is not set";
        if (data_dir.empty()) return "CHARGEOPT_DATA is not set";
        std::filesystem::remove_all("acceptance-ci-1");
        std::filesystem::remove_all("acceptance-ci-2");

        const std::string first = "\"" + bin + "\" experiment --config \"" + data_dir +
                                  "/experiment_ci.toml\" -o acceptance-ci-1 "
                                  "> acceptance-ci-1.log 2>&1";
        if (std::system(first.c_str()) != 0)
            return "first run failed, see acceptance-ci-1.log";
        const std::string second = "\"" + bin +
                                   "\" experiment --from-manifest "
                                   "acceptance-ci-1/manifest.json -o acceptance-ci-2 "
                                   "> acceptance-ci-2.log 2>&1";
        if (std::system(second.c_str()) != 0)
            return "second run failed, see acceptance-ci-2.log";

        const std::string m1 = read_text_file("acceptance-ci-1/manifest.json");
        const std::string m2 = read_text_file("acceptance-ci-2/manifest.json");
        if (m1 != m2) return "manifests differ";
        const auto artifacts = nlohmann::json::parse(m1).at("artifacts");
        if (artifacts.empty()) return "manifest lists no artifacts";
        for (const auto& [rel, checksum] : artifacts.items()) {
            const std::string c1 = read_text_file("acceptance-ci-1/" + rel);
            const std::string c2 = read_text_file("acceptance-ci-2/" + rel);
            if (c1 != c2) return "artifact " + rel + " differs between runs";
            if (fnv1a64_hex(c1) != checksum.get<std::string>())
                return "artifact " + rel + " does not match its recorded checksum";
        }
        return {};
    });

    std::printf("%d of 9 criteria passed\n", 9 - gate.failures);
    return gate.failures == 0 ? 0 : 1;
}

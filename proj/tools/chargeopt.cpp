#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chargeopt/errors.hpp"
#include "chargeopt/evaluation.hpp"
#include "chargeopt/experiment.hpp"
#include "chargeopt/instance.hpp"
#include "chargeopt/mip.hpp"
#include "chargeopt/model.hpp"
#include "chargeopt/mps.hpp"
#include "chargeopt/reliability.hpp"
#include "chargeopt/util.hpp"

namespace {

using namespace chargeopt;

// 0 success, 1 internal, 2 config/validation, 3 infeasible model.
template <typename F>
int guarded(F&& body) {
    try {
        body();
        return 0;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const FileError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}

std::vector<std::size_t> parse_sweep(const std::string& spec) {
    std::vector<std::size_t> sweep;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string part =
            spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        pos = comma == std::string::npos ? spec.size() + 1 : comma + 1;
        if (part.empty()) continue;
        std::size_t used = 0;
        long long n = 0;
        try {
            n = std::stoll(part, &used);
        } catch (const std::exception&) {
            throw ConfigError("bad sweep entry '" + part + "'");
        }
        if (used != part.size() || n < 1) throw ConfigError("bad sweep entry '" + part + "'");
        sweep.push_back(static_cast<std::size_t>(n));
    }
    if (sweep.empty()) throw ConfigError("sweep must be nonempty");
    return sweep;
}

struct GenArgs {
    std::uint64_t seed = 42;
    int nodes = 31;
    double utilization = 0.6;
    double box_size = 40.0;
    double speed = 1.0;
    std::string output = "instance.json";
};

int cmd_gen_instance(const GenArgs& a) {
    return guarded([&] {
        GeneratorConfig config;
        config.node_count = a.nodes;
        config.utilization_target = a.utilization;
        config.box_size = a.box_size;
        config.speed = a.speed;
        const Instance inst =
            generate_synthetic_demand(embedded_surabaya_parameters(), config, a.seed);
        const ValidationReport report = validate_instance(inst);
        if (!report.ok()) {
            std::string msg = "generated instance failed validation";
            for (const auto& issue : report.violations)
                msg += "\n  " + issue.field + ": " + issue.message;
            if (report.capacity_exceeded) msg += "\n  capacity: demand exceeds full buildout";
            throw ValidationError(msg);
        }
        save_instance(inst, a.output);
        std::printf("wrote %s (checksum %s)\n", a.output.c_str(),
                    instance_checksum(inst).c_str());
    });
}

struct EstimateArgs {
    std::string instance;
    std::int64_t n = 0; // 0: run the sweep
    std::string sweep = "10,100,1000,10000";
    std::uint64_t seed = 7;
    std::string method = "cv";
    double rho = kDefaultRho;
    std::string output = "estimates.json";
    std::string trace = "estimates.csv";
};

int cmd_estimate(const EstimateArgs& a) {
    return guarded([&] {
        const Instance inst = load_instance(a.instance);
        std::string csv = "station,n,method,p_hat,se\n";
        auto append_rows = [&csv](const ReliabilityEstimates& est, std::size_t n,
                                  EstimatorMethod method) {
            for (const auto& s : est.stations) {
                csv += std::to_string(s.station_id);
                csv += ',' + std::to_string(n);
                csv += ',' + method_name(method);
                csv += ',' + format_double(s.p_hat, 17);
                csv += ',' + format_double(s.std_err, 17);
                csv += '\n';
            }
        };

        if (a.n > 0) {
            const EstimatorMethod method = method_from_name(a.method);
            const ReliabilityEstimates est = estimate_reliabilities(
                inst, static_cast<std::size_t>(a.n), a.seed, method, a.rho);
            append_rows(est, static_cast<std::size_t>(a.n), method);
            save_estimates(est, a.output);
        } else {
            ReliabilityEstimates last;
            std::size_t last_n = 0;
            for (std::size_t n : parse_sweep(a.sweep)) {
                for (EstimatorMethod method : {EstimatorMethod::MC, EstimatorMethod::CV}) {
                    const ReliabilityEstimates est =
                        estimate_reliabilities(inst, n, a.seed, method, a.rho);
                    append_rows(est, n, method);
                    if (method == EstimatorMethod::CV && n >= last_n) {
                        last = est;
                        last_n = n;
                    }
                }
            }
            save_estimates(last, a.output);
        }
        write_text_file_atomic(a.trace, csv);
        std::printf("wrote %s and %s\n", a.output.c_str(), a.trace.c_str());
    });
}

struct SolveArgs {
    std::string instance;
    std::string estimates; // empty: estimate in-process
    std::int64_t n = 10000;
    std::uint64_t seed = 7;
    std::string method = "cv";
    double rho = kDefaultRho;
    std::string variant = "robust";
    double factor = 0.95;
    bool loose_big_m = false;
    bool no_fix_y = false;
    std::int64_t node_limit = -1;
    double rel_gap = BnBConfig{}.rel_gap_tol;
    std::string output = "solution.json";
    std::string log_path;
    std::string mps_path;
};

int cmd_solve(const SolveArgs& a) {
    return guarded([&] {
        const Instance inst = load_instance(a.instance);
        ReliabilityEstimates est;
        if (!a.estimates.empty()) {
            est = load_estimates(a.estimates);
        } else {
            est = estimate_reliabilities(inst, static_cast<std::size_t>(a.n), a.seed,
                                         method_from_name(a.method), a.rho);
        }

        Variant variant = variant_from_label(a.variant);
        if (variant.kind == Variant::Kind::Misspecified && a.variant.find(':') == std::string::npos &&
            a.variant.find('-') == std::string::npos)
            variant.factor = a.factor;

        BuildOptions build;
        build.tight_big_m = !a.loose_big_m;
        build.fix_y_to_x = !a.no_fix_y;
        const MipProblem prob = build_model(inst, est, variant, build);
        if (!a.mps_path.empty()) save_mps(prob, a.mps_path);

        const PresolveResult pre = presolve(prob, inst);
        if (pre.infeasible) throw InfeasibleError(pre.reason);

        BnBConfig cfg;
        cfg.node_limit = a.node_limit;
        cfg.rel_gap_tol = a.rel_gap;
        const MipResult res = solve_mip(pre.problem, cfg);
        if (res.status == MipStatus::Infeasible)
            throw InfeasibleError("variant " + variant_label(variant) + " is infeasible");
        if (res.values.empty()) throw DomainError("node limit hit before any incumbent");

        SolutionArtifact artifact;
        artifact.summary = extract_solution(prob, res.values, &pre.map, res.objective);
        artifact.instance_checksum = instance_checksum(inst);
        artifact.status = mip_status_name(res.status);
        artifact.best_bound = res.best_bound;
        artifact.nodes = res.nodes;
        artifact.train_seed = est.seed;
        save_solution(artifact, a.output);
        if (!a.log_path.empty())
            write_text_file_atomic(a.log_path, "node, depth, bound, incumbent, gap\n" + res.log);

        std::printf("%s: %s objective %s (bound %s, %lld nodes)\n",
                    variant_label(variant).c_str(), artifact.status.c_str(),
                    format_double(artifact.summary.model_objective).c_str(),
                    format_double(res.best_bound).c_str(),
                    static_cast<long long>(res.nodes));
    });
}

struct EvaluateArgs {
    std::string instance;
    std::string solution;
    std::int64_t n_eval = 10000;
    std::uint64_t seed = 1001;
    std::string method = "both";
    double rho = kDefaultRho;
    std::string output = "report.json";
    std::string csv_path;
};

int cmd_evaluate(const EvaluateArgs& a) {
    return guarded([&] {
        const Instance inst = load_instance(a.instance);
        const SolutionArtifact artifact = load_solution(a.solution);
        if (artifact.instance_checksum != instance_checksum(inst))
            throw ValidationError("solution was computed on a different instance (checksum " +
                                  artifact.instance_checksum + " vs " + instance_checksum(inst) +
                                  ")");
        if (artifact.train_seed == a.seed)
            std::fprintf(stderr,
                         "warning: evaluation seed %llu equals the training seed; scores are "
                         "in-sample\n",
                         static_cast<unsigned long long>(a.seed));

        std::vector<EstimatorMethod> methods;
        if (a.method == "both")
            methods = {EstimatorMethod::MC, EstimatorMethod::CV};
        else
            methods = {method_from_name(a.method)};

        std::string csv = report_csv_header();
        for (EstimatorMethod method : methods) {
            const EvaluationReport report = evaluate_solution(inst, artifact.summary, a.n_eval,
                                                              a.seed, method, a.rho);
            csv += report_csv_row(report);
            std::string path = a.output;
            if (methods.size() > 1) {
                const std::string suffix = method == EstimatorMethod::MC ? "-mc" : "-cv";
                const std::size_t dot = path.rfind('.');
                path = dot == std::string::npos ? path + suffix
                                                : path.substr(0, dot) + suffix + path.substr(dot);
            }
            save_report(report, path);
            std::printf("%s %s: mean objective %s (se %s)\n", report.variant.c_str(),
                        method_name(method).c_str(), format_double(report.mean_objective).c_str(),
                        format_double(report.se_objective).c_str());
        }
        if (!a.csv_path.empty()) write_text_file_atomic(a.csv_path, csv);
    });
}

struct ExperimentArgs {
    std::string config;
    std::string manifest;
    std::string output;
};

int cmd_experiment(const ExperimentArgs& a) {
    return guarded([&] {
        if (a.config.empty() == a.manifest.empty())
            throw ConfigError("give exactly one of --config or --from-manifest");
        const std::string config_text = a.config.empty()
                                            ? config_text_from_manifest(read_text_file(a.manifest))
                                            : read_text_file(a.config);
        ExperimentConfig config = config_from_text(config_text);
        if (!a.output.empty()) config.output_dir = a.output;
        const ExperimentArtifacts artifacts = run_experiment(config, config_text);
        std::printf("experiment complete: %zu artifacts under %s\n",
                    artifacts.checksums.size(), artifacts.output_dir.c_str());
        for (const auto& [path, checksum] : artifacts.checksums)
            std::printf("  %-28s %s\n", path.c_str(), checksum.c_str());
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging station siting under electricity disruptions"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand(
        "gen-instance", "Generate a synthetic instance around the published parameters");
    gen_cmd->add_option("--seed", gen.seed, "placement/demand seed");
    gen_cmd->add_option("--nodes", gen.nodes, "demand node count");
    gen_cmd->add_option("--utilization", gen.utilization, "target fraction of full capacity");
    gen_cmd->add_option("--box-size", gen.box_size, "square side for coordinates");
    gen_cmd->add_option("--speed", gen.speed, "minutes per unit distance");
    gen_cmd->add_option("-o,--output", gen.output, "instance file to write");

    EstimateArgs est;
    CLI::App* est_cmd =
        app.add_subcommand("estimate", "Estimate station reliabilities by simulation");
    est_cmd->add_option("-i,--instance", est.instance, "instance file")->required();
    est_cmd->add_option("--n", est.n, "sample count (omit to run the sweep)");
    est_cmd->add_option("--sweep", est.sweep, "comma-separated sweep sizes");
    est_cmd->add_option("--seed", est.seed, "scenario seed");
    est_cmd->add_option("--method", est.method, "mc, cv, or analytic");
    est_cmd->add_option("--rho", est.rho, "latent correlation of the control pair");
    est_cmd->add_option("-o,--output", est.output, "estimates JSON to write");
    est_cmd->add_option("--trace", est.trace, "per-n CSV trace to write");

    SolveArgs solve;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Build and exactly solve one model variant");
    solve_cmd->add_option("-i,--instance", solve.instance, "instance file")->required();
    solve_cmd->add_option("--estimates", solve.estimates, "reliability estimates JSON");
    solve_cmd->add_option("--n", solve.n, "sample count when estimating in-process");
    solve_cmd->add_option("--seed", solve.seed, "training scenario seed");
    solve_cmd->add_option("--method", solve.method, "estimator when estimating in-process");
    solve_cmd->add_option("--rho", solve.rho, "latent correlation");
    solve_cmd->add_option("--variant", solve.variant,
                          "robust, nonrobust, or misspecified[:factor]");
    solve_cmd->add_option("--factor", solve.factor, "misspecification factor");
    solve_cmd->add_flag("--loose-big-m", solve.loose_big_m, "use the published big-M constant");
    solve_cmd->add_flag("--no-fix-y", solve.no_fix_y, "keep y columns out of presolve");
    solve_cmd->add_option("--node-limit", solve.node_limit, "branch-and-bound node limit");
    solve_cmd->add_option("--rel-gap", solve.rel_gap, "relative optimality gap to accept");
    solve_cmd->add_option("-o,--output", solve.output, "solution JSON to write");
    solve_cmd->add_option("--log", solve.log_path, "solve log to write");
    solve_cmd->add_option("--mps", solve.mps_path, "export the built model as MPS");

    EvaluateArgs eval;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "Score a saved solution on fresh scenarios");
    eval_cmd->add_option("-i,--instance", eval.instance, "instance file")->required();
    eval_cmd->add_option("-s,--solution", eval.solution, "solution JSON")->required();
    eval_cmd->add_option("--n-eval", eval.n_eval, "evaluation scenario count");
    eval_cmd->add_option("--seed", eval.seed, "evaluation seed");
    eval_cmd->add_option("--method", eval.method, "mc, cv, or both");
    eval_cmd->add_option("--rho", eval.rho, "latent correlation");
    eval_cmd->add_option("-o,--output", eval.output, "report JSON to write");
    eval_cmd->add_option("--csv", eval.csv_path, "report CSV to write");

    ExperimentArgs exp;
    CLI::App* exp_cmd =
        app.add_subcommand("experiment", "Run the full pipeline from a declarative config");
    exp_cmd->add_option("--config", exp.config, "experiment config file");
    exp_cmd->add_option("--from-manifest", exp.manifest, "re-run from a saved manifest");
    exp_cmd->add_option("-o,--output", exp.output, "override the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (gen_cmd->parsed()) return cmd_gen_instance(gen);
    if (est_cmd->parsed()) return cmd_estimate(est);
    if (solve_cmd->parsed()) return cmd_solve(solve);
    if (eval_cmd->parsed()) return cmd_evaluate(eval);
    if (exp_cmd->parsed()) return cmd_experiment(exp);
    return 1;
}

#include "chargeopt/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "chargeopt/errors.hpp"
#include "chargeopt/normal.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

using nlohmann::json;

namespace {

void infeasible(const std::string& detail) {
    throw DomainError("infeasible-solution: " + detail);
}

// The solution tables are only meaningful against the instance they were
// extracted from; index layouts must agree exactly.
void check_dimensions(const Instance& inst, const SolutionSummary& sol) {
    auto ids_match = [](const auto& published, const std::vector<int>& recorded, auto id_of) {
        if (published.size() != recorded.size()) return false;
        for (std::size_t i = 0; i < published.size(); ++i)
            if (id_of(published[i]) != recorded[i]) return false;
        return true;
    };
    if (!ids_match(inst.stations, sol.station_ids, [](const Station& s) { return s.id; }))
        infeasible("station ids do not match the instance");
    if (!ids_match(inst.demand_nodes, sol.node_ids, [](const DemandNode& d) { return d.id; }))
        infeasible("demand node ids do not match the instance");
    if (!ids_match(inst.vehicle_types, sol.type_ids, [](const VehicleType& t) { return t.id; }))
        infeasible("vehicle type ids do not match the instance");

    const std::size_t I = inst.num_nodes(), J = inst.num_stations(), K = inst.num_vehicle_types();
    if (sol.assignment_flags.size() != I || sol.assignments.size() != I)
        infeasible("assignment tables have the wrong node dimension");
    for (std::size_t i = 0; i < I; ++i) {
        if (sol.assignment_flags[i].size() != J || sol.assignments[i].size() != J)
            infeasible("assignment tables have the wrong station dimension");
        for (std::size_t j = 0; j < J; ++j)
            if (sol.assignments[i][j].size() != K)
                infeasible("assignment tables have the wrong vehicle-type dimension");
    }
}

int connectors_of(const SolutionSummary& sol, int station_id) {
    auto it = sol.connectors.find(station_id);
    return it == sol.connectors.end() ? 0 : it->second;
}

void check_physical_feasibility(const Instance& inst, const SolutionSummary& sol) {
    check_dimensions(inst, sol);
    const std::size_t I = inst.num_nodes(), J = inst.num_stations(), K = inst.num_vehicle_types();
    const GlobalParams& par = inst.params;

    if (static_cast<int>(sol.open_stations.size()) > par.max_stations)
        infeasible("more stations open than the budget allows");
    for (const auto& [id, count] : sol.connectors) {
        const auto* st = [&]() -> const Station* {
            for (const auto& s : inst.stations)
                if (s.id == id) return &s;
            return nullptr;
        }();
        if (st == nullptr) infeasible("connectors listed for unknown station " + std::to_string(id));
        if (count < 0 || count > st->max_connectors)
            infeasible("connector count out of range at station " + std::to_string(id));
        if (count > 0 && !std::binary_search(sol.open_stations.begin(), sol.open_stations.end(), id))
            infeasible("connectors installed at closed station " + std::to_string(id));
    }

    for (std::size_t i = 0; i < I; ++i) {
        bool covered = false;
        for (std::size_t j = 0; j < J; ++j) {
            const bool assigned = sol.assignment_flags[i][j] != 0;
            covered = covered || assigned;
            std::int64_t vehicles = 0;
            for (std::size_t k = 0; k < K; ++k) {
                const std::int64_t v = sol.assignments[i][j][k];
                if (v < 0)
                    infeasible("negative vehicle count at node " + std::to_string(sol.node_ids[i]));
                vehicles += v;
            }
            if (vehicles > 0 && !assigned)
                infeasible("vehicles routed over an unassigned pair (node " +
                           std::to_string(sol.node_ids[i]) + ", station " +
                           std::to_string(sol.station_ids[j]) + ")");
            if (assigned) {
                if (inst.travel_time[i][j] > par.max_travel_time)
                    infeasible("assignment beyond max travel time (node " +
                               std::to_string(sol.node_ids[i]) + ", station " +
                               std::to_string(sol.station_ids[j]) + ")");
                if (!sol.is_open(j))
                    infeasible("assignment to closed station " +
                               std::to_string(sol.station_ids[j]));
            }
        }
        if (!covered)
            infeasible("node " + std::to_string(sol.node_ids[i]) + " has no assigned station");
        for (std::size_t k = 0; k < K; ++k) {
            std::int64_t served = 0;
            for (std::size_t j = 0; j < J; ++j) served += sol.assignments[i][j][k];
            if (served != inst.demand_of(i, k))
                infeasible("demand not met exactly at node " + std::to_string(sol.node_ids[i]) +
                           " for vehicle type " + std::to_string(sol.type_ids[k]));
        }
    }

    for (std::size_t j = 0; j < J; ++j) {
        KahanSum minutes;
        for (std::size_t i = 0; i < I; ++i)
            for (std::size_t k = 0; k < K; ++k)
                minutes.add(inst.vehicle_types[k].charge_time *
                            static_cast<double>(sol.assignments[i][j][k]));
        const double available = inst.stations[j].connector_throughput *
                                 connectors_of(sol, sol.station_ids[j]);
        if (minutes.value() > available + 1e-6)
            infeasible("capacity exceeded at station " + std::to_string(sol.station_ids[j]));
    }
}

struct StationWeights {
    std::vector<double> revenue; // j -> r * sum_k e_k * v, earned when operating
    std::vector<double> penalty; // j -> s * sum_k d_ij * v, paid when down
    double cost = 0.0;
};

StationWeights station_weights(const Instance& inst, const SolutionSummary& sol) {
    const std::size_t I = inst.num_nodes(), J = inst.num_stations(), K = inst.num_vehicle_types();
    const GlobalParams& par = inst.params;
    StationWeights w;
    w.revenue.assign(J, 0.0);
    w.penalty.assign(J, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        KahanSum rev, pen;
        for (std::size_t i = 0; i < I; ++i)
            for (std::size_t k = 0; k < K; ++k) {
                const double v = static_cast<double>(sol.assignments[i][j][k]);
                if (v == 0.0) continue;
                rev.add(par.price_rate * inst.vehicle_types[k].energy_per_charge * v);
                pen.add(par.penalty_rate * inst.travel_time[i][j] * v);
            }
        w.revenue[j] = rev.value();
        w.penalty[j] = pen.value();
    }
    KahanSum cost;
    for (std::size_t j = 0; j < J; ++j) {
        cost.add(par.connector_cost * connectors_of(sol, sol.station_ids[j]));
        if (sol.is_open(j)) cost.add(inst.stations[j].daily_cost);
    }
    w.cost = cost.value();
    return w;
}

} // namespace

ScenarioScores score_scenarios(const PairedScenarioSet& set,
                               std::span<const double> revenue_weight,
                               std::span<const double> penalty_weight,
                               std::span<const double> cv_pi, std::span<const double> cv_phi,
                               double fixed_cost, bool parallel) {
    const std::size_t J = set.stations.size();
    if (revenue_weight.size() != J || penalty_weight.size() != J)
        throw DomainError("weight vectors must align with the scenario set");
    const bool cv = !cv_pi.empty();
    if (cv && (cv_pi.size() != J || cv_phi.size() != J))
        throw DomainError("control-variate vectors must align with the scenario set");

    const std::int64_t n = static_cast<std::int64_t>(set.n);
    ScenarioScores out;
    out.revenue.resize(set.n);
    out.penalty.resize(set.n);
    out.objective.resize(set.n);

    // Same compensated reduction as decompose_objective, so a 0/1 indicator
    // scenario scores bit-identically to its revenue/penalty decomposition.
    auto score_one = [&](std::int64_t l) {
        KahanSum rev, pen;
        for (std::size_t j = 0; j < J; ++j) {
            const StationScenarios& st = set.stations[j];
            double t = st.z_indicators[l];
            if (cv) t += cv_pi[j] * (st.x_indicators[l] - cv_phi[j]);
            rev.add(revenue_weight[j] * t);
            pen.add(penalty_weight[j] * (1.0 - t));
        }
        out.revenue[l] = rev.value();
        out.penalty[l] = pen.value();
        out.objective[l] = out.revenue[l] - out.penalty[l] - fixed_cost;
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t l = 0; l < n; ++l) score_one(l);
    } else {
        for (std::int64_t l = 0; l < n; ++l) score_one(l);
    }
    return out;
}

EvaluationReport evaluate_with_scenarios(const Instance& inst, const SolutionSummary& sol,
                                         const PairedScenarioSet& set, EstimatorMethod method) {
    if (method != EstimatorMethod::MC && method != EstimatorMethod::CV)
        throw DomainError("evaluation supports the MC and CV methods only");
    if (set.n == 0) throw DomainError("evaluation needs at least one scenario");
    check_physical_feasibility(inst, sol);

    // Weights follow the scenario set's station order.
    const StationWeights w = station_weights(inst, sol);
    std::vector<double> rev_w(set.stations.size()), pen_w(set.stations.size());
    std::vector<double> pi, phi;
    for (std::size_t q = 0; q < set.stations.size(); ++q) {
        const int id = set.stations[q].station_id;
        std::size_t j = 0;
        while (j < inst.num_stations() && inst.stations[j].id != id) ++j;
        if (j == inst.num_stations())
            throw DomainError("scenario set covers unknown station " + std::to_string(id));
        rev_w[q] = w.revenue[j];
        pen_w[q] = w.penalty[j];
    }
    if (method == EstimatorMethod::CV) {
        pi.resize(set.stations.size());
        phi.resize(set.stations.size());
        for (std::size_t q = 0; q < set.stations.size(); ++q) {
            const StationScenarios& st = set.stations[q];
            pi[q] = optimal_cv_coefficient(st.z_indicators, st.x_indicators);
            phi[q] = standard_normal_cdf(st.scaled_threshold);
        }
    }

    const ScenarioScores scores = score_scenarios(set, rev_w, pen_w, pi, phi, w.cost, true);
    const MeanStdErr rev = mean_and_se(scores.revenue);
    const MeanStdErr pen = mean_and_se(scores.penalty);
    const MeanStdErr obj = mean_and_se(scores.objective);

    EvaluationReport report;
    report.variant = variant_label(sol.variant);
    report.method = method;
    report.n_eval = static_cast<std::int64_t>(set.n);
    report.eval_seed = set.seed;
    report.rho = set.latent_correlation;
    report.instance_checksum = instance_checksum(inst);
    report.mean_revenue = rev.mean;
    report.se_revenue = rev.std_err;
    report.mean_penalty = pen.mean;
    report.se_penalty = pen.std_err;
    report.fixed_cost = w.cost;
    // The identity mean_obj = mean_rev - mean_pen - cost holds per scenario;
    // compose the reported mean the same way so it holds exactly in print.
    report.mean_objective = rev.mean - pen.mean - w.cost;
    report.se_objective = obj.std_err;
    for (const auto& st : set.stations) {
        std::int64_t up = 0;
        for (std::uint8_t b : st.z_indicators) up += b;
        report.disruption_frequency.push_back(
            {st.station_id,
             static_cast<double>(set.n - static_cast<std::size_t>(up)) / static_cast<double>(set.n)});
    }
    report.open_count = static_cast<int>(sol.open_stations.size());
    for (const auto& [id, count] : sol.connectors) report.connector_total += count;
    return report;
}

EvaluationReport evaluate_solution(const Instance& inst, const SolutionSummary& sol,
                                   std::int64_t n_eval, std::uint64_t eval_seed,
                                   EstimatorMethod method, double rho) {
    if (n_eval < 1) throw DomainError("n_eval must be at least 1");
    const PairedScenarioSet set =
        sample_paired_scenarios(inst, static_cast<std::size_t>(n_eval), eval_seed, rho);
    return evaluate_with_scenarios(inst, sol, set, method);
}

ObjectiveBreakdown decompose_objective(const Instance& inst, const SolutionSummary& sol,
                                       std::span<const std::uint8_t> indicators) {
    if (indicators.size() != inst.num_stations())
        throw DomainError("indicator vector must cover every station");
    check_physical_feasibility(inst, sol);
    const StationWeights w = station_weights(inst, sol);
    KahanSum rev, pen;
    for (std::size_t j = 0; j < inst.num_stations(); ++j) {
        if (indicators[j])
            rev.add(w.revenue[j]);
        else
            pen.add(w.penalty[j]);
    }
    return {rev.value(), pen.value(), w.cost};
}

CoverageStats coverage_statistics(const Instance& inst, const SolutionSummary& sol) {
    CoverageStats stats;
    std::size_t redundant = 0;
    for (std::size_t i = 0; i < inst.num_nodes(); ++i) {
        int count = 0;
        for (std::size_t j = 0; j < inst.num_stations(); ++j) {
            const bool open = std::binary_search(sol.open_stations.begin(),
                                                 sol.open_stations.end(), inst.stations[j].id);
            if (open && inst.travel_time[i][j] <= inst.params.max_travel_time) ++count;
        }
        stats.open_eligible_of_node.push_back({inst.demand_nodes[i].id, count});
        ++stats.redundancy_histogram[count];
        if (count >= 2) ++redundant;
    }
    if (!inst.demand_nodes.empty())
        stats.fraction_covered_twice =
            static_cast<double>(redundant) / static_cast<double>(inst.num_nodes());
    return stats;
}

ComparisonTable compare_models(const std::vector<EvaluationReport>& reports,
                               const std::string& baseline) {
    if (reports.empty()) throw DomainError("comparison needs at least one report");
    const EvaluationReport* base = nullptr;
    for (const auto& r : reports)
        if (r.variant == baseline) {
            base = &r;
            break;
        }
    if (base == nullptr)
        throw DomainError("baseline variant '" + baseline + "' is not among the reports");
    for (const auto& r : reports) {
        if (r.instance_checksum != base->instance_checksum || r.n_eval != base->n_eval ||
            r.eval_seed != base->eval_seed || r.rho != base->rho)
            throw DomainError("mismatched-evaluation-settings: report '" + r.variant +
                              "' was evaluated under different conditions than the baseline");
    }
    if (base->mean_objective == 0.0)
        throw DomainError("baseline mean objective is zero; relative differences undefined");

    ComparisonTable table;
    table.baseline = baseline;
    for (const auto& r : reports) {
        ComparisonRow row;
        row.variant = r.variant;
        row.method = r.method;
        row.n_eval = r.n_eval;
        row.mean_objective = r.mean_objective;
        row.se_objective = r.se_objective;
        row.relative_difference = &r == base ? 0.0
                                             : (r.mean_objective - base->mean_objective) /
                                                   std::abs(base->mean_objective);
        row.mean_revenue = r.mean_revenue;
        row.mean_penalty = r.mean_penalty;
        row.fixed_cost = r.fixed_cost;
        row.open_count = r.open_count;
        row.connector_total = r.connector_total;
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string report_to_json(const EvaluationReport& report) {
    json doc;
    doc["variant"] = report.variant;
    doc["method"] = method_name(report.method);
    doc["n_eval"] = report.n_eval;
    doc["seed"] = report.eval_seed;
    doc["rho"] = report.rho;
    doc["instance_checksum"] = report.instance_checksum;
    doc["mean_objective"] = report.mean_objective;
    doc["se_objective"] = report.se_objective;
    doc["mean_revenue"] = report.mean_revenue;
    doc["se_revenue"] = report.se_revenue;
    doc["mean_penalty"] = report.mean_penalty;
    doc["se_penalty"] = report.se_penalty;
    doc["fixed_cost"] = report.fixed_cost;
    doc["open_count"] = report.open_count;
    doc["connector_total"] = report.connector_total;
    doc["disruption_frequency"] = json::array();
    for (const auto& f : report.disruption_frequency)
        doc["disruption_frequency"].push_back(
            {{"id", f.station_id}, {"freq", f.disruption_frequency}});
    return doc.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FileError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("$", "top level must be an object");
    EvaluationReport report;
    for (const char* field : {"variant", "method", "n_eval", "seed", "mean_objective"})
        if (!doc.contains(field)) throw SchemaError(field, "missing field");
    report.variant = doc.at("variant").get<std::string>();
    report.method = method_from_name(doc.at("method").get<std::string>());
    report.n_eval = doc.at("n_eval").get<std::int64_t>();
    report.eval_seed = doc.at("seed").get<std::uint64_t>();
    report.rho = doc.value("rho", kDefaultRho);
    report.instance_checksum = doc.value("instance_checksum", std::string{});
    report.mean_objective = doc.at("mean_objective").get<double>();
    report.se_objective = doc.value("se_objective", 0.0);
    report.mean_revenue = doc.value("mean_revenue", 0.0);
    report.se_revenue = doc.value("se_revenue", 0.0);
    report.mean_penalty = doc.value("mean_penalty", 0.0);
    report.se_penalty = doc.value("se_penalty", 0.0);
    report.fixed_cost = doc.value("fixed_cost", 0.0);
    report.open_count = doc.value("open_count", 0);
    report.connector_total = doc.value("connector_total", std::int64_t{0});
    if (doc.contains("disruption_frequency"))
        for (const auto& row : doc.at("disruption_frequency"))
            report.disruption_frequency.push_back(
                {row.at("id").get<int>(), row.at("freq").get<double>()});
    return report;
}

void save_report(const EvaluationReport& report, const std::string& path) {
    write_text_file_atomic(path, report_to_json(report));
}

EvaluationReport load_report(const std::string& path) {
    return report_from_json(read_text_file(path));
}

std::string report_csv_header() { return "variant,n_eval,seed,mean_obj,se_obj,revenue,penalty,cost\n"; }

std::string report_csv_row(const EvaluationReport& r) {
    std::string row = r.variant;
    row += ',' + std::to_string(r.n_eval);
    row += ',' + std::to_string(r.eval_seed);
    row += ',' + format_double(r.mean_objective);
    row += ',' + format_double(r.se_objective);
    row += ',' + format_double(r.mean_revenue);
    row += ',' + format_double(r.mean_penalty);
    row += ',' + format_double(r.fixed_cost);
    row += '\n';
    return row;
}

std::string comparison_to_csv(const ComparisonTable& table) {
    std::string out =
        "variant,method,n_eval,mean_obj,se_obj,rel_diff,revenue,penalty,cost,open,connectors\n";
    for (const auto& r : table.rows) {
        out += r.variant;
        out += ',' + method_name(r.method);
        out += ',' + std::to_string(r.n_eval);
        out += ',' + format_double(r.mean_objective);
        out += ',' + format_double(r.se_objective);
        out += ',' + format_double(r.relative_difference);
        out += ',' + format_double(r.mean_revenue);
        out += ',' + format_double(r.mean_penalty);
        out += ',' + format_double(r.fixed_cost);
        out += ',' + std::to_string(r.open_count);
        out += ',' + std::to_string(r.connector_total);
        out += '\n';
    }
    return out;
}

} // namespace chargeopt

#include "chargeopt/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "chargeopt/errors.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

using nlohmann::json;

std::string variant_label(const Variant& v) {
    switch (v.kind) {
        case Variant::Kind::Robust: return "robust";
        case Variant::Kind::NonRobust: return "nonrobust";
        case Variant::Kind::Misspecified: return "misspecified-" + format_double(v.factor, 12);
    }
    throw DomainError("unknown variant kind");
}

Variant variant_from_label(const std::string& label) {
    Variant v;
    if (label == "robust") {
        v.kind = Variant::Kind::Robust;
        return v;
    }
    if (label == "nonrobust" || label == "non-robust") {
        v.kind = Variant::Kind::NonRobust;
        return v;
    }
    const std::string prefix = "misspecified";
    if (label.rfind(prefix, 0) == 0) {
        v.kind = Variant::Kind::Misspecified;
        if (label.size() > prefix.size()) {
            const char sep = label[prefix.size()];
            if (sep != '-' && sep != ':')
                throw ConfigError("unknown variant label: " + label);
            try {
                v.factor = std::stod(label.substr(prefix.size() + 1));
            } catch (...) {
                throw ConfigError("bad misspecification factor in: " + label);
            }
        }
        if (!(v.factor > 0)) throw ConfigError("misspecification factor must be > 0");
        return v;
    }
    throw ConfigError("unknown variant label: " + label);
}

LinearProgram MipProblem::relaxation() const {
    LinearProgram lp;
    for (const auto& var : variables) lp.add_variable(var.lower, var.upper, 0.0);
    lp.objective = objective;
    lp.objective_constant = objective_constant;
    for (const auto& con : constraints) lp.add_row(con.row, con.rel, con.rhs);
    return lp;
}

std::vector<double> effective_reliabilities(const Instance& inst,
                                            const ReliabilityEstimates& est,
                                            const Variant& variant) {
    std::vector<double> p(inst.num_stations(), 1.0);
    if (variant.kind == Variant::Kind::NonRobust) return p;
    for (std::size_t j = 0; j < inst.num_stations(); ++j) {
        const StationEstimate* e = est.find(inst.stations[j].id);
        if (e == nullptr)
            throw DomainError("missing reliability estimate for station " +
                              std::to_string(inst.stations[j].id));
        if (!(e->p_hat >= 0.0 && e->p_hat <= 1.0))
            throw DomainError("estimate for station " + std::to_string(inst.stations[j].id) +
                              " is outside [0,1]");
        p[j] = variant.kind == Variant::Kind::Misspecified ? variant.factor * e->p_hat
                                                           : e->p_hat;
    }
    return p;
}

MipProblem build_model(const Instance& inst, const ReliabilityEstimates& est,
                       const Variant& variant, const BuildOptions& options) {
    {
        const ValidationReport report = validate_instance(inst);
        if (!report.violations.empty())
            throw ValidationError("cannot build model from invalid instance: " +
                                  report.violations.front().field + ": " +
                                  report.violations.front().message);
    }
    if (variant.kind == Variant::Kind::Misspecified && !(variant.factor > 0))
        throw DomainError("misspecification factor must be > 0");

    const std::size_t I = inst.num_nodes();
    const std::size_t J = inst.num_stations();
    const std::size_t K = inst.num_vehicle_types();
    const GlobalParams& par = inst.params;
    // The objective prices revenue and penalties at the variant's belief; the
    // reliability rows keep the undistorted scenario means (all ones for
    // NonRobust, whose indicators are pinned to 1).
    const std::vector<double> p_obj = effective_reliabilities(inst, est, variant);
    const Variant honest{variant.kind == Variant::Kind::NonRobust ? Variant::Kind::NonRobust
                                                                  : Variant::Kind::Robust,
                         1.0};
    const std::vector<double> p_con = effective_reliabilities(inst, est, honest);
    const auto eligible = eligible_pairs(inst);

    MipProblem prob;
    prob.variant = variant;
    prob.options = options;
    auto& idx = prob.index;
    for (const auto& s : inst.stations) idx.station_ids.push_back(s.id);
    for (const auto& n : inst.demand_nodes) idx.node_ids.push_back(n.id);
    for (const auto& t : inst.vehicle_types) idx.type_ids.push_back(t.id);

    auto add_var = [&](const std::string& name, double lo, double up, VarKind kind,
                       double obj) {
        prob.variables.push_back({name, lo, up, kind});
        prob.objective.push_back(obj);
        return static_cast<int>(prob.variables.size()) - 1;
    };
    auto id_str = [](int id) { return std::to_string(id); };

    idx.x.resize(J);
    for (std::size_t j = 0; j < J; ++j)
        idx.x[j] = add_var("x[" + id_str(idx.station_ids[j]) + "]", 0, 1, VarKind::Binary,
                           -inst.stations[j].daily_cost);

    idx.y.assign(I, std::vector<int>(J, -1));
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < J; ++j) {
            // Travel eligibility fixes the assignment flag to zero; the
            // column stays so the unreduced problem matches the published
            // formulation size.
            const double up = eligible[i][j] ? 1.0 : 0.0;
            idx.y[i][j] = add_var(
                "y[" + id_str(idx.node_ids[i]) + "," + id_str(idx.station_ids[j]) + "]", 0, up,
                VarKind::Binary, 0.0);
        }

    idx.v.assign(I, std::vector<std::vector<int>>(J, std::vector<int>(K, -1)));
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < K; ++k) {
                const double w = static_cast<double>(inst.demand_of(i, k));
                const double revenue_rate =
                    par.price_rate * inst.vehicle_types[k].energy_per_charge * p_obj[j];
                const double penalty_rate =
                    par.penalty_rate * inst.travel_time[i][j] * (1.0 - p_obj[j]);
                idx.v[i][j][k] = add_var("v[" + id_str(idx.node_ids[i]) + "," +
                                             id_str(idx.station_ids[j]) + "," +
                                             id_str(idx.type_ids[k]) + "]",
                                         0, w, VarKind::Integer, revenue_rate - penalty_rate);
            }

    idx.u.resize(J);
    for (std::size_t j = 0; j < J; ++j)
        idx.u[j] = add_var("u[" + id_str(idx.station_ids[j]) + "]", 0,
                           inst.stations[j].max_connectors, VarKind::Integer,
                           -par.connector_cost);

    auto add_row = [&](std::string name, SparseRow row, Relation rel, double rhs) {
        prob.constraints.push_back({std::move(name), std::move(row), rel, rhs});
    };

    // Vehicles flow only over active assignments.
    for (std::size_t i = 0; i < I; ++i) {
        double total_demand = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            total_demand += static_cast<double>(inst.demand_of(i, k));
        const double big_m_ij = options.tight_big_m ? total_demand : par.big_m;
        for (std::size_t j = 0; j < J; ++j) {
            SparseRow row;
            for (std::size_t k = 0; k < K; ++k) row.add(idx.v[i][j][k], 1.0);
            row.add(idx.y[i][j], -big_m_ij);
            add_row("link_vy[" + id_str(idx.node_ids[i]) + "," + id_str(idx.station_ids[j]) + "]",
                    std::move(row), Relation::LessEqual, 0.0);
        }
    }

    // Every vehicle of every class gets charged somewhere.
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            SparseRow row;
            for (std::size_t j = 0; j < J; ++j) row.add(idx.v[i][j][k], 1.0);
            add_row("demand[" + id_str(idx.node_ids[i]) + "," + id_str(idx.type_ids[k]) + "]",
                    std::move(row), Relation::Equal,
                    static_cast<double>(inst.demand_of(i, k)));
        }

    // Charge minutes fit the installed connectors.
    for (std::size_t j = 0; j < J; ++j) {
        SparseRow row;
        for (std::size_t i = 0; i < I; ++i)
            for (std::size_t k = 0; k < K; ++k)
                row.add(idx.v[i][j][k], inst.vehicle_types[k].charge_time);
        row.add(idx.u[j], -inst.stations[j].connector_throughput);
        add_row("capacity[" + id_str(idx.station_ids[j]) + "]", std::move(row),
                Relation::LessEqual, 0.0);
    }

    // Connectors only at open stations, up to the site limit.
    for (std::size_t j = 0; j < J; ++j) {
        SparseRow row;
        row.add(idx.u[j], 1.0);
        row.add(idx.x[j], -static_cast<double>(inst.stations[j].max_connectors));
        add_row("connectors[" + id_str(idx.station_ids[j]) + "]", std::move(row),
                Relation::LessEqual, 0.0);
    }

    // Assignments only to open stations.
    const double big_m_j = options.tight_big_m ? static_cast<double>(I) : par.big_m;
    for (std::size_t j = 0; j < J; ++j) {
        SparseRow row;
        for (std::size_t i = 0; i < I; ++i) row.add(idx.y[i][j], 1.0);
        row.add(idx.x[j], -big_m_j);
        add_row("open_link[" + id_str(idx.station_ids[j]) + "]", std::move(row),
                Relation::LessEqual, 0.0);
    }

    // Every demand node sees at least one assigned station.
    for (std::size_t i = 0; i < I; ++i) {
        SparseRow row;
        for (std::size_t j = 0; j < J; ++j) row.add(idx.y[i][j], 1.0);
        add_row("cover[" + id_str(idx.node_ids[i]) + "]", std::move(row),
                Relation::GreaterEqual, 1.0);
    }

    {
        SparseRow row;
        for (std::size_t j = 0; j < J; ++j) row.add(idx.x[j], 1.0);
        add_row("station_budget", std::move(row), Relation::LessEqual,
                static_cast<double>(par.max_stations));
    }

    // Assigned reliability mass reaches the service level per node.
    for (std::size_t i = 0; i < I; ++i) {
        SparseRow row;
        for (std::size_t j = 0; j < J; ++j) row.add(idx.y[i][j], p_con[j]);
        add_row("service_level[" + id_str(idx.node_ids[i]) + "]", std::move(row),
                Relation::GreaterEqual, par.min_service_level);
    }

    // Vehicle-weighted reliability per class, homogeneous form: the demand
    // equality turns sum_j p_j v >= p_bar * sum_j v into this row.
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            SparseRow row;
            for (std::size_t j = 0; j < J; ++j)
                row.add(idx.v[i][j][k], p_con[j] - par.min_service_level);
            add_row("reliable_service[" + id_str(idx.node_ids[i]) + "," +
                        id_str(idx.type_ids[k]) + "]",
                    std::move(row), Relation::GreaterEqual, 0.0);
        }

    return prob;
}

PresolveResult presolve(const MipProblem& prob, const Instance& inst) {
    const std::size_t I = prob.index.num_nodes();
    const std::size_t J = prob.index.num_stations();
    const std::size_t K = prob.index.num_types();
    const auto eligible = eligible_pairs(inst);

    PresolveResult res;
    res.map.original_cols = prob.num_cols();

    for (std::size_t i = 0; i < I; ++i) {
        bool any = false;
        for (std::size_t j = 0; j < J; ++j) any = any || eligible[i][j];
        if (!any) {
            res.infeasible = true;
            res.reason = "demand node " + std::to_string(prob.index.node_ids[i]) +
                         " has no station within the travel limit";
            return res;
        }
    }

    enum class Action : std::uint8_t { Keep, Fix, Substitute };
    std::vector<Action> action(prob.num_cols(), Action::Keep);
    std::vector<double> fix_value(prob.num_cols(), 0.0);
    std::vector<int> subst_target(prob.num_cols(), -1);

    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < J; ++j) {
            if (!eligible[i][j]) {
                action[prob.index.y[i][j]] = Action::Fix;
                for (std::size_t k = 0; k < K; ++k) action[prob.index.v[i][j][k]] = Action::Fix;
            } else if (prob.options.fix_y_to_x) {
                action[prob.index.y[i][j]] = Action::Substitute;
                subst_target[prob.index.y[i][j]] = prob.index.x[j];
            }
        }

    res.map.reduced_of_original.assign(prob.num_cols(), -1);
    res.map.fixed_value.assign(prob.num_cols(), 0.0);
    res.map.substituted_to = subst_target;

    MipProblem& out = res.problem;
    out.variant = prob.variant;
    out.options = prob.options;
    out.index.station_ids = prob.index.station_ids;
    out.index.node_ids = prob.index.node_ids;
    out.index.type_ids = prob.index.type_ids;
    out.index.x.assign(J, -1);
    out.index.u.assign(J, -1);
    out.index.y.assign(I, std::vector<int>(J, -1));
    out.index.v.assign(I, std::vector<std::vector<int>>(J, std::vector<int>(K, -1)));

    for (int col = 0; col < prob.num_cols(); ++col) {
        if (action[col] != Action::Keep) continue;
        res.map.reduced_of_original[col] = static_cast<int>(out.variables.size());
        out.variables.push_back(prob.variables[col]);
        out.objective.push_back(prob.objective[col]);
    }
    out.objective_constant = prob.objective_constant;
    for (std::size_t j = 0; j < J; ++j) {
        out.index.x[j] = res.map.reduced_of_original[prob.index.x[j]];
        out.index.u[j] = res.map.reduced_of_original[prob.index.u[j]];
    }
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < J; ++j) {
            out.index.y[i][j] = res.map.reduced_of_original[prob.index.y[i][j]];
            for (std::size_t k = 0; k < K; ++k)
                out.index.v[i][j][k] = res.map.reduced_of_original[prob.index.v[i][j][k]];
        }

    // Rewrite rows: removed columns contribute their fixed value to the
    // right-hand side, substituted columns fold onto their target, and rows
    // left without support are either dropped or flagged unsatisfiable.
    std::vector<double> coef_of_reduced(out.variables.size(), 0.0);
    for (const auto& con : prob.constraints) {
        std::vector<int> touched;
        double rhs = con.rhs;
        for (std::size_t p = 0; p < con.row.size(); ++p) {
            const int col = con.row.cols[p];
            const double a = con.row.vals[p];
            int target = -1;
            switch (action[col]) {
                case Action::Keep: target = res.map.reduced_of_original[col]; break;
                case Action::Fix: rhs -= a * fix_value[col]; break;
                case Action::Substitute:
                    target = res.map.reduced_of_original[subst_target[col]];
                    break;
            }
            if (target < 0) continue;
            if (coef_of_reduced[target] == 0.0) touched.push_back(target);
            coef_of_reduced[target] += a;
        }
        std::sort(touched.begin(), touched.end());
        SparseRow row;
        for (int t : touched) {
            if (coef_of_reduced[t] != 0.0) row.add(t, coef_of_reduced[t]);
            coef_of_reduced[t] = 0.0;
        }
        if (row.size() == 0) {
            bool violated = false;
            switch (con.rel) {
                case Relation::LessEqual: violated = 0.0 > rhs + 1e-9; break;
                case Relation::GreaterEqual: violated = 0.0 < rhs - 1e-9; break;
                case Relation::Equal: violated = std::abs(rhs) > 1e-9; break;
            }
            if (violated) {
                res.infeasible = true;
                res.reason = "constraint " + con.name + " became unsatisfiable";
                return res;
            }
            continue;
        }
        out.constraints.push_back({con.name, std::move(row), con.rel, rhs});
    }
    return res;
}

std::vector<double> expand_solution(const PresolveMap& map,
                                    std::span<const double> reduced_values) {
    std::vector<double> full(map.original_cols, 0.0);
    for (int col = 0; col < map.original_cols; ++col) {
        const int rc = map.reduced_of_original[col];
        if (rc >= 0)
            full[col] = reduced_values[rc];
        else if (map.substituted_to[col] < 0)
            full[col] = map.fixed_value[col];
    }
    for (int col = 0; col < map.original_cols; ++col)
        if (map.reduced_of_original[col] < 0 && map.substituted_to[col] >= 0)
            full[col] = full[map.substituted_to[col]];
    return full;
}

double canonical_objective(const MipProblem& prob, std::span<const double> values) {
    KahanSum acc;
    for (int j = 0; j < prob.num_cols(); ++j) acc.add(prob.objective[j] * values[j]);
    return acc.value() + prob.objective_constant;
}

double row_activity(const MipConstraint& row, std::span<const double> values) {
    KahanSum acc;
    for (std::size_t p = 0; p < row.row.size(); ++p)
        acc.add(row.row.vals[p] * values[row.row.cols[p]]);
    return acc.value();
}

double row_violation(const MipConstraint& row, std::span<const double> values) {
    const double act = row_activity(row, values);
    switch (row.rel) {
        case Relation::LessEqual: return std::max(0.0, act - row.rhs);
        case Relation::GreaterEqual: return std::max(0.0, row.rhs - act);
        case Relation::Equal: return std::abs(act - row.rhs);
    }
    return 0.0;
}

bool SolutionSummary::is_open(std::size_t j) const {
    return std::binary_search(open_stations.begin(), open_stations.end(), station_ids.at(j));
}

SolutionSummary extract_solution(const MipProblem& prob, std::span<const double> values,
                                 const PresolveMap* map, std::optional<double> solver_objective,
                                 double int_tol) {
    std::vector<double> full;
    if (map != nullptr) {
        const auto kept = map->reduced_of_original.size() -
                          static_cast<std::size_t>(std::count(map->reduced_of_original.begin(),
                                                              map->reduced_of_original.end(), -1));
        if (values.size() != kept)
            throw DomainError("solution vector does not match the presolve mapping");
        full = expand_solution(*map, values);
    } else {
        full.assign(values.begin(), values.end());
    }
    if (static_cast<int>(full.size()) != prob.num_cols())
        throw DomainError("solution vector length does not match the problem");

    std::vector<double> rounded = full;
    for (int j = 0; j < prob.num_cols(); ++j) {
        if (prob.variables[j].kind == VarKind::Continuous) continue;
        const double r = std::round(full[j]);
        if (std::abs(full[j] - r) > int_tol)
            throw DomainError("non-integral value for " + prob.variables[j].name + ": " +
                              format_double(full[j], 17));
        rounded[j] = r;
    }

    SolutionSummary sum;
    sum.variant = prob.variant;
    sum.station_ids = prob.index.station_ids;
    sum.node_ids = prob.index.node_ids;
    sum.type_ids = prob.index.type_ids;
    const std::size_t I = prob.index.num_nodes();
    const std::size_t J = prob.index.num_stations();
    const std::size_t K = prob.index.num_types();
    for (std::size_t j = 0; j < J; ++j) {
        if (rounded[prob.index.x[j]] > 0.5) {
            sum.open_stations.push_back(prob.index.station_ids[j]);
            sum.connectors[prob.index.station_ids[j]] =
                static_cast<int>(rounded[prob.index.u[j]]);
        }
    }
    std::sort(sum.open_stations.begin(), sum.open_stations.end());
    sum.assignment_flags.assign(I, std::vector<std::uint8_t>(J, 0));
    sum.assignments.assign(
        I, std::vector<std::vector<std::int64_t>>(J, std::vector<std::int64_t>(K, 0)));
    for (std::size_t i = 0; i < I; ++i)
        for (std::size_t j = 0; j < J; ++j) {
            sum.assignment_flags[i][j] = rounded[prob.index.y[i][j]] > 0.5 ? 1 : 0;
            for (std::size_t k = 0; k < K; ++k)
                sum.assignments[i][j][k] =
                    static_cast<std::int64_t>(rounded[prob.index.v[i][j][k]]);
        }

    sum.model_objective = canonical_objective(prob, rounded);
    if (solver_objective) {
        const double diff = std::abs(sum.model_objective - *solver_objective);
        if (diff > 1e-6 * std::max(1.0, std::abs(*solver_objective)))
            throw DomainError("recomputed objective " + format_double(sum.model_objective, 17) +
                              " disagrees with solver objective " +
                              format_double(*solver_objective, 17));
    }
    return sum;
}

std::string solution_to_json(const SolutionArtifact& artifact) {
    const SolutionSummary& s = artifact.summary;
    json doc;
    const char* kind = "robust";
    if (s.variant.kind == Variant::Kind::NonRobust) kind = "nonrobust";
    else if (s.variant.kind == Variant::Kind::Misspecified) kind = "misspecified";
    doc["variant"] = {{"kind", kind}, {"factor", s.variant.factor}};
    doc["status"] = artifact.status;
    doc["objective"] = s.model_objective;
    doc["best_bound"] = artifact.best_bound;
    doc["nodes"] = artifact.nodes;
    doc["train_seed"] = artifact.train_seed;
    doc["instance_checksum"] = artifact.instance_checksum;
    doc["station_ids"] = s.station_ids;
    doc["node_ids"] = s.node_ids;
    doc["type_ids"] = s.type_ids;
    doc["open_stations"] = s.open_stations;
    json conn = json::object();
    for (const auto& [id, count] : s.connectors) conn[std::to_string(id)] = count;
    doc["connectors"] = conn;
    doc["y"] = s.assignment_flags;
    doc["v"] = s.assignments;
    return doc.dump(2) + "\n";
}

SolutionArtifact solution_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FileError(std::string("invalid JSON: ") + e.what());
    }
    SolutionArtifact artifact;
    SolutionSummary& s = artifact.summary;
    if (!doc.contains("variant")) throw SchemaError("variant", "missing field");
    const std::string kind = doc.at("variant").value("kind", "robust");
    if (kind == "robust") s.variant.kind = Variant::Kind::Robust;
    else if (kind == "nonrobust") s.variant.kind = Variant::Kind::NonRobust;
    else if (kind == "misspecified") s.variant.kind = Variant::Kind::Misspecified;
    else throw SchemaError("variant.kind", "unknown kind: " + kind);
    s.variant.factor = doc.at("variant").value("factor", 1.0);
    artifact.status = doc.value("status", std::string{"Optimal"});
    s.model_objective = doc.value("objective", 0.0);
    artifact.best_bound = doc.value("best_bound", 0.0);
    artifact.nodes = doc.value("nodes", std::int64_t{0});
    artifact.train_seed = doc.value("train_seed", std::uint64_t{0});
    artifact.instance_checksum = doc.value("instance_checksum", std::string{});
    auto int_list = [&](const char* key) {
        if (!doc.contains(key)) throw SchemaError(key, "missing field");
        return doc.at(key).get<std::vector<int>>();
    };
    s.station_ids = int_list("station_ids");
    s.node_ids = int_list("node_ids");
    s.type_ids = int_list("type_ids");
    s.open_stations = int_list("open_stations");
    if (doc.contains("connectors"))
        for (auto it = doc.at("connectors").begin(); it != doc.at("connectors").end(); ++it)
            s.connectors[std::stoi(it.key())] = it.value().get<int>();
    if (!doc.contains("y") || !doc.contains("v"))
        throw SchemaError("y", "solution requires assignment tables");
    s.assignment_flags = doc.at("y").get<std::vector<std::vector<std::uint8_t>>>();
    s.assignments = doc.at("v").get<std::vector<std::vector<std::vector<std::int64_t>>>>();
    const std::size_t I = s.node_ids.size(), J = s.station_ids.size(), K = s.type_ids.size();
    if (s.assignment_flags.size() != I || s.assignments.size() != I)
        throw SchemaError("y", "table does not match node count");
    for (std::size_t i = 0; i < I; ++i) {
        if (s.assignment_flags[i].size() != J || s.assignments[i].size() != J)
            throw SchemaError("y", "table does not match station count");
        for (std::size_t j = 0; j < J; ++j)
            if (s.assignments[i][j].size() != K)
                throw SchemaError("v", "table does not match vehicle type count");
    }
    return artifact;
}

void save_solution(const SolutionArtifact& artifact, const std::string& path) {
    write_text_file_atomic(path, solution_to_json(artifact));
}

SolutionArtifact load_solution(const std::string& path) {
    return solution_from_json(read_text_file(path));
}

} // namespace chargeopt

#include "chargeopt/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "chargeopt/errors.hpp"
#include "chargeopt/rng.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

using nlohmann::json;

std::int64_t Instance::demand_of(std::size_t node_idx, std::size_t type_idx) const {
    const auto& node = demand_nodes.at(node_idx);
    const int type_id = vehicle_types.at(type_idx).id;
    auto it = node.demand.find(type_id);
    return it == node.demand.end() ? 0 : it->second;
}

double Instance::total_required_minutes() const {
    double total = 0.0;
    for (std::size_t i = 0; i < num_nodes(); ++i)
        for (std::size_t k = 0; k < num_vehicle_types(); ++k)
            total += vehicle_types[k].charge_time * static_cast<double>(demand_of(i, k));
    return total;
}

double Instance::total_capacity_minutes() const {
    double total = 0.0;
    for (const auto& s : stations)
        total += s.connector_throughput * static_cast<double>(s.max_connectors);
    return total;
}

ValidationReport validate_instance(const Instance& inst) {
    ValidationReport report;
    auto flag = [&](const std::string& field, const std::string& msg) {
        report.violations.push_back({field, msg});
    };

    if (inst.vehicle_types.empty()) flag("vehicle_types", "at least one vehicle type required");
    for (std::size_t k = 0; k < inst.vehicle_types.size(); ++k) {
        const auto& vt = inst.vehicle_types[k];
        const std::string base = "vehicle_types[" + std::to_string(k) + "]";
        if (!(vt.energy_per_charge > 0)) flag(base + ".energy_per_charge", "must be > 0");
        if (!(vt.charge_time > 0)) flag(base + ".charge_time", "must be > 0");
    }

    for (std::size_t j = 0; j < inst.stations.size(); ++j) {
        const auto& s = inst.stations[j];
        const std::string base = "stations[" + std::to_string(j) + "]";
        if (s.daily_cost < 0) flag(base + ".daily_cost", "must be >= 0");
        if (s.max_connectors < 1) flag(base + ".max_connectors", "must be >= 1");
        if (!(s.connector_throughput > 0)) flag(base + ".connector_throughput", "must be > 0");
        if (!(s.disruption.std_dev > 0)) flag(base + ".disruption.std_dev", "must be > 0");
        if (!std::isfinite(s.disruption.threshold))
            flag(base + ".disruption.threshold", "must be finite");
        if (!std::isfinite(s.disruption.mean)) flag(base + ".disruption.mean", "must be finite");
    }

    for (std::size_t i = 0; i < inst.demand_nodes.size(); ++i) {
        const std::string base = "demand_nodes[" + std::to_string(i) + "]";
        for (const auto& [type_id, count] : inst.demand_nodes[i].demand) {
            if (count < 0)
                flag(base + ".demand." + std::to_string(type_id), "must be >= 0");
            const bool known = std::any_of(inst.vehicle_types.begin(), inst.vehicle_types.end(),
                                           [&](const VehicleType& vt) { return vt.id == type_id; });
            if (!known)
                flag(base + ".demand." + std::to_string(type_id), "unknown vehicle type id");
        }
    }

    if (inst.travel_time.size() != inst.demand_nodes.size()) {
        flag("travel_time", "row count must equal demand node count");
    } else {
        for (std::size_t i = 0; i < inst.travel_time.size(); ++i) {
            if (inst.travel_time[i].size() != inst.stations.size()) {
                flag("travel_time[" + std::to_string(i) + "]",
                     "column count must equal station count");
                continue;
            }
            for (std::size_t j = 0; j < inst.travel_time[i].size(); ++j) {
                const double d = inst.travel_time[i][j];
                if (!(d >= 0) || !std::isfinite(d))
                    flag("travel_time[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                         "must be finite and >= 0");
            }
        }
    }

    const auto& p = inst.params;
    if (!(p.min_service_level > 0 && p.min_service_level <= 1))
        flag("params.min_service_level", "must be in (0, 1]");
    if (p.price_rate < 0) flag("params.price_rate", "must be >= 0");
    if (p.penalty_rate < 0) flag("params.penalty_rate", "must be >= 0");
    if (p.connector_cost < 0) flag("params.connector_cost", "must be >= 0");
    if (p.max_stations < 1) flag("params.max_stations", "must be >= 1");
    if (!(p.max_travel_time >= 0)) flag("params.max_travel_time", "must be >= 0");
    if (!(p.big_m > 0)) flag("params.big_m", "must be > 0");

    report.required_minutes = inst.total_required_minutes();
    report.capacity_minutes = inst.total_capacity_minutes();
    report.capacity_exceeded = report.required_minutes > report.capacity_minutes;
    return report;
}

namespace {

double require_number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw SchemaError(path + "." + key, "missing field");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw SchemaError(path + "." + key, "expected a number");
    return v.get<double>();
}

int require_int(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw SchemaError(path + "." + key, "missing field");
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
    return v.get<int>();
}

const json& require_field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw SchemaError(path + "." + key, "missing field");
    return obj.at(key);
}

} // namespace

Instance instance_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FileError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("$", "top level must be an object");

    Instance inst;

    const json& stations = require_field(doc, "stations", "$");
    if (!stations.is_array()) throw SchemaError("stations", "expected an array");
    for (std::size_t j = 0; j < stations.size(); ++j) {
        const std::string path = "stations[" + std::to_string(j) + "]";
        const json& sj = stations[j];
        Station s;
        s.id = require_int(sj, "id", path);
        s.daily_cost = require_number(sj, "daily_cost", path);
        s.max_connectors = require_int(sj, "max_connectors", path);
        s.connector_throughput = require_number(sj, "connector_throughput", path);
        const json& dj = require_field(sj, "disruption", path);
        s.disruption.mean = require_number(dj, "mean", path + ".disruption");
        s.disruption.std_dev = require_number(dj, "std_dev", path + ".disruption");
        s.disruption.threshold = require_number(dj, "threshold", path + ".disruption");
        inst.stations.push_back(s);
    }

    const json& nodes = require_field(doc, "demand_nodes", "$");
    if (!nodes.is_array()) throw SchemaError("demand_nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string path = "demand_nodes[" + std::to_string(i) + "]";
        DemandNode n;
        n.id = require_int(nodes[i], "id", path);
        const json& dem = require_field(nodes[i], "demand", path);
        if (!dem.is_object()) throw SchemaError(path + ".demand", "expected an object");
        for (auto it = dem.begin(); it != dem.end(); ++it) {
            int type_id;
            try {
                type_id = std::stoi(it.key());
            } catch (...) {
                throw SchemaError(path + ".demand." + it.key(), "key must be a vehicle type id");
            }
            if (!it.value().is_number_integer())
                throw SchemaError(path + ".demand." + it.key(), "expected an integer count");
            n.demand[type_id] = it.value().get<std::int64_t>();
        }
        inst.demand_nodes.push_back(std::move(n));
    }

    const json& types = require_field(doc, "vehicle_types", "$");
    if (!types.is_array()) throw SchemaError("vehicle_types", "expected an array");
    for (std::size_t k = 0; k < types.size(); ++k) {
        const std::string path = "vehicle_types[" + std::to_string(k) + "]";
        VehicleType vt;
        vt.id = require_int(types[k], "id", path);
        vt.energy_per_charge = require_number(types[k], "energy_per_charge", path);
        vt.charge_time = require_number(types[k], "charge_time", path);
        inst.vehicle_types.push_back(vt);
    }

    const json& tt = require_field(doc, "travel_time", "$");
    if (!tt.is_array()) throw SchemaError("travel_time", "expected an array of rows");
    for (std::size_t i = 0; i < tt.size(); ++i) {
        if (!tt[i].is_array())
            throw SchemaError("travel_time[" + std::to_string(i) + "]", "expected an array");
        std::vector<double> row;
        for (const auto& v : tt[i]) {
            if (!v.is_number())
                throw SchemaError("travel_time[" + std::to_string(i) + "]", "expected numbers");
            row.push_back(v.get<double>());
        }
        inst.travel_time.push_back(std::move(row));
    }

    const json& params = require_field(doc, "params", "$");
    inst.params.price_rate = require_number(params, "price_rate", "params");
    inst.params.penalty_rate = require_number(params, "penalty_rate", "params");
    inst.params.connector_cost = require_number(params, "connector_cost", "params");
    inst.params.max_stations = require_int(params, "max_stations", "params");
    inst.params.max_travel_time = require_number(params, "max_travel_time", "params");
    inst.params.min_service_level = require_number(params, "min_service_level", "params");
    inst.params.big_m = require_number(params, "big_m", "params");

    if (doc.contains("provenance")) {
        const json& prov = doc.at("provenance");
        if (!prov.is_object()) throw SchemaError("provenance", "expected an object");
        for (auto it = prov.begin(); it != prov.end(); ++it)
            inst.provenance[it.key()] =
                it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }

    return inst;
}

std::string instance_to_json(const Instance& inst) {
    json doc;
    doc["stations"] = json::array();
    for (const auto& s : inst.stations) {
        doc["stations"].push_back({{"id", s.id},
                                   {"daily_cost", s.daily_cost},
                                   {"max_connectors", s.max_connectors},
                                   {"connector_throughput", s.connector_throughput},
                                   {"disruption",
                                    {{"mean", s.disruption.mean},
                                     {"std_dev", s.disruption.std_dev},
                                     {"threshold", s.disruption.threshold}}}});
    }
    doc["demand_nodes"] = json::array();
    for (const auto& n : inst.demand_nodes) {
        json dem = json::object();
        for (const auto& [type_id, count] : n.demand) dem[std::to_string(type_id)] = count;
        doc["demand_nodes"].push_back({{"id", n.id}, {"demand", dem}});
    }
    doc["vehicle_types"] = json::array();
    for (const auto& vt : inst.vehicle_types) {
        doc["vehicle_types"].push_back({{"id", vt.id},
                                        {"energy_per_charge", vt.energy_per_charge},
                                        {"charge_time", vt.charge_time}});
    }
    doc["travel_time"] = inst.travel_time;
    doc["params"] = {{"price_rate", inst.params.price_rate},
                     {"penalty_rate", inst.params.penalty_rate},
                     {"connector_cost", inst.params.connector_cost},
                     {"max_stations", inst.params.max_stations},
                     {"max_travel_time", inst.params.max_travel_time},
                     {"min_service_level", inst.params.min_service_level},
                     {"big_m", inst.params.big_m}};
    doc["provenance"] = inst.provenance;
    return doc.dump(2) + "\n";
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open instance file: " + path);
    Instance inst = instance_from_json(read_text_file(path));
    ValidationReport report = validate_instance(inst);
    if (!report.violations.empty()) {
        std::string msg = "instance validation failed:";
        for (const auto& v : report.violations) msg += "\n  " + v.field + ": " + v.message;
        throw ValidationError(msg);
    }
    return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
    write_text_file_atomic(path, instance_to_json(inst));
}

std::string instance_checksum(const Instance& inst) {
    return fnv1a64_hex(instance_to_json(inst));
}

Instance embedded_surabaya_parameters() {
    Instance inst;
    // Masked demand model rows: mean, std dev, threshold per station.
    const double rows[11][3] = {
        {28979, 3622, 36224}, {11590, 1440, 14490}, {5795, 722, 7250},
        {5789, 715, 7245},    {17387, 2180, 21750}, {17385, 2169, 21730},
        {11590, 1442, 14475}, {11595, 1435, 14481}, {5797, 720, 7246},
        {5785, 731, 7241},    {11600, 1450, 14500}};
    const double daily_costs[11] = {4602739, 1586301, 1068493, 1150684, 1068493, 1586301,
                                    2794520, 1972602, 2054794, 1643835,  1643835};
    for (int j = 0; j < 11; ++j) {
        Station s;
        s.id = j + 1;
        s.daily_cost = daily_costs[j];
        s.max_connectors = 8;
        s.connector_throughput = 1440;
        s.disruption = {rows[j][0], rows[j][1], rows[j][2]};
        inst.stations.push_back(s);
    }
    inst.vehicle_types = {{1, 90, 20}, {2, 133, 39}};
    inst.params.price_rate = 2467;
    inst.params.penalty_rate = 50000;
    inst.params.connector_cost = 479285;
    inst.params.max_stations = 11;
    inst.params.max_travel_time = 35;
    inst.params.min_service_level = 0.95;
    inst.params.big_m = 99999999;
    inst.provenance["source"] = "published Surabaya parameter tables";
    return inst;
}

Instance generate_synthetic_demand(const Instance& base, const GeneratorConfig& config,
                                   std::uint64_t seed) {
    if (!(config.utilization_target > 0 && config.utilization_target <= 1))
        throw DomainError("utilization_target must be in (0, 1]");
    if (config.node_count < 1) throw DomainError("node_count must be >= 1");
    if (base.stations.empty()) throw DomainError("base instance has no stations");
    if (base.vehicle_types.empty()) throw DomainError("base instance has no vehicle types");
    if (config.raw_demand_range.size() < base.vehicle_types.size())
        throw DomainError("raw_demand_range must cover every vehicle type");

    const std::size_t num_stations = base.stations.size();
    const std::size_t num_types = base.vehicle_types.size();
    const int nodes = config.node_count;

    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
        // A fresh placement per attempt, keyed so retries are reproducible.
        const std::uint64_t attempt_seed = CounterRng::mix64(seed + 0x9E3779B97F4A7C15ULL *
                                                                        static_cast<std::uint64_t>(attempt));
        CounterRng node_rng(attempt_seed, streams::kNodePlacement);
        CounterRng station_rng(attempt_seed, streams::kStationPlacement);

        std::vector<std::pair<double, double>> node_pos(nodes);
        for (int i = 0; i < nodes; ++i)
            node_pos[i] = {node_rng.uniform(2 * i) * config.box_size,
                           node_rng.uniform(2 * i + 1) * config.box_size};
        std::vector<std::pair<double, double>> station_pos(num_stations);
        for (std::size_t j = 0; j < num_stations; ++j)
            station_pos[j] = {station_rng.uniform(2 * j) * config.box_size,
                              station_rng.uniform(2 * j + 1) * config.box_size};

        std::vector<std::vector<double>> travel(nodes, std::vector<double>(num_stations));
        bool covered = true;
        int uncovered_node = -1;
        for (int i = 0; i < nodes; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < num_stations; ++j) {
                const double dx = node_pos[i].first - station_pos[j].first;
                const double dy = node_pos[i].second - station_pos[j].second;
                const double minutes =
                    static_cast<double>(std::llround(std::sqrt(dx * dx + dy * dy) * config.speed));
                travel[i][j] = minutes;
                best = std::min(best, minutes);
            }
            if (best > base.params.max_travel_time) {
                covered = false;
                uncovered_node = i;
                break;
            }
        }
        if (!covered) {
            if (attempt + 1 == config.max_retries)
                throw DomainError("placement retries exhausted; node " +
                                  std::to_string(uncovered_node + 1) + " has no station within " +
                                  std::to_string(base.params.max_travel_time) + " minutes");
            continue;
        }

        // Raw integer demands, then a uniform rescale so total charge-minutes
        // land at or below the utilization target (floor keeps feasibility).
        std::vector<std::vector<std::int64_t>> raw(nodes, std::vector<std::int64_t>(num_types));
        double raw_minutes = 0.0;
        for (int i = 0; i < nodes; ++i) {
            CounterRng demand_rng(attempt_seed, streams::kDemand + static_cast<std::uint64_t>(i + 1));
            for (std::size_t k = 0; k < num_types; ++k) {
                const auto [lo, hi] = config.raw_demand_range[k];
                const std::int64_t span = static_cast<std::int64_t>(hi) - lo + 1;
                raw[i][k] = lo + static_cast<std::int64_t>(demand_rng.bits(k) % span);
                raw_minutes += base.vehicle_types[k].charge_time * static_cast<double>(raw[i][k]);
            }
        }
        const double target_minutes =
            config.utilization_target * base.total_capacity_minutes();
        const double scale = raw_minutes > 0 ? target_minutes / raw_minutes : 0.0;

        Instance out = base;
        out.demand_nodes.clear();
        out.travel_time = std::move(travel);
        for (int i = 0; i < nodes; ++i) {
            DemandNode n;
            n.id = i + 1;
            for (std::size_t k = 0; k < num_types; ++k) {
                const auto scaled =
                    static_cast<std::int64_t>(std::floor(static_cast<double>(raw[i][k]) * scale));
                n.demand[base.vehicle_types[k].id] = std::max<std::int64_t>(0, scaled);
            }
            out.demand_nodes.push_back(std::move(n));
        }
        out.provenance.clear();
        out.provenance["source"] = "synthetic";
        out.provenance["seed"] = std::to_string(seed);
        out.provenance["nodes"] = std::to_string(config.node_count);
        out.provenance["utilization_target"] = format_double(config.utilization_target, 17);
        out.provenance["box_size"] = format_double(config.box_size, 17);
        out.provenance["speed"] = format_double(config.speed, 17);
        out.provenance["placement_attempts"] = std::to_string(attempt + 1);
        return out;
    }
    throw DomainError("placement retries exhausted");
}

std::vector<std::vector<bool>> eligible_pairs(const Instance& inst) {
    std::vector<std::vector<bool>> mask(inst.num_nodes(),
                                        std::vector<bool>(inst.num_stations(), false));
    for (std::size_t i = 0; i < inst.num_nodes(); ++i)
        for (std::size_t j = 0; j < inst.num_stations(); ++j)
            mask[i][j] = inst.travel_time[i][j] <= inst.params.max_travel_time;
    return mask;
}

} // namespace chargeopt

#ifndef CHARGEOPT_INSTANCE_HPP
#define CHARGEOPT_INSTANCE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace chargeopt {

// Gaussian model of the masked quantity that triggers an outage at a station:
// the station operates on a day iff the realized value stays at or below
// `threshold`.
struct DisruptionModel {
    double mean = 0.0;
    double std_dev = 1.0;
    double threshold = 0.0;

    double scaled_threshold() const { return (threshold - mean) / std_dev; }

    bool operator==(const DisruptionModel&) const = default;
};

struct VehicleType {
    int id = 0;                    // 1-based, as published
    double energy_per_charge = 0;  // kWh per full charge
    double charge_time = 0;        // minutes per full charge

    bool operator==(const VehicleType&) const = default;
};

struct Station {
    int id = 0;                      // 1-based
    double daily_cost = 0;           // IDR/day, operations + amortized investment
    int max_connectors = 0;          // connectors that fit on the site
    double connector_throughput = 0; // service minutes per connector per day
    DisruptionModel disruption;

    bool operator==(const Station&) const = default;
};

struct DemandNode {
    int id = 0;                           // 1-based
    std::map<int, std::int64_t> demand;   // vehicle-type id -> vehicle count

    bool operator==(const DemandNode&) const = default;
};

struct GlobalParams {
    double price_rate = 0;        // IDR/kWh
    double penalty_rate = 0;      // IDR per minute of travel per unserved vehicle
    double connector_cost = 0;    // IDR per connector per day
    int max_stations = 0;
    double max_travel_time = 0;   // minutes
    double min_service_level = 0; // required assigned-reliability mass per node
    double big_m = 0;

    bool operator==(const GlobalParams&) const = default;
};

struct Instance {
    std::vector<Station> stations;
    std::vector<DemandNode> demand_nodes;
    std::vector<VehicleType> vehicle_types;
    // travel_time[i][j]: minutes from demand node index i to station index j
    std::vector<std::vector<double>> travel_time;
    GlobalParams params;
    std::map<std::string, std::string> provenance;

    std::size_t num_stations() const { return stations.size(); }
    std::size_t num_nodes() const { return demand_nodes.size(); }
    std::size_t num_vehicle_types() const { return vehicle_types.size(); }

    std::int64_t demand_of(std::size_t node_idx, std::size_t type_idx) const;
    // Connector minutes needed to serve every vehicle once.
    double total_required_minutes() const;
    // Connector minutes available with every station fully built out.
    double total_capacity_minutes() const;

    bool operator==(const Instance&) const = default;
};

struct ValidationIssue {
    std::string field;   // dotted path of the violated invariant
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> violations;
    bool capacity_exceeded = false;
    double required_minutes = 0.0;
    double capacity_minutes = 0.0;

    bool ok() const { return violations.empty() && !capacity_exceeded; }
};

ValidationReport validate_instance(const Instance& inst);

// Parses the documented JSON schema, then validates.  Throws FileError /
// SchemaError / ValidationError.  A raised capacity flag alone is not an
// error here.
Instance load_instance(const std::string& path);
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
void save_instance(const Instance& inst, const std::string& path);

// Checksum over the canonical JSON form, used to pair solutions with the
// instance they were computed on.
std::string instance_checksum(const Instance& inst);

// The published Surabaya data: 11 stations (demand-model rows and daily
// costs), 2 vehicle types, global rates and thresholds.  Demands and travel
// times are not part of the publication and are left empty.
Instance embedded_surabaya_parameters();

struct GeneratorConfig {
    int node_count = 31;
    double utilization_target = 0.6; // fraction of full-buildout capacity
    double box_size = 40.0;          // square side; coordinates in [0, box]
    double speed = 1.0;              // minutes per unit of Euclidean distance
    int max_retries = 64;
    // raw per-node demand ranges before rescaling, one per vehicle type
    std::vector<std::pair<int, int>> raw_demand_range = {{10, 100}, {2, 30}};
};

// Deterministic synthetic completion of a parameter-only instance: uniform
// placement in the box, minute-rounded travel times, integer demands rescaled
// so total charge-minutes <= utilization_target * total capacity.  Retries
// placement until every node has a station within max_travel_time.
Instance generate_synthetic_demand(const Instance& base, const GeneratorConfig& config,
                                   std::uint64_t seed);

// eligibility[i][j] = travel_time[i][j] <= max_travel_time (inclusive)
std::vector<std::vector<bool>> eligible_pairs(const Instance& inst);

} // namespace chargeopt

#endif

#ifndef CHARGEOPT_EVALUATION_HPP
#define CHARGEOPT_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "chargeopt/instance.hpp"
#include "chargeopt/model.hpp"
#include "chargeopt/reliability.hpp"
#include "chargeopt/scenario.hpp"

namespace chargeopt {

// Revenue/penalty/cost split of a single scenario. Cost never depends on the
// scenario, only on which stations are open and how many connectors they got.
struct ObjectiveBreakdown {
    double revenue = 0.0;
    double penalty = 0.0;
    double cost = 0.0;

    double objective() const { return revenue - penalty - cost; }
};

struct StationFrequency {
    int station_id = 0;
    double disruption_frequency = 0.0; // fraction of scenarios the station was down
};

struct EvaluationReport {
    std::string variant;
    EstimatorMethod method = EstimatorMethod::MC;
    std::int64_t n_eval = 0;
    std::uint64_t eval_seed = 0;
    double rho = kDefaultRho;
    std::string instance_checksum;

    double mean_objective = 0.0, se_objective = 0.0;
    double mean_revenue = 0.0, se_revenue = 0.0;
    double mean_penalty = 0.0, se_penalty = 0.0;
    double fixed_cost = 0.0;

    std::vector<StationFrequency> disruption_frequency;
    int open_count = 0;
    std::int64_t connector_total = 0;
};

struct CoverageStats {
    std::vector<std::pair<int, int>> open_eligible_of_node; // (node id, station count)
    std::map<int, int> redundancy_histogram;                // station count -> node count
    double fraction_covered_twice = 0.0;
};

struct ComparisonRow {
    std::string variant;
    EstimatorMethod method = EstimatorMethod::MC;
    std::int64_t n_eval = 0;
    double mean_objective = 0.0, se_objective = 0.0;
    double relative_difference = 0.0; // vs the baseline row, 0 for the baseline itself
    double mean_revenue = 0.0, mean_penalty = 0.0, fixed_cost = 0.0;
    int open_count = 0;
    std::int64_t connector_total = 0;
};

struct ComparisonTable {
    std::string baseline;
    std::vector<ComparisonRow> rows;
};

// Per-scenario score arrays; element l is independent of every other element,
// so the parallel fill reproduces the serial one exactly.
struct ScenarioScores {
    std::vector<double> revenue, penalty, objective;
};

// revenue_weight/penalty_weight align with set.stations. When cv_pi is
// nonempty the indicator of station j in scenario l is replaced by
// I + pi_j * (X - cv_phi_j) before weighting.
ScenarioScores score_scenarios(const PairedScenarioSet& set,
                               std::span<const double> revenue_weight,
                               std::span<const double> penalty_weight,
                               std::span<const double> cv_pi, std::span<const double> cv_phi,
                               double fixed_cost, bool parallel);

// Checks the solution against the physical constraints of the instance
// (demand met, capacity, connectors, eligibility, coverage, budget) and
// throws DomainError("infeasible-solution: ...") before scoring anything.
EvaluationReport evaluate_solution(const Instance& inst, const SolutionSummary& sol,
                                   std::int64_t n_eval, std::uint64_t eval_seed,
                                   EstimatorMethod method, double rho = kDefaultRho);

// Same scoring against an externally supplied scenario set.
EvaluationReport evaluate_with_scenarios(const Instance& inst, const SolutionSummary& sol,
                                         const PairedScenarioSet& set, EstimatorMethod method);

// indicators[j] follows the station order of inst (1 = operational).
ObjectiveBreakdown decompose_objective(const Instance& inst, const SolutionSummary& sol,
                                       std::span<const std::uint8_t> indicators);

CoverageStats coverage_statistics(const Instance& inst, const SolutionSummary& sol);

// All reports must share instance, n_eval, eval_seed and rho; rows keep the
// input order and the baseline is named by its variant label.
ComparisonTable compare_models(const std::vector<EvaluationReport>& reports,
                               const std::string& baseline);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);
void save_report(const EvaluationReport& report, const std::string& path);
EvaluationReport load_report(const std::string& path);

// `variant,n_eval,seed,mean_obj,se_obj,revenue,penalty,cost` with header.
std::string report_csv_header();
std::string report_csv_row(const EvaluationReport& report);
std::string comparison_to_csv(const ComparisonTable& table);

} // namespace chargeopt

#endif

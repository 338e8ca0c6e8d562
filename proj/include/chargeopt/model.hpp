#ifndef CHARGEOPT_MODEL_HPP
#define CHARGEOPT_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chargeopt/instance.hpp"
#include "chargeopt/lp.hpp"
#include "chargeopt/reliability.hpp"

namespace chargeopt {

struct Variant {
    enum class Kind { Robust, NonRobust, Misspecified };
    Kind kind = Kind::Robust;
    double factor = 1.0; // reliability distortion, Misspecified only
};

// Stable label used in filenames and CSV rows: "robust", "nonrobust",
// "misspecified-0.95".
std::string variant_label(const Variant& v);
Variant variant_from_label(const std::string& label);

enum class VarKind { Continuous, Integer, Binary };

struct MipVariable {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    VarKind kind = VarKind::Continuous;
};

struct MipConstraint {
    std::string name; // family prefix before '[' groups related rows
    SparseRow row;
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
};

// Structured-name lookup; -1 marks a column removed by presolve.
struct VarIndex {
    std::vector<int> station_ids; // j -> published id
    std::vector<int> node_ids;    // i -> published id
    std::vector<int> type_ids;    // k -> published id
    std::vector<int> x;           // j -> column
    std::vector<std::vector<int>> y;              // [i][j]
    std::vector<std::vector<std::vector<int>>> v; // [i][j][k]
    std::vector<int> u; // j -> column

    std::size_t num_stations() const { return station_ids.size(); }
    std::size_t num_nodes() const { return node_ids.size(); }
    std::size_t num_types() const { return type_ids.size(); }
};

struct BuildOptions {
    bool tight_big_m = true; // per-row big-M instead of the published 99999999
    bool fix_y_to_x = false; // presolve may substitute y_ij := x_j
};

// Maximization MIP over columns ordered x, y, v, u.
struct MipProblem {
    std::vector<MipVariable> variables;
    std::vector<double> objective;
    double objective_constant = 0.0;
    std::vector<MipConstraint> constraints;
    VarIndex index;
    Variant variant;
    BuildOptions options;

    int num_cols() const { return static_cast<int>(variables.size()); }
    int num_rows() const { return static_cast<int>(constraints.size()); }
    LinearProgram relaxation() const;
};

// Reliabilities as the objective believes them: the estimates for Robust,
// all ones for NonRobust, and factor * p_hat for Misspecified.  The factor is
// deliberately not clamped at 1; an overestimating model believes revenue
// beyond what any disruption draw can deliver.  Constraint rows never use
// these: they keep the undistorted estimates (the empirical means of the
// scenario indicators), which is why a misspecified build stays feasible.
// Indexed like inst.stations; throws when an estimate is missing.
std::vector<double> effective_reliabilities(const Instance& inst,
                                            const ReliabilityEstimates& est,
                                            const Variant& variant);

MipProblem build_model(const Instance& inst, const ReliabilityEstimates& est,
                       const Variant& variant, const BuildOptions& options = {});

// Reconstruction data for solutions of the reduced problem.
struct PresolveMap {
    int original_cols = 0;
    std::vector<int> reduced_of_original;  // -1 when the column was removed
    std::vector<double> fixed_value;       // value for removed fixed columns
    std::vector<int> substituted_to;       // original x column for folded y, else -1
};

struct PresolveResult {
    MipProblem problem;
    PresolveMap map;
    bool infeasible = false;
    std::string reason;
};

// Optimality-preserving reductions: drops columns fixed to zero by travel
// eligibility, optionally folds y_ij into x_j (the y objective coefficient
// is zero and raising y only relaxes the rows it appears in), and detects
// rows made unsatisfiable by the fixings.
PresolveResult presolve(const MipProblem& prob, const Instance& inst);

std::vector<double> expand_solution(const PresolveMap& map,
                                    std::span<const double> reduced_values);

struct SolutionSummary {
    Variant variant;
    std::vector<int> open_stations;   // published ids, ascending
    std::map<int, int> connectors;    // station id -> connectors, open stations only
    std::vector<std::vector<std::uint8_t>> assignment_flags;          // [i][j]
    std::vector<std::vector<std::vector<std::int64_t>>> assignments;  // [i][j][k]
    double model_objective = 0.0;
    std::vector<int> station_ids, node_ids, type_ids;

    bool is_open(std::size_t j) const;
};

// Rounds integer columns (throws past the tolerance), reconstructs any
// presolved-away columns, and recomputes the objective canonically.  When
// the solver's objective is supplied the recomputation must agree within
// 1e-6 relative.
SolutionSummary extract_solution(const MipProblem& prob, std::span<const double> values,
                                 const PresolveMap* map = nullptr,
                                 std::optional<double> solver_objective = std::nullopt,
                                 double int_tol = 1e-6);

// Shared exact evaluators: Neumaier sums in fixed column order, so every
// consumer (branch and bound, brute force, verification) sees bit-identical
// numbers for identical points.
double canonical_objective(const MipProblem& prob, std::span<const double> values);
double row_activity(const MipConstraint& row, std::span<const double> values);
// Violation of one row at the given point: 0 when satisfied.
double row_violation(const MipConstraint& row, std::span<const double> values);

// Solution artifact bundled with enough context to audit and re-evaluate.
struct SolutionArtifact {
    SolutionSummary summary;
    std::string instance_checksum;
    std::string status; // MIP status name
    double best_bound = 0.0;
    std::int64_t nodes = 0;
    std::uint64_t train_seed = 0; // seed behind the estimates the model used
};

std::string solution_to_json(const SolutionArtifact& artifact);
SolutionArtifact solution_from_json(const std::string& text);
void save_solution(const SolutionArtifact& artifact, const std::string& path);
SolutionArtifact load_solution(const std::string& path);

} // namespace chargeopt

#endif

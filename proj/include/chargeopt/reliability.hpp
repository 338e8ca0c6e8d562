#ifndef CHARGEOPT_RELIABILITY_HPP
#define CHARGEOPT_RELIABILITY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chargeopt/instance.hpp"
#include "chargeopt/scenario.hpp"

namespace chargeopt {

enum class EstimatorMethod { MC, CV, Analytic };

std::string method_name(EstimatorMethod m);
EstimatorMethod method_from_name(const std::string& name);

struct StationEstimate {
    int station_id = 0;
    double p_hat = 0.0;    // clamped to [0,1]
    double std_err = 0.0;
    std::optional<double> cv_coefficient; // empty for MC and Analytic
};

struct ReliabilityEstimates {
    EstimatorMethod method = EstimatorMethod::MC;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double rho = 0.0;
    std::vector<StationEstimate> stations;
    std::string note; // set when estimates were deliberately distorted

    const StationEstimate* find(int station_id) const;
};

// P(Z <= threshold) = Phi((threshold - mean) / std_dev); the exact value the
// sampling estimators converge to.
double analytic_reliability(const DisruptionModel& model);
ReliabilityEstimates analytic_reliabilities(const Instance& inst);

// Plain Monte Carlo: p_hat = mean of z_indicators, SE = sqrt(p(1-p)/n).
ReliabilityEstimates mc_estimate(const PairedScenarioSet& scenarios);

// Variance-minimizing coefficient -SampleCov(z,x)/SampleVar(x) with (n-1)
// normalization; 0 when SampleVar(x) < 1e-12.
double optimal_cv_coefficient(std::span<const std::uint8_t> z_ind,
                              std::span<const std::uint8_t> x_ind);

// Control-variate estimator: p_hat = mean(z) + pi*(mean(x) - Phi(z_bar)),
// clamped to [0,1].  SE is the sample standard deviation of the per-sample
// adjusted values z_l + pi*(x_l - Phi(z_bar)) over sqrt(n), treating pi as
// fixed.  A forced pi overrides the fitted coefficient (pi = 0 reproduces
// the Monte Carlo point estimate).
ReliabilityEstimates cv_estimate(const PairedScenarioSet& scenarios,
                                 std::optional<double> forced_pi = std::nullopt);

// Distribution-free sample size ceil(ln(2/alpha) / (2 delta^2)) guaranteeing
// P(|p_hat - p| > delta) <= alpha.
std::int64_t hoeffding_sample_size(double delta, double alpha);

// One-call pipeline: sample paired scenarios, then apply the chosen
// estimator.  Deterministic in (inst, n, seed, method, rho).
ReliabilityEstimates estimate_reliabilities(const Instance& inst, std::size_t n,
                                            std::uint64_t seed, EstimatorMethod method,
                                            double rho);

std::string estimates_to_json(const ReliabilityEstimates& est);
ReliabilityEstimates estimates_from_json(const std::string& text);
void save_estimates(const ReliabilityEstimates& est, const std::string& path);
ReliabilityEstimates load_estimates(const std::string& path);

} // namespace chargeopt

#endif

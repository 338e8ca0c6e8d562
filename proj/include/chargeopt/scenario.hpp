#ifndef CHARGEOPT_SCENARIO_HPP
#define CHARGEOPT_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chargeopt/instance.hpp"

namespace chargeopt {

// Latent correlation between the disruption draw and its paired control
// normal.  At the scaled thresholds in play (about 2 sigma) this value puts
// the control-variate standard error near a tenth of plain Monte Carlo.
inline constexpr double kDefaultRho = 0.99999;

// 1 iff the realized value stays at or below the threshold (inclusive).
inline int disruption_indicator(double z_value, double threshold) {
    return z_value <= threshold ? 1 : 0;
}

struct StationScenarios {
    int station_id = 0;
    double scaled_threshold = 0.0;     // (threshold - mean) / std_dev
    std::vector<double> z_samples;     // realized masked-demand values
    std::vector<double> x_samples;     // paired standard-normal controls
    std::vector<std::uint8_t> z_indicators; // I(Z_l <= threshold)
    std::vector<std::uint8_t> x_indicators; // I(X_l <= scaled_threshold)
};

struct PairedScenarioSet {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double latent_correlation = 0.0;
    std::vector<StationScenarios> stations;

    const StationScenarios* find(int station_id) const;
};

// Draws n paired samples per station: X and eps independent standard normals
// from the station's substream, Z = mu + sigma*(rho*X + sqrt(1-rho^2)*eps).
// Marginally Z ~ N(mu, sigma^2) for any |rho| <= 1.  Output is a pure
// function of (instance, n, seed, rho), independent of thread count.
PairedScenarioSet sample_paired_scenarios(const Instance& inst, std::size_t n,
                                          std::uint64_t seed, double rho);

// Kernel variants behind sample_paired_scenarios.  The serial loop is the
// reference; the parallel one must produce bit-identical buffers because
// every sample is addressed by counter, not by draw order.
void fill_scenarios_serial(const Instance& inst, std::size_t n, std::uint64_t seed,
                           double rho, PairedScenarioSet& out);
void fill_scenarios_parallel(const Instance& inst, std::size_t n, std::uint64_t seed,
                             double rho, PairedScenarioSet& out);

// Audit export, one row per (station, sample): station,l,z,x,z_ind,x_ind
// with l counted from 1.
std::string scenarios_to_csv(const PairedScenarioSet& set);
void save_scenarios_csv(const PairedScenarioSet& set, const std::string& path);

} // namespace chargeopt

#endif

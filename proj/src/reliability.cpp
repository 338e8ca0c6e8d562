#include "chargeopt/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "chargeopt/errors.hpp"
#include "chargeopt/normal.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

using nlohmann::json;

std::string method_name(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::MC: return "MC";
        case EstimatorMethod::CV: return "CV";
        case EstimatorMethod::Analytic: return "Analytic";
    }
    throw DomainError("unknown estimator method");
}

EstimatorMethod method_from_name(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mc") return EstimatorMethod::MC;
    if (lower == "cv") return EstimatorMethod::CV;
    if (lower == "analytic") return EstimatorMethod::Analytic;
    throw DomainError("unknown estimator method: " + name);
}

const StationEstimate* ReliabilityEstimates::find(int station_id) const {
    for (const auto& s : stations)
        if (s.station_id == station_id) return &s;
    return nullptr;
}

double analytic_reliability(const DisruptionModel& model) {
    if (!(model.std_dev > 0)) throw DomainError("std_dev must be > 0");
    return standard_normal_cdf(model.scaled_threshold());
}

ReliabilityEstimates analytic_reliabilities(const Instance& inst) {
    ReliabilityEstimates est;
    est.method = EstimatorMethod::Analytic;
    for (const auto& s : inst.stations)
        est.stations.push_back({s.id, analytic_reliability(s.disruption), 0.0, std::nullopt});
    return est;
}

namespace {

// Indicator moments reduce to three integer counts; sample covariance and
// variances computed from them are exact in double precision for any n
// below 2^53.
struct IndicatorCounts {
    std::int64_t n = 0;
    std::int64_t z_ones = 0;
    std::int64_t x_ones = 0;
    std::int64_t both_ones = 0;
};

IndicatorCounts count_indicators(std::span<const std::uint8_t> z_ind,
                                 std::span<const std::uint8_t> x_ind) {
    IndicatorCounts c;
    c.n = static_cast<std::int64_t>(z_ind.size());
    for (std::size_t l = 0; l < z_ind.size(); ++l) {
        c.z_ones += z_ind[l];
        c.x_ones += x_ind[l];
        c.both_ones += static_cast<std::int64_t>(z_ind[l]) * x_ind[l];
    }
    return c;
}

double sample_cov(const IndicatorCounts& c) {
    const double n = static_cast<double>(c.n);
    return (static_cast<double>(c.both_ones) -
            static_cast<double>(c.z_ones) * static_cast<double>(c.x_ones) / n) /
           (n - 1.0);
}

double sample_var_x(const IndicatorCounts& c) {
    const double n = static_cast<double>(c.n);
    return (static_cast<double>(c.x_ones) -
            static_cast<double>(c.x_ones) * static_cast<double>(c.x_ones) / n) /
           (n - 1.0);
}

double sample_var_z(const IndicatorCounts& c) {
    const double n = static_cast<double>(c.n);
    return (static_cast<double>(c.z_ones) -
            static_cast<double>(c.z_ones) * static_cast<double>(c.z_ones) / n) /
           (n - 1.0);
}

void require_sample_size(const PairedScenarioSet& scenarios) {
    if (scenarios.n < 2) throw DomainError("estimator needs at least 2 samples");
}

} // namespace

ReliabilityEstimates mc_estimate(const PairedScenarioSet& scenarios) {
    require_sample_size(scenarios);
    ReliabilityEstimates est;
    est.method = EstimatorMethod::MC;
    est.n = scenarios.n;
    est.seed = scenarios.seed;
    est.rho = scenarios.latent_correlation;
    const double n = static_cast<double>(scenarios.n);
    for (const auto& st : scenarios.stations) {
        std::int64_t ones = 0;
        for (std::uint8_t v : st.z_indicators) ones += v;
        const double p = static_cast<double>(ones) / n;
        est.stations.push_back({st.station_id, p, std::sqrt(p * (1.0 - p) / n), std::nullopt});
    }
    return est;
}

double optimal_cv_coefficient(std::span<const std::uint8_t> z_ind,
                              std::span<const std::uint8_t> x_ind) {
    if (z_ind.size() != x_ind.size())
        throw DomainError("indicator sequences must have equal length");
    if (z_ind.size() < 2) throw DomainError("estimator needs at least 2 samples");
    const IndicatorCounts c = count_indicators(z_ind, x_ind);
    const double var_x = sample_var_x(c);
    if (var_x < 1e-12) return 0.0;
    return -sample_cov(c) / var_x;
}

ReliabilityEstimates cv_estimate(const PairedScenarioSet& scenarios,
                                 std::optional<double> forced_pi) {
    require_sample_size(scenarios);
    ReliabilityEstimates est;
    est.method = EstimatorMethod::CV;
    est.n = scenarios.n;
    est.seed = scenarios.seed;
    est.rho = scenarios.latent_correlation;
    const double n = static_cast<double>(scenarios.n);
    for (const auto& st : scenarios.stations) {
        const IndicatorCounts c = count_indicators(st.z_indicators, st.x_indicators);
        const double pi =
            forced_pi ? *forced_pi : optimal_cv_coefficient(st.z_indicators, st.x_indicators);
        const double mean_z = static_cast<double>(c.z_ones) / n;
        const double mean_x = static_cast<double>(c.x_ones) / n;
        const double known_mean = standard_normal_cdf(st.scaled_threshold);
        const double raw = mean_z + pi * (mean_x - known_mean);
        // Variance of the adjusted values z_l + pi*(x_l - Phi); the constant
        // shift drops out, leaving the quadratic form in the sample moments.
        const double var_adj =
            sample_var_z(c) + pi * pi * sample_var_x(c) + 2.0 * pi * sample_cov(c);
        const double se = var_adj > 0.0 ? std::sqrt(var_adj / n) : 0.0;
        est.stations.push_back(
            {st.station_id, std::clamp(raw, 0.0, 1.0), se, pi});
    }
    return est;
}

std::int64_t hoeffding_sample_size(double delta, double alpha) {
    if (!(delta > 0)) throw DomainError("delta must be > 0");
    // alpha = 2 gives ln(1) = 0 and a zero sample size; values above 2 would
    // go negative and are rejected.
    if (!(alpha > 0) || alpha > 2) throw DomainError("alpha must be in (0, 2]");
    return static_cast<std::int64_t>(std::ceil(std::log(2.0 / alpha) / (2.0 * delta * delta)));
}

ReliabilityEstimates estimate_reliabilities(const Instance& inst, std::size_t n,
                                            std::uint64_t seed, EstimatorMethod method,
                                            double rho) {
    if (method == EstimatorMethod::Analytic) return analytic_reliabilities(inst);
    const PairedScenarioSet scenarios = sample_paired_scenarios(inst, n, seed, rho);
    return method == EstimatorMethod::MC ? mc_estimate(scenarios) : cv_estimate(scenarios);
}

std::string estimates_to_json(const ReliabilityEstimates& est) {
    json doc;
    doc["method"] = method_name(est.method);
    doc["n"] = est.n;
    doc["seed"] = est.seed;
    doc["rho"] = est.rho;
    if (!est.note.empty()) doc["note"] = est.note;
    doc["stations"] = json::array();
    for (const auto& s : est.stations) {
        json row = {{"id", s.station_id}, {"p_hat", s.p_hat}, {"se", s.std_err}};
        if (s.cv_coefficient) row["pi"] = *s.cv_coefficient;
        doc["stations"].push_back(row);
    }
    return doc.dump(2) + "\n";
}

ReliabilityEstimates estimates_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FileError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("$", "top level must be an object");
    ReliabilityEstimates est;
    if (!doc.contains("method")) throw SchemaError("method", "missing field");
    est.method = method_from_name(doc.at("method").get<std::string>());
    est.n = doc.value("n", std::size_t{0});
    est.seed = doc.value("seed", std::uint64_t{0});
    est.rho = doc.value("rho", 0.0);
    est.note = doc.value("note", std::string{});
    if (!doc.contains("stations") || !doc.at("stations").is_array())
        throw SchemaError("stations", "expected an array");
    for (std::size_t idx = 0; idx < doc.at("stations").size(); ++idx) {
        const json& row = doc.at("stations")[idx];
        const std::string path = "stations[" + std::to_string(idx) + "]";
        StationEstimate s;
        if (!row.contains("id")) throw SchemaError(path + ".id", "missing field");
        s.station_id = row.at("id").get<int>();
        if (!row.contains("p_hat")) throw SchemaError(path + ".p_hat", "missing field");
        s.p_hat = row.at("p_hat").get<double>();
        s.std_err = row.value("se", 0.0);
        if (row.contains("pi")) s.cv_coefficient = row.at("pi").get<double>();
        est.stations.push_back(s);
    }
    return est;
}

void save_estimates(const ReliabilityEstimates& est, const std::string& path) {
    write_text_file_atomic(path, estimates_to_json(est));
}

ReliabilityEstimates load_estimates(const std::string& path) {
    return estimates_from_json(read_text_file(path));
}

} // namespace chargeopt

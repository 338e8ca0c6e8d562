#include "chargeopt/scenario.hpp"

#include <cmath>
#include <cstdint>

#include "chargeopt/errors.hpp"
#include "chargeopt/rng.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

const StationScenarios* PairedScenarioSet::find(int station_id) const {
    for (const auto& s : stations)
        if (s.station_id == station_id) return &s;
    return nullptr;
}

namespace {

void prepare(const Instance& inst, std::size_t n, std::uint64_t seed, double rho,
             PairedScenarioSet& out) {
    if (n < 1) throw DomainError("scenario count must be >= 1");
    if (!(std::abs(rho) <= 1.0)) throw DomainError("latent correlation must satisfy |rho| <= 1");
    for (const auto& s : inst.stations)
        if (!(s.disruption.std_dev > 0))
            throw DomainError("station " + std::to_string(s.id) + " has nonpositive std_dev");

    out.n = n;
    out.seed = seed;
    out.latent_correlation = rho;
    out.stations.assign(inst.stations.size(), {});
    for (std::size_t j = 0; j < inst.stations.size(); ++j) {
        auto& st = out.stations[j];
        st.station_id = inst.stations[j].id;
        st.scaled_threshold = inst.stations[j].disruption.scaled_threshold();
        st.z_samples.resize(n);
        st.x_samples.resize(n);
        st.z_indicators.resize(n);
        st.x_indicators.resize(n);
    }
}

inline void fill_one(const Station& station, const CounterRng& rng, double rho,
                     double residual_scale, std::size_t l, StationScenarios& st) {
    const auto [x, eps] = rng.normal_pair(l);
    const double z = station.disruption.mean +
                     station.disruption.std_dev * (rho * x + residual_scale * eps);
    st.z_samples[l] = z;
    st.x_samples[l] = x;
    st.z_indicators[l] =
        static_cast<std::uint8_t>(disruption_indicator(z, station.disruption.threshold));
    st.x_indicators[l] = static_cast<std::uint8_t>(x <= st.scaled_threshold ? 1 : 0);
}

} // namespace

void fill_scenarios_serial(const Instance& inst, std::size_t n, std::uint64_t seed,
                           double rho, PairedScenarioSet& out) {
    prepare(inst, n, seed, rho, out);
    const double residual_scale = std::sqrt(1.0 - rho * rho);
    for (std::size_t j = 0; j < inst.stations.size(); ++j) {
        const Station& station = inst.stations[j];
        const CounterRng rng(seed, streams::kScenario + static_cast<std::uint64_t>(station.id));
        for (std::size_t l = 0; l < n; ++l)
            fill_one(station, rng, rho, residual_scale, l, out.stations[j]);
    }
}

void fill_scenarios_parallel(const Instance& inst, std::size_t n, std::uint64_t seed,
                             double rho, PairedScenarioSet& out) {
    prepare(inst, n, seed, rho, out);
    const double residual_scale = std::sqrt(1.0 - rho * rho);
    for (std::size_t j = 0; j < inst.stations.size(); ++j) {
        const Station& station = inst.stations[j];
        const CounterRng rng(seed, streams::kScenario + static_cast<std::uint64_t>(station.id));
        StationScenarios& st = out.stations[j];
        const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
        for (std::int64_t l = 0; l < count; ++l)
            fill_one(station, rng, rho, residual_scale, static_cast<std::size_t>(l), st);
    }
}

PairedScenarioSet sample_paired_scenarios(const Instance& inst, std::size_t n,
                                          std::uint64_t seed, double rho) {
    PairedScenarioSet out;
    fill_scenarios_parallel(inst, n, seed, rho, out);
    return out;
}

std::string scenarios_to_csv(const PairedScenarioSet& set) {
    std::string csv = "station,l,z,x,z_ind,x_ind\n";
    for (const auto& st : set.stations) {
        for (std::size_t l = 0; l < set.n; ++l) {
            csv += std::to_string(st.station_id);
            csv += ',';
            csv += std::to_string(l + 1);
            csv += ',';
            csv += format_double(st.z_samples[l], 17);
            csv += ',';
            csv += format_double(st.x_samples[l], 17);
            csv += ',';
            csv += char('0' + st.z_indicators[l]);
            csv += ',';
            csv += char('0' + st.x_indicators[l]);
            csv += '\n';
        }
    }
    return csv;
}

void save_scenarios_csv(const PairedScenarioSet& set, const std::string& path) {
    write_text_file_atomic(path, scenarios_to_csv(set));
}

} // namespace chargeopt

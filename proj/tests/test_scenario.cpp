#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "chargeopt/scenario.hpp"
#include "chargeopt/util.hpp"
#include "toy_instances.hpp"

using namespace chargeopt;
using doctest::Approx;

TEST_CASE("indicator boundary is inclusive") {
    CHECK(disruption_indicator(3.0, 3.0) == 1);
    CHECK(disruption_indicator(3.0000001, 3.0) == 0);
    CHECK(disruption_indicator(-100.0, 3.0) == 1);
}

TEST_CASE("paired sampling is a pure function of its inputs") {
    const Instance inst = testing::tiny_instance(3, 2, 1);
    const auto a = sample_paired_scenarios(inst, 500, 99, kDefaultRho);
    const auto b = sample_paired_scenarios(inst, 500, 99, kDefaultRho);
    REQUIRE(a.stations.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(a.stations[j].z_samples == b.stations[j].z_samples);
        CHECK(a.stations[j].x_samples == b.stations[j].x_samples);
    }
    const auto c = sample_paired_scenarios(inst, 500, 100, kDefaultRho);
    CHECK_FALSE(a.stations[0].z_samples == c.stations[0].z_samples);
}

TEST_CASE("serial and parallel fills are bit-identical") {
    const Instance inst = testing::tiny_instance(3, 2, 1);
    PairedScenarioSet serial, parallel;
    fill_scenarios_serial(inst, 4096, 7, kDefaultRho, serial);
    fill_scenarios_parallel(inst, 4096, 7, kDefaultRho, parallel);
    REQUIRE(serial.stations.size() == parallel.stations.size());
    for (std::size_t j = 0; j < serial.stations.size(); ++j) {
        CHECK(serial.stations[j].z_samples == parallel.stations[j].z_samples);
        CHECK(serial.stations[j].x_samples == parallel.stations[j].x_samples);
        CHECK(serial.stations[j].z_indicators == parallel.stations[j].z_indicators);
        CHECK(serial.stations[j].x_indicators == parallel.stations[j].x_indicators);
    }
}

TEST_CASE("marginals and indicators are consistent") {
    Instance inst = testing::tiny_instance(1, 1, 1);
    inst.stations[0].disruption = {50.0, 4.0, 58.0};
    const std::size_t n = 200'000;
    const auto set = sample_paired_scenarios(inst, n, 11, 0.5);
    const auto& st = set.stations[0];
    REQUIRE(st.z_samples.size() == n);
    CHECK(st.scaled_threshold == 2.0);

    KahanSum sum, sumsq;
    for (double z : st.z_samples) {
        sum.add(z);
        sumsq.add(z * z);
    }
    const double mean = sum.value() / static_cast<double>(n);
    const double var = sumsq.value() / static_cast<double>(n) - mean * mean;
    CHECK(mean == Approx(50.0).epsilon(4.0 * 4.0 / 50.0 / std::sqrt(double(n))));
    CHECK(var == Approx(16.0).epsilon(6.0 / std::sqrt(double(n))));

    for (std::size_t l = 0; l < n; l += 997) {
        CHECK(int(st.z_indicators[l]) == disruption_indicator(st.z_samples[l], 58.0));
        CHECK(int(st.x_indicators[l]) == disruption_indicator(st.x_samples[l], 2.0));
    }
}

TEST_CASE("latent correlation couples the indicator pair") {
    const Instance inst = testing::tiny_instance(1, 1, 1);
    const std::size_t n = 50'000;

    const auto tight = sample_paired_scenarios(inst, n, 3, kDefaultRho);
    std::size_t disagree = 0;
    for (std::size_t l = 0; l < n; ++l)
        disagree += tight.stations[0].z_indicators[l] != tight.stations[0].x_indicators[l];
    // At rho = 0.99999 and a 2-sigma threshold the pair disagrees a few
    // times per hundred thousand draws.
    CHECK(double(disagree) / double(n) < 1e-3);

    const auto loose = sample_paired_scenarios(inst, n, 3, 0.0);
    std::size_t both = 0, z_only = 0;
    for (std::size_t l = 0; l < n; ++l) {
        both += loose.stations[0].z_indicators[l] & loose.stations[0].x_indicators[l];
        z_only += loose.stations[0].z_indicators[l];
    }
    // Independence: P(both) ~ P(z) * P(x) ~ P(z)^2.
    const double pz = double(z_only) / double(n);
    CHECK(double(both) / double(n) == Approx(pz * pz).epsilon(0.02));
}

TEST_CASE("station substreams are independent of station order") {
    Instance two = testing::tiny_instance(2, 1, 1);
    Instance one = testing::tiny_instance(1, 1, 1);
    one.stations[0] = two.stations[1];
    one.travel_time[0][0] = two.travel_time[0][1];
    const auto both = sample_paired_scenarios(two, 64, 21, kDefaultRho);
    const auto alone = sample_paired_scenarios(one, 64, 21, kDefaultRho);
    CHECK(both.stations[1].z_samples == alone.stations[0].z_samples);
}

TEST_CASE("csv export shape") {
    const Instance inst = testing::tiny_instance(2, 1, 1);
    const auto set = sample_paired_scenarios(inst, 3, 5, kDefaultRho);
    const std::string csv = scenarios_to_csv(set);

    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "station,l,z,x,z_ind,x_ind");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 2 * 3);

    // First data row belongs to station 1, sample 1.
    const auto second_line = csv.substr(csv.find('\n') + 1);
    CHECK(second_line.rfind("1,1,", 0) == 0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "chargeopt/errors.hpp"
#include "chargeopt/normal.hpp"
#include "chargeopt/reliability.hpp"
#include "toy_instances.hpp"

using namespace chargeopt;
using doctest::Approx;

namespace {

// Indicator-only scenario set for exercising the estimators on paper.
PairedScenarioSet by_hand(std::vector<std::uint8_t> z, std::vector<std::uint8_t> x,
                          double scaled_threshold) {
    PairedScenarioSet set;
    set.n = z.size();
    set.seed = 0;
    set.latent_correlation = 1.0;
    StationScenarios st;
    st.station_id = 1;
    st.scaled_threshold = scaled_threshold;
    st.z_indicators = std::move(z);
    st.x_indicators = std::move(x);
    set.stations.push_back(std::move(st));
    return set;
}

} // namespace

TEST_CASE("analytic reliabilities of the published stations") {
    const Instance inst = embedded_surabaya_parameters();
    REQUIRE(inst.num_stations() == 11);

    // 25-digit reference computations.
    CHECK(analytic_reliability(inst.stations[0].disruption) ==
          Approx(0.9772647703329292399).epsilon(1e-13));
    CHECK(analytic_reliability(inst.stations[3].disruption) ==
          Approx(0.9791430729593241325).epsilon(1e-13));
    CHECK(analytic_reliability(inst.stations[10].disruption) ==
          Approx(0.9772498680518207928).epsilon(1e-13));

    for (const auto& s : inst.stations) {
        const double direct = standard_normal_cdf(s.disruption.scaled_threshold());
        CHECK(std::abs(analytic_reliability(s.disruption) - direct) <= 1e-10);
    }

    const ReliabilityEstimates est = analytic_reliabilities(inst);
    CHECK(est.method == EstimatorMethod::Analytic);
    REQUIRE(est.stations.size() == 11);
    CHECK(est.stations[4].station_id == 5);
    CHECK(est.stations[4].std_err == 0.0);
    CHECK_FALSE(est.stations[4].cv_coefficient.has_value());
}

TEST_CASE("analytic reliability rejects nonpositive sigma") {
    CHECK_THROWS_AS(analytic_reliability({0.0, 0.0, 1.0}), DomainError);
}

TEST_CASE("hoeffding sample sizes") {
    CHECK(hoeffding_sample_size(0.1, 0.05) == 185);
    CHECK(hoeffding_sample_size(0.0001, 0.05) == 184'443'973);
    CHECK(hoeffding_sample_size(0.1, 2.0) == 0);

    CHECK_THROWS_AS(hoeffding_sample_size(0.0, 0.05), DomainError);
    CHECK_THROWS_AS(hoeffding_sample_size(-0.1, 0.05), DomainError);
    CHECK_THROWS_AS(hoeffding_sample_size(0.1, 0.0), DomainError);
    CHECK_THROWS_AS(hoeffding_sample_size(0.1, 2.5), DomainError);
}

TEST_CASE("monte carlo estimate by hand") {
    const auto set = by_hand({1, 1, 0, 1}, {1, 1, 1, 1}, 0.0);
    const ReliabilityEstimates est = mc_estimate(set);
    REQUIRE(est.stations.size() == 1);
    CHECK(est.stations[0].p_hat == 0.75);
    CHECK(est.stations[0].std_err == Approx(std::sqrt(0.75 * 0.25 / 4.0)).epsilon(1e-15));
    CHECK_FALSE(est.stations[0].cv_coefficient.has_value());
    CHECK(est.method == EstimatorMethod::MC);
}

TEST_CASE("optimal coefficient is minus cov over var") {
    // cov = 1/6, var = 1/4 with (n-1) normalization.
    const std::vector<std::uint8_t> z{1, 1, 0, 0};
    const std::vector<std::uint8_t> x{1, 1, 1, 0};
    CHECK(optimal_cv_coefficient(z, x) == Approx(-2.0 / 3.0).epsilon(1e-15));

    // Perfectly matched pair: full correction.
    CHECK(optimal_cv_coefficient(z, z) == Approx(-1.0).epsilon(1e-15));

    // Constant control carries no information.
    CHECK(optimal_cv_coefficient(z, std::vector<std::uint8_t>{1, 1, 1, 1}) == 0.0);

    CHECK_THROWS_AS(optimal_cv_coefficient(z, std::vector<std::uint8_t>{1, 1, 1}), DomainError);
}

TEST_CASE("control variate estimate by hand") {
    // scaled threshold 0 makes the control mean exactly one half.
    const auto set = by_hand({1, 1, 0, 0}, {1, 1, 1, 0}, 0.0);
    const ReliabilityEstimates est = cv_estimate(set);
    REQUIRE(est.stations.size() == 1);
    REQUIRE(est.stations[0].cv_coefficient.has_value());
    CHECK(*est.stations[0].cv_coefficient == Approx(-2.0 / 3.0).epsilon(1e-15));
    CHECK(est.stations[0].p_hat == Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(est.stations[0].std_err == Approx(std::sqrt(2.0) / 6.0).epsilon(1e-15));

    // pi forced to zero collapses to plain Monte Carlo.
    const ReliabilityEstimates zero = cv_estimate(set, 0.0);
    CHECK(zero.stations[0].p_hat == mc_estimate(set).stations[0].p_hat);

    // A wild coefficient cannot push the estimate out of [0, 1].
    const ReliabilityEstimates wild = cv_estimate(set, 10.0);
    CHECK(wild.stations[0].p_hat >= 0.0);
    CHECK(wild.stations[0].p_hat <= 1.0);
}

TEST_CASE("estimators need two samples") {
    const auto set = by_hand({1}, {1}, 0.0);
    CHECK_THROWS_AS(mc_estimate(set), DomainError);
    CHECK_THROWS_AS(cv_estimate(set), DomainError);
}

TEST_CASE("sampled estimates converge to the analytic value") {
    Instance inst = testing::tiny_instance(2, 1, 1);
    inst.stations[0].disruption = {100.0, 10.0, 120.0};
    inst.stations[1].disruption = {100.0, 10.0, 80.0};
    const double p0 = analytic_reliability(inst.stations[0].disruption);
    const double p1 = analytic_reliability(inst.stations[1].disruption);

    for (EstimatorMethod m : {EstimatorMethod::MC, EstimatorMethod::CV}) {
        const ReliabilityEstimates est = estimate_reliabilities(inst, 20'000, 31, m, kDefaultRho);
        CHECK(est.method == m);
        CHECK(est.n == 20'000);
        CHECK(est.seed == 31);
        CHECK(std::abs(est.stations[0].p_hat - p0) < 5.0 * std::max(est.stations[0].std_err, 1e-6));
        CHECK(std::abs(est.stations[1].p_hat - p1) < 5.0 * std::max(est.stations[1].std_err, 1e-4));
    }

    // Same inputs, same numbers.
    const auto once = estimate_reliabilities(inst, 500, 7, EstimatorMethod::CV, kDefaultRho);
    const auto twice = estimate_reliabilities(inst, 500, 7, EstimatorMethod::CV, kDefaultRho);
    for (std::size_t j = 0; j < once.stations.size(); ++j) {
        CHECK(once.stations[j].p_hat == twice.stations[j].p_hat);
        CHECK(once.stations[j].std_err == twice.stations[j].std_err);
    }
}

TEST_CASE("the control variate shrinks the reported standard error") {
    const Instance inst = embedded_surabaya_parameters();
    const auto set = sample_paired_scenarios(inst, 10'000, 7, kDefaultRho);
    const ReliabilityEstimates mc = mc_estimate(set);
    const ReliabilityEstimates cv = cv_estimate(set);
    for (std::size_t j = 0; j < 11; ++j) {
        CHECK(cv.stations[j].std_err < mc.stations[j].std_err);
    }
}

TEST_CASE("method names") {
    CHECK(method_name(EstimatorMethod::MC) == "mc");
    CHECK(method_name(EstimatorMethod::CV) == "cv");
    CHECK(method_from_name("CV") == EstimatorMethod::CV);
    CHECK(method_from_name("analytic") == EstimatorMethod::Analytic);
    CHECK_THROWS_AS(method_from_name("bootstrap"), DomainError);
}

TEST_CASE("estimates json round-trip") {
    Instance inst = testing::tiny_instance(2, 1, 1);
    const ReliabilityEstimates est = estimate_reliabilities(inst, 256, 5, EstimatorMethod::CV, 0.9);
    const ReliabilityEstimates back = estimates_from_json(estimates_to_json(est));
    CHECK(back.method == est.method);
    CHECK(back.n == est.n);
    CHECK(back.seed == est.seed);
    CHECK(back.rho == est.rho);
    REQUIRE(back.stations.size() == est.stations.size());
    for (std::size_t j = 0; j < est.stations.size(); ++j) {
        CHECK(back.stations[j].station_id == est.stations[j].station_id);
        CHECK(back.stations[j].p_hat == est.stations[j].p_hat);
        CHECK(back.stations[j].std_err == est.stations[j].std_err);
        CHECK(back.stations[j].cv_coefficient == est.stations[j].cv_coefficient);
    }

    const std::string path = "test_reliability_io.json";
    save_estimates(est, path);
    CHECK(load_estimates(path).stations.size() == est.stations.size());
    std::remove(path.c_str());
}

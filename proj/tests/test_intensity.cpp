#include "ranhpp/error.hpp"
#include "ranhpp/intensity.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ranhpp;

namespace {

// Independent oracle: double-exponential quadrature of lambda, which copes with
// the integrable singularity of eta < 1 power laws at zero.
double integrated_intensity(const IntensityModel& m, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> quad;
    return quad.integrate([&](double s) { return intensity(m, s); }, a, b, 1e-14);
}

std::vector<IntensityModel> sample_models() {
    return {IntensityModel::power_law(0.05, 1.5), IntensityModel::power_law(2.0, 0.7),
            IntensityModel::power_law(0.3, 1.0), IntensityModel::log_linear(-1.0, 0.02),
            IntensityModel::log_linear(0.5, -0.3), IntensityModel::log_linear(0.2, 0.0),
            IntensityModel::homogeneous(0.8)};
}

} // namespace

TEST(Intensity, ClosedFormsAtKnownPoints) {
    EXPECT_NEAR(intensity(IntensityModel::power_law(0.05, 1.5), 4.0), 0.05 * 1.5 * 2.0, 1e-15);
    EXPECT_NEAR(mean_function(IntensityModel::power_law(0.05, 1.5), 4.0), 0.4, 1e-15);
    EXPECT_NEAR(mean_function(IntensityModel::log_linear(0.0, 1.0), 1.0), std::exp(1.0) - 1.0, 1e-14);
    EXPECT_NEAR(mean_function(IntensityModel::homogeneous(0.8), 5.0), 4.0, 1e-15);
    // eta = 0 reduces the log-linear model to a constant rate e^gamma.
    EXPECT_NEAR(mean_function(IntensityModel::log_linear(0.2, 0.0), 3.0), 3.0 * std::exp(0.2), 1e-14);
}

TEST(Intensity, MeanFunctionMatchesQuadrature) {
    for (const auto& m : sample_models()) {
        for (double t : {0.5, 3.0, 17.0}) {
            EXPECT_NEAR(mean_function(m, t), integrated_intensity(m, 0.0, t), 1e-9 * (1.0 + mean_function(m, t)))
                << to_string(m.kind()) << " t=" << t;
        }
    }
}

TEST(Intensity, IncrementEqualsDifferenceAndIsAccurateForTinyGaps) {
    for (const auto& m : sample_models()) {
        for (double t : {0.0, 1.0, 40.0}) {
            const double x = 2.5;
            EXPECT_NEAR(mean_increment(m, t, x), mean_function(m, t + x) - mean_function(m, t),
                        1e-11 * (1.0 + mean_function(m, t + x)));
        }
        if (m.kind() == IntensityKind::PowerLaw && m.eta() < 1.0) continue;
        // Tiny gaps: increment ~ lambda(t) x without cancellation.
        const double t = 10.0, x = 1e-10;
        EXPECT_NEAR(mean_increment(m, t, x) / (intensity(m, t) * x), 1.0, 1e-6);
    }
}

TEST(Intensity, InverseIncrementRoundTrip) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (const auto& m : sample_models()) {
        for (int k = 0; k < 200; ++k) {
            const double t = 50.0 * unif(rng);
            const double target = -std::log(unif(rng));
            const double x = invert_mean_increment(m, t, target);
            if (!std::isfinite(x)) {
                EXPECT_LT(remaining_mean(m, t), target);
                continue;
            }
            EXPECT_NEAR(mean_increment(m, t, x), target, 1e-10 * (1.0 + target));
        }
    }
}

TEST(Intensity, RemainingMeanOnlyFiniteForDecayingLogLinear) {
    const auto decaying = IntensityModel::log_linear(0.5, -0.3);
    EXPECT_NEAR(remaining_mean(decaying, 2.0), std::exp(0.5 - 0.6) / 0.3, 1e-12);
    EXPECT_TRUE(std::isinf(remaining_mean(IntensityModel::power_law(1.0, 1.2), 2.0)));
    EXPECT_TRUE(std::isinf(invert_mean_increment(decaying, 2.0, 100.0)));
}

TEST(Intensity, MonotoneMeanFunction) {
    for (const auto& m : sample_models()) {
        double prev = 0.0;
        for (double t = 0.25; t < 30.0; t += 0.25) {
            const double v = mean_function(m, t);
            EXPECT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(Intensity, RiskAdjustment) {
    const auto m = IntensityModel::power_law(0.05, 1.5);
    const RiskModel risk{{0.5, -1.0}};
    const std::vector<double> z = {2.0, 1.0};
    EXPECT_NEAR(risk_multiplier(risk, z), 1.0, 1e-15);
    const std::vector<double> z2 = {1.0, 0.0};
    EXPECT_NEAR(adjusted_mean_function(m, risk, z2, 4.0), 0.4 * std::exp(0.5), 1e-14);
    EXPECT_NEAR(adjusted_intensity(m, risk, z2, 4.0), 0.15 * std::exp(0.5), 1e-14);
    EXPECT_THROW(risk_multiplier(risk, std::vector<double>{1.0}), DimensionError);
    EXPECT_NEAR(risk_multiplier(RiskModel{}, std::vector<double>{}), 1.0, 0.0);
}

TEST(Intensity, DomainErrors) {
    EXPECT_THROW(IntensityModel::power_law(-1.0, 1.5), DomainError);
    EXPECT_THROW(IntensityModel::power_law(1.0, 0.0), DomainError);
    EXPECT_THROW(IntensityModel::homogeneous(0.0), DomainError);
    EXPECT_THROW(intensity(IntensityModel::power_law(1.0, 0.5), 0.0), DomainError);
    EXPECT_THROW(mean_function(IntensityModel::homogeneous(1.0), -1.0), DomainError);
    EXPECT_THROW(parse_intensity_kind("weibull"), ConfigError);
    EXPECT_EQ(parse_intensity_kind(to_string(IntensityKind::LogLinear)), IntensityKind::LogLinear);
}

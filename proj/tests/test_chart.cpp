#include "ranhpp/chart.hpp"
#include "ranhpp/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace ranhpp;

namespace {

ProcessParams gumbel_power(double beta = 0.5, double tau = 0.3) {
    return {IntensityModel::power_law(0.05, 1.5), RiskModel{{beta}}, 1.0,
            CopulaSpec::from_tau(CopulaFamily::Gumbel, tau)};
}

std::vector<FailureEvent> toy_stream() {
    const ProcessParams p = gumbel_power();
    Engine rng(31);
    return simulate_stream(p, CovariateGenerator::truncated_poisson(), 40, rng);
}

} // namespace

TEST(Chart, QuantilePositions) {
    const auto w = quantile_position(10'000, 0.0025, QuantileRule::Weibull);
    EXPECT_EQ(w.lower, 24u);
    EXPECT_NEAR(w.fraction, 0.0025, 1e-9);
    const auto l = quantile_position(10'000, 0.0025, QuantileRule::Linear);
    EXPECT_EQ(l.lower, 24u);
    EXPECT_NEAR(l.fraction, 0.9975, 1e-9);
    EXPECT_EQ(quantile_position(5, 1.0, QuantileRule::Weibull).lower, 4u);
    EXPECT_EQ(quantile_position(5, 0.0, QuantileRule::Linear).lower, 0u);
    EXPECT_THROW(quantile_position(0, 0.5, QuantileRule::Linear), DomainError);
    EXPECT_EQ(parse_quantile_rule("type6"), QuantileRule::Weibull);
    EXPECT_EQ(parse_quantile_rule("type7"), QuantileRule::Linear);
}

TEST(Chart, EmpiricalQuantileMatchesSortedInterpolation) {
    Engine rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(37 + rep);
        for (auto& x : v) x = standard_exponential(rng);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (double p : {0.0025, 0.1, 0.5, 0.9975}) {
            for (auto rule : {QuantileRule::Weibull, QuantileRule::Linear}) {
                const auto pos = quantile_position(v.size(), p, rule);
                const double hi = sorted[std::min(pos.lower + 1, v.size() - 1)];
                const double expected = sorted[pos.lower] + pos.fraction * (hi - sorted[pos.lower]);
                std::vector<double> copy = v;
                EXPECT_DOUBLE_EQ(empirical_quantile(copy, p, rule), expected);
            }
        }
    }
}

// Property: with integral positions the Weibull rule is unbiased in probability,
// E[F(q_p)] = p. For uniforms and N = 99, p = 0.1 selects U_(10), mean 10/100.
TEST(Chart, WeibullRuleIsUnbiasedInProbability) {
    Engine rng(8);
    const int reps = 20'000;
    double sum = 0.0, sum_lin = 0.0;
    std::vector<double> v(99);
    for (int r = 0; r < reps; ++r) {
        for (auto& x : v) x = uniform_open(rng);
        std::vector<double> c = v;
        sum += empirical_quantile(v, 0.1, QuantileRule::Weibull);
        sum_lin += empirical_quantile(c, 0.1, QuantileRule::Linear);
    }
    const double se = std::sqrt(0.1 * 0.9 / 101.0 / reps);
    EXPECT_NEAR(sum / reps, 0.1, 4 * se);
    // The linear rule sits at position 10.8 of 99, mean 10.8/100.
    EXPECT_NEAR(sum_lin / reps, 0.108, 4 * se);
}

TEST(Chart, ClassifyIsStrict) {
    EXPECT_EQ(classify(1.0, 1.0, 2.0), Signal::InControl);
    EXPECT_EQ(classify(2.0, 1.0, 2.0), Signal::InControl);
    EXPECT_EQ(classify(0.999, 1.0, 2.0), Signal::BelowLCL);
    EXPECT_EQ(classify(2.001, 1.0, 2.0), Signal::AboveUCL);
    EXPECT_EQ(to_string(Signal::BelowLCL), "below-lcl");
}

TEST(Chart, WCdfClosedFormUnderIndependence) {
    // X ~ Exp(lambda), Y ~ Exp(mu) independent: P(Y/X <= w) = mu w / (lambda + mu w).
    const ProcessParams p{IntensityModel::homogeneous(0.4), RiskModel{{0.7}}, 2.5, CopulaSpec::independence()};
    const std::vector<double> z = {2.0};
    const double lambda = 0.4 * std::exp(1.4);
    for (double w : {1e-4, 0.01, 0.3, 1.0, 7.0, 300.0, 1e5}) {
        const double exact = 2.5 * w / (lambda + 2.5 * w);
        EXPECT_NEAR(w_cdf(p, 3.0, z, w), exact, 1e-9 * std::max(1.0, exact)) << w;
        EXPECT_NEAR(1.0 - w_cdf(p, 3.0, z, w), lambda / (lambda + 2.5 * w), 2e-9) << w;
    }
}

TEST(Chart, WCdfMatchesSimulation) {
    const std::vector<double> z = {2.0};
    for (const auto& p : {gumbel_power(0.5, 0.8),
                          ProcessParams{IntensityModel::log_linear(0.3, -0.2), RiskModel{{0.5}}, 1.0,
                                        CopulaSpec::clayton(2.0)},
                          ProcessParams{IntensityModel::log_linear(-2.0, 0.1), RiskModel{{-0.5}}, 0.5,
                                        CopulaSpec::from_tau(CopulaFamily::Frank, -0.5)}}) {
        Engine rng(17);
        std::vector<double> ws;
        const std::size_t n = 100'000;
        simulate_w(p, 4.0, z, n, rng, ws);
        for (double q : {0.01, 0.3, 0.5, 0.8, 0.99}) {
            std::vector<double> c = ws;
            const double w = empirical_quantile(c, q, QuantileRule::Weibull);
            const double emp = static_cast<double>(std::count_if(ws.begin(), ws.end(), [&](double v) { return v <= w; })) / n;
            EXPECT_NEAR(w_cdf(p, 4.0, z, w), emp, 4.0 * std::sqrt(emp * (1 - emp) / n) + 1e-6);
        }
    }
}

TEST(Chart, WQuantileInvertsCdf) {
    const auto p = gumbel_power(0.5, 0.8);
    const std::vector<double> z = {1.0};
    for (double t_prev : {0.0, 10.0, 300.0}) {
        for (double q : {0.0025, 0.5, 0.9975}) {
            const double w = w_quantile(p, t_prev, z, q);
            EXPECT_NEAR(w_cdf(p, t_prev, z, w), q, 1e-8 * std::max(1.0, q / (1 - q)));
        }
    }
}

TEST(Chart, MonteCarloLimitsTrackExactLimits) {
    const auto p = gumbel_power(0.5, 0.3);
    const std::vector<double> z = {2.0};
    ChartConfig cfg;
    cfg.n_mc = 40'000;
    Engine rng(4);
    const Limits mc = control_limits(p, 12.0, z, cfg, rng);
    const Limits exact = exact_control_limits(p, 12.0, z, cfg.alpha);
    const double half = cfg.alpha / 2;
    const double band = 4.0 * std::sqrt(half * (1 - half) / cfg.n_mc);
    EXPECT_NEAR(w_cdf(p, 12.0, z, mc.lcl), half, band);
    EXPECT_NEAR(w_cdf(p, 12.0, z, mc.ucl), 1 - half, band);
    EXPECT_LT(exact.lcl, exact.ucl);
}

TEST(Chart, IndexedLimitsAreReproducible) {
    const auto p = gumbel_power();
    const std::vector<double> z = {1.0};
    ChartConfig cfg;
    const Limits a = control_limits(p, 5.0, z, cfg, std::size_t{7});
    const Limits b = control_limits(p, 5.0, z, cfg, std::size_t{7});
    const Limits c = control_limits(p, 5.0, z, cfg, std::size_t{8});
    EXPECT_EQ(a.lcl, b.lcl);
    EXPECT_EQ(a.ucl, b.ucl);
    EXPECT_NE(a.lcl, c.lcl);
}

TEST(Chart, MarginalLimits) {
    const auto p = gumbel_power(2.0);
    const std::vector<double> z = {3.0};
    const Limits tbe = marginal_limits(p, 9.0, z, 0.005, ChartMode::TBEOnly);
    EXPECT_DOUBLE_EQ(tbe.lcl, tbe_quantile(p, 9.0, z, 0.0025));
    EXPECT_DOUBLE_EQ(tbe.ucl, tbe_quantile(p, 9.0, z, 0.9975));
    const Limits plain = marginal_limits(p, 9.0, z, 0.005, ChartMode::TBENoRisk);
    const ProcessParams zero{p.intensity, RiskModel{{0.0}}, p.cost_rate, p.copula};
    EXPECT_DOUBLE_EQ(plain.lcl, tbe_quantile(zero, 9.0, z, 0.0025));
    EXPECT_DOUBLE_EQ(plain.ucl, tbe_quantile(zero, 9.0, z, 0.9975));
    EXPECT_GT(plain.ucl, tbe.ucl);
    const Limits tc = marginal_limits(p, 9.0, z, 0.005, ChartMode::TCOnly);
    EXPECT_NEAR(tc.lcl, -std::log(1 - 0.0025), 1e-15);
    EXPECT_NEAR(tc.ucl, -std::log(0.0025), 1e-13);
    EXPECT_THROW(marginal_limits(p, 9.0, z, 0.005, ChartMode::AC), DomainError);
}

TEST(Chart, RunChartConditionsOnPreviousFailure) {
    const auto p = gumbel_power();
    const auto stream = toy_stream();
    ChartConfig cfg;
    cfg.n_mc = 2000;
    cfg.workers = 1;
    const auto points = run_chart(stream, p, cfg);
    ASSERT_EQ(points.size(), stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const auto& ev = stream[i];
        const Limits lim = control_limits(p, std::max(0.0, ev.t - ev.x), ev.z, cfg, ev.index);
        EXPECT_EQ(points[i].lcl, lim.lcl);
        EXPECT_EQ(points[i].ucl, lim.ucl);
        EXPECT_DOUBLE_EQ(points[i].w, ev.y / ev.x);
        EXPECT_EQ(points[i].signal, classify(points[i].w, lim.lcl, lim.ucl));
    }
    cfg.workers = 4;
    const auto parallel = run_chart(stream, p, cfg);
    for (std::size_t i = 0; i < stream.size(); ++i) EXPECT_EQ(parallel[i].lcl, points[i].lcl);
}

TEST(Chart, MarginalChartsChartTheRightStatistic) {
    const auto p = gumbel_power();
    const auto stream = toy_stream();
    ChartConfig cfg;
    cfg.mode = ChartMode::TBEOnly;
    auto pts = run_marginal_chart(stream, p, cfg);
    for (std::size_t i = 0; i < stream.size(); ++i) EXPECT_EQ(pts[i].w, stream[i].x);
    cfg.mode = ChartMode::TCOnly;
    pts = run_marginal_chart(stream, p, cfg);
    for (std::size_t i = 0; i < stream.size(); ++i) EXPECT_EQ(pts[i].w, stream[i].y);
    cfg.mode = ChartMode::AC;
    EXPECT_THROW(run_marginal_chart(stream, p, cfg), DomainError);
}

TEST(Chart, RejectsBadStreams) {
    const auto p = gumbel_power();
    auto stream = toy_stream();
    std::swap(stream[3], stream[4]);
    EXPECT_THROW(run_chart(stream, p, ChartConfig{}), DomainError);
    stream = toy_stream();
    stream[2].x = 0.0;
    EXPECT_THROW(run_chart(stream, p, ChartConfig{}), DomainError);
    ChartConfig bad;
    bad.alpha = 1.5;
    EXPECT_THROW(bad.validate(), DomainError);
    bad = ChartConfig{};
    bad.n_mc = 10;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Chart, SummaryCountsSignals) {
    std::vector<ChartPoint> pts(5);
    pts[1].signal = Signal::BelowLCL;
    pts[3].signal = Signal::BelowLCL;
    pts[4].signal = Signal::AboveUCL;
    const auto s = summarize(pts);
    EXPECT_EQ(s.points, 5u);
    EXPECT_EQ(s.below_lcl, 2u);
    EXPECT_EQ(s.above_ucl, 1u);
}

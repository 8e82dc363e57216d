#include "ranhpp/arl.hpp"
#include "ranhpp/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ranhpp;

namespace {

ProcessParams ic_params(double beta = 0.0, double tau = 0.3) {
    return {IntensityModel::power_law(0.05, 1.5), RiskModel{{beta}}, 1.0,
            CopulaSpec::from_tau(CopulaFamily::Gumbel, tau)};
}

// N = 1999 and alpha = 0.05 put both limits on whole order statistics of rank
// 50 and 1950, so an in-control chart signals with probability exactly 0.05.
ArlConfig exact_config(ArlEngine engine) {
    ArlConfig cfg;
    cfg.alpha = 0.05;
    cfg.n_mc = 1999;
    cfg.engine = engine;
    cfg.seed = 77;
    return cfg;
}

} // namespace

TEST(Arl, GeometricSurvival) {
    EXPECT_NEAR(geometric_survival(0.005, 200), std::pow(0.995, 200), 1e-14);
    EXPECT_NEAR(geometric_survival(0.005, 200), 0.3670, 1e-4);
    EXPECT_DOUBLE_EQ(geometric_survival(0.3, 0), 1.0);
    EXPECT_THROW(geometric_survival(0.0, 3), DomainError);
}

TEST(Arl, ShiftApplication) {
    const auto p = ic_params();
    const auto s = apply_shift(p, {2.0, 0.5, 1.25});
    EXPECT_DOUBLE_EQ(s.intensity.gamma(), 0.1);
    EXPECT_DOUBLE_EQ(s.intensity.eta(), 0.75);
    EXPECT_DOUBLE_EQ(s.cost_rate, 1.25);
    EXPECT_EQ(s.risk.beta, p.risk.beta);
    EXPECT_THROW(apply_shift(p, {0.0, 1.0, 1.0}), DomainError);
    const ProcessParams hpp{IntensityModel::homogeneous(1.0), {}, 1.0, CopulaSpec::independence()};
    EXPECT_THROW(apply_shift(hpp, {1.0, 2.0, 1.0}), DomainError);
    EXPECT_DOUBLE_EQ(apply_shift(hpp, {3.0, 1.0, 1.0}).intensity.gamma(), 3.0);
    EXPECT_TRUE((ShiftSpec{1.0, 1.0, 1.0}.in_control()));
}

TEST(Arl, DegenerateAlphaGivesTwo) {
    ArlConfig cfg;
    cfg.alpha = 0.5;
    cfg.n_mc = 1000;
    const auto r = estimate_arl(ic_params(), ShiftSpec{}, CovariateGenerator::truncated_poisson(), cfg, 2000);
    EXPECT_NEAR(r.arl, 2.0, 4 * r.std_error);
}

TEST(Arl, InControlRunLengthIsGeometricForBothEngines) {
    for (auto engine : {ArlEngine::OrderStatistic, ArlEngine::MonteCarlo}) {
        ArlConfig cfg = exact_config(engine);
        cfg.keep_samples = true;
        const std::size_t reps = engine == ArlEngine::MonteCarlo ? 300 : 3000;
        const auto r = estimate_arl(ic_params(0.5), ShiftSpec{}, CovariateGenerator::truncated_poisson(), cfg, reps);
        EXPECT_NEAR(r.arl, 20.0, 4 * r.std_error) << to_string(engine);
        if (engine == ArlEngine::OrderStatistic) {
            const std::size_t at[] = {5, 10, 20, 40};
            EXPECT_TRUE(geometric_check(r.rl_samples, 0.05, at).pass);
        }
    }
}

TEST(Arl, EnginesAgreeOutOfControl) {
    const ShiftSpec shift{0.75, 0.75, 1.0};
    const auto gen = CovariateGenerator::truncated_poisson();
    const auto os = estimate_arl(ic_params(), shift, gen, exact_config(ArlEngine::OrderStatistic), 2000);
    const auto mc = estimate_arl(ic_params(), shift, gen, exact_config(ArlEngine::MonteCarlo), 300);
    EXPECT_NEAR(os.arl, mc.arl, 4 * std::hypot(os.std_error, mc.std_error));
}

TEST(Arl, ResultsDoNotDependOnWorkerCount) {
    ArlConfig cfg = exact_config(ArlEngine::OrderStatistic);
    cfg.keep_samples = true;
    cfg.workers = 1;
    const auto gen = CovariateGenerator::truncated_poisson();
    const auto a = estimate_arl(ic_params(), ShiftSpec{1.25, 1.0, 1.0}, gen, cfg, 200);
    cfg.workers = 3;
    const auto b = estimate_arl(ic_params(), ShiftSpec{1.25, 1.0, 1.0}, gen, cfg, 200);
    EXPECT_EQ(a.rl_samples, b.rl_samples);
    EXPECT_EQ(a.arl, b.arl);
}

TEST(Arl, MarginalModesUseExactLimits) {
    ArlConfig cfg;
    cfg.alpha = 0.05;
    for (auto mode : {ChartMode::TBEOnly, ChartMode::TCOnly}) {
        cfg.mode = mode;
        const auto r = estimate_arl(ic_params(0.5), ShiftSpec{}, CovariateGenerator::truncated_poisson(), cfg, 3000);
        EXPECT_NEAR(r.arl, 20.0, 4 * r.std_error) << to_string(mode);
    }
}

TEST(Arl, EventCapIsReported) {
    ArlConfig cfg;
    cfg.event_cap = 1;
    const auto r = estimate_arl(ic_params(), ShiftSpec{}, CovariateGenerator::truncated_poisson(), cfg, 400);
    EXPECT_EQ(r.n_reps + r.n_capped, 400u);
    EXPECT_GT(r.n_capped, 380u);
    Engine rng(1);
    cfg.alpha = 1e-9;
    EXPECT_THROW(simulate_run_length(ic_params(), ic_params(), CovariateGenerator::truncated_poisson(), cfg, rng),
                 RunLengthCapError);
}

TEST(Arl, GeometricCheckDetectsWrongLaw) {
    std::mt19937_64 rng(5);
    std::geometric_distribution<std::size_t> geo(0.005), fast(0.01);
    std::vector<std::size_t> good(20'000), bad(20'000);
    for (auto& v : good) v = geo(rng) + 1;
    for (auto& v : bad) v = fast(rng) + 1;
    EXPECT_TRUE(geometric_check(good, 0.005).pass);
    EXPECT_FALSE(geometric_check(bad, 0.005).pass);
    EXPECT_EQ(geometric_check(good, 0.005).points.size(), 4u);
}

TEST(Arl, StandardGrid) {
    const auto rows = standard_shift_rows();
    ASSERT_EQ(rows.size(), 17u);
    EXPECT_EQ(rows[2], (std::pair<double, double>{1.0, 1.0}));
    const auto g = standard_grid();
    EXPECT_EQ(g.delta_mu.size(), 5u);
    EXPECT_EQ(g.betas.size(), 5u);
    EXPECT_EQ(g.taus, (std::vector<double>{0.3, 0.8}));

    GridSpec small{{{1.0, 1.0}, {2.0, 2.0}}, {1.0}, {0.0, 2.0}, {0.3}};
    ArlConfig cfg = exact_config(ArlEngine::OrderStatistic);
    const auto cells = arl_grid(ic_params(), small, CovariateGenerator::truncated_poisson(), cfg, 50);
    ASSERT_EQ(cells.size(), 4u);
    EXPECT_EQ(cells[3].beta, 2.0);
    EXPECT_EQ(cells[3].shift.delta_eta, 2.0);
}

TEST(Arl, UnadjustedChartMisbehavesUnderStrongRisk) {
    ArlConfig cfg;
    const auto truth = ic_params(2.0);
    const std::pair<double, double> ic[] = {{1.0, 1.0}};
    const auto rows = compare_tbe_charts(truth, truth, without_risk(truth), ic, CovariateGenerator::truncated_poisson(),
                                         cfg, 400);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].risk_adjusted.arl, 200.0, 4 * rows[0].risk_adjusted.std_error);
    EXPECT_LT(rows[0].unadjusted.arl, 40.0);
}

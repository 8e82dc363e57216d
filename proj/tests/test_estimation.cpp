#include "ranhpp/error.hpp"
#include "ranhpp/estimation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace ranhpp;

namespace {

ProcessParams truth(IntensityKind kind, double gamma, double eta, double beta, CopulaSpec copula, double mu = 1.0) {
    return {IntensityModel::make(kind, gamma, eta), RiskModel{{beta}}, mu, copula};
}

std::vector<FailureEvent> simulate(const ProcessParams& p, std::size_t n, std::uint64_t seed) {
    Engine rng(seed);
    return simulate_stream(p, CovariateGenerator::truncated_poisson(), n, rng);
}

// Independent oracle: the likelihood as a product of conditional TBE densities.
double sum_log_pdf(const ProcessParams& p, std::span<const FailureEvent> events) {
    double s = 0.0;
    for (const auto& e : events) s += std::log(tbe_pdf(p, std::max(0.0, e.t - e.x), e.z, e.x));
    return s;
}

} // namespace

TEST(Estimation, LogLikelihoodEqualsSumOfLogDensities) {
    const std::vector<ProcessParams> cases = {
        truth(IntensityKind::PowerLaw, 0.05, 1.5, 0.5, CopulaSpec::independence()),
        truth(IntensityKind::PowerLaw, 1.3, 0.6, -0.7, CopulaSpec::independence()),
        truth(IntensityKind::LogLinear, -1.0, 0.01, 0.3, CopulaSpec::independence()),
        truth(IntensityKind::LogLinear, 0.2, -0.002, 0.3, CopulaSpec::independence()),
        truth(IntensityKind::Homogeneous, 0.7, 1.0, 1.1, CopulaSpec::independence())};
    for (const auto& p : cases) {
        const auto ev = simulate(p, 300, 3);
        const double closed = tbe_log_likelihood(p.intensity, p.risk, ev);
        EXPECT_NEAR(closed, sum_log_pdf(p, ev), 1e-8 * std::max(1.0, std::abs(closed))) << to_string(p.intensity.kind());
    }
}

TEST(Estimation, ScoreMatchesFiniteDifferences) {
    struct Case {
        IntensityKind kind;
        double gamma, eta;
    };
    for (const auto& c : {Case{IntensityKind::PowerLaw, 0.05, 1.5}, Case{IntensityKind::LogLinear, -1.0, 0.02},
                          Case{IntensityKind::LogLinear, -1.0, 1e-7}, Case{IntensityKind::Homogeneous, 0.5, 1.0}}) {
        const auto p = truth(c.kind, c.gamma, c.eta, 0.4, CopulaSpec::independence());
        const auto ev = simulate(p, 200, 9);
        const std::vector<double> beta = {0.4};
        const auto g = tbe_score(c.kind, c.gamma, c.eta, beta, ev);
        std::vector<double> x = {c.gamma};
        if (c.kind != IntensityKind::Homogeneous) x.push_back(c.eta);
        x.push_back(0.4);
        ASSERT_EQ(g.size(), x.size());
        auto ll = [&](const std::vector<double>& v) {
            const double eta = c.kind == IntensityKind::Homogeneous ? 1.0 : v[1];
            return tbe_log_likelihood(c.kind, v[0], eta, std::span<const double>(&v.back(), 1), ev);
        };
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double h = 1e-6 * std::max(1e-3, std::abs(x[k]));
            auto up = x, dn = x;
            up[k] += h;
            dn[k] -= h;
            const double fd = (ll(up) - ll(dn)) / (2 * h);
            EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << to_string(c.kind) << " k=" << k;
        }
    }
}

TEST(Estimation, CostRateClosedForm) {
    const std::vector<double> y = {0.5, 1.5, 2.0, 4.0};
    EXPECT_DOUBLE_EQ(fit_cost_rate(y), 0.5);
    EXPECT_NEAR(cost_log_likelihood(0.5, y), 4 * std::log(0.5) - 0.5 * 8.0, 1e-14);
    EXPECT_THROW(fit_cost_rate(std::vector<double>{}), DomainError);
    EXPECT_THROW(fit_cost_rate(std::vector<double>{1.0, -1.0}), DomainError);
}

TEST(Estimation, RecoversPowerLawWithCovariate) {
    const auto p = truth(IntensityKind::PowerLaw, 0.05, 1.5, 0.5, CopulaSpec::independence());
    const auto ev = simulate(p, 5000, 12);
    const TbeFit fit = fit_tbe(IntensityKind::PowerLaw, ev);
    EXPECT_TRUE(fit.convergence.converged) << fit.convergence.status;
    // ln gamma-hat has a sampling sd near 0.16 at n = 5000 (it trades off against
    // eta-hat through ln T), so gamma gets a 3 sd band on the log scale.
    EXPECT_NEAR(std::log(fit.intensity.gamma()), std::log(0.05), 0.5);
    EXPECT_NEAR(fit.intensity.eta(), 1.5, 0.1 * 1.5);
    EXPECT_NEAR(fit.risk.beta.at(0), 0.5, 0.1 * 0.5);
    // The maximum is a stationary point with a higher likelihood than the truth.
    EXPECT_GE(fit.log_lik, tbe_log_likelihood(p.intensity, p.risk, ev));
    const auto g = tbe_score(IntensityKind::PowerLaw, fit.intensity.gamma(), fit.intensity.eta(), fit.risk.beta, ev);
    EXPECT_LT(std::abs(g[1]) + std::abs(g[2]), 1e-2);
}

TEST(Estimation, IgnoringTheCovariateInflatesGamma) {
    const auto p = truth(IntensityKind::PowerLaw, 0.05, 1.5, 0.5, CopulaSpec::independence());
    const auto ev = simulate(p, 5000, 12);
    const TbeFit plain = fit_tbe(IntensityKind::PowerLaw, strip_covariates(ev));
    EXPECT_TRUE(plain.risk.beta.empty());
    EXPECT_GT(plain.intensity.gamma(), 0.08);
}

TEST(Estimation, RecoversLogLinearAndHomogeneous) {
    const auto ll = truth(IntensityKind::LogLinear, -1.0, 0.002, 0.8, CopulaSpec::independence());
    const TbeFit f1 = fit_tbe(IntensityKind::LogLinear, simulate(ll, 3000, 4));
    EXPECT_NEAR(f1.intensity.gamma(), -1.0, 0.15);
    EXPECT_NEAR(f1.intensity.eta(), 0.002, 0.0005);
    EXPECT_NEAR(f1.risk.beta[0], 0.8, 0.1);
    const auto hpp = truth(IntensityKind::Homogeneous, 0.3, 1.0, -0.5, CopulaSpec::independence());
    const TbeFit f2 = fit_tbe(IntensityKind::Homogeneous, simulate(hpp, 3000, 5));
    EXPECT_NEAR(f2.intensity.gamma(), 0.3, 0.05);
    EXPECT_NEAR(f2.risk.beta[0], -0.5, 0.08);
}

TEST(Estimation, FitRejectsBadInput) {
    const auto p = truth(IntensityKind::PowerLaw, 0.05, 1.5, 0.5, CopulaSpec::independence());
    auto ev = simulate(p, 3, 1);
    EXPECT_THROW(fit_tbe(IntensityKind::PowerLaw, ev), DomainError);
    ev = simulate(p, 50, 1);
    ev[10].z = {1.0, 2.0};
    EXPECT_THROW(fit_tbe(IntensityKind::PowerLaw, ev), DimensionError);
    EXPECT_THROW(tbe_log_likelihood(IntensityKind::PowerLaw, -1.0, 1.0, std::vector<double>{0.0}, simulate(p, 10, 2)),
                 DomainError);
}

TEST(Estimation, CopulaFitRecoversTau) {
    for (auto [fam, tau] : std::vector<std::pair<CopulaFamily, double>>{
             {CopulaFamily::Gumbel, 0.3}, {CopulaFamily::Gumbel, 0.8}, {CopulaFamily::Clayton, 0.4},
             {CopulaFamily::Frank, -0.3}, {CopulaFamily::Frank, 0.6}}) {
        const auto spec = CopulaSpec::from_tau(fam, tau);
        Engine rng(13);
        std::vector<std::pair<double, double>> pairs;
        for (int i = 0; i < 4000; ++i) {
            const auto p = sample_pair(spec, rng);
            pairs.emplace_back(p.u, p.v);
        }
        const CopulaFit fit = fit_copula(fam, pairs);
        EXPECT_NEAR(fit.copula.tau(), tau, 0.03) << to_string(fam);
        EXPECT_TRUE(fit.convergence.converged);
        EXPECT_NEAR(fit.log_lik, log_likelihood(fit.copula, pairs), 1e-9 * std::abs(fit.log_lik) + 1e-9);
        // Bounded search found the maximum: small moves never improve it.
        if (fam != CopulaFamily::Gumbel || fit.copula.theta() > 1.01) {
            for (double d : {-1e-3, 1e-3}) {
                const auto nearby = CopulaSpec::make(fam, fit.copula.theta() + d);
                EXPECT_LE(log_likelihood(nearby, pairs), fit.log_lik + 1e-9);
            }
        }
    }
}

TEST(Estimation, PseudoObservationsAreClamped) {
    const auto p = truth(IntensityKind::PowerLaw, 0.05, 1.5, 0.5, CopulaSpec::independence());
    auto ev = simulate(p, 20, 6);
    ev[3].y = 1e-300;
    ev[4].y = 1e6;
    const auto po = pseudo_observations(p, ev);
    ASSERT_EQ(po.size(), 20u);
    EXPECT_DOUBLE_EQ(po[3].second, kPseudoObservationClamp);
    EXPECT_DOUBLE_EQ(po[4].second, 1.0 - kPseudoObservationClamp);
    EXPECT_NEAR(po[0].first, tbe_cdf(p, 0.0, ev[0].z, ev[0].x), 1e-15);
}

TEST(Estimation, SelectionPicksTheGeneratingModel) {
    const auto p = truth(IntensityKind::PowerLaw, 0.05, 1.5, 0.5, CopulaSpec::from_tau(CopulaFamily::Gumbel, 0.5), 2.0);
    const auto ev = simulate(p, 2000, 21);
    const IntensityKind kinds[] = {IntensityKind::PowerLaw, IntensityKind::LogLinear, IntensityKind::Homogeneous};
    const CopulaFamily fams[] = {CopulaFamily::Gumbel, CopulaFamily::Frank, CopulaFamily::Clayton};
    const FitResult fit = select_model(ev, kinds, fams);
    EXPECT_EQ(fit.params.intensity.kind(), IntensityKind::PowerLaw);
    EXPECT_EQ(fit.params.copula.family(), CopulaFamily::Gumbel);
    EXPECT_NEAR(fit.params.copula.tau(), 0.5, 0.04);
    EXPECT_NEAR(fit.params.cost_rate, 2.0, 0.15);
    EXPECT_EQ(fit.k, 2 + 1 + 1 + 1);
    EXPECT_NEAR(fit.aic, aic(fit.log_lik_x + fit.log_lik_y + fit.log_lik_c, fit.k), 1e-9);
    ASSERT_EQ(fit.hazard_ratios.size(), 1u);
    EXPECT_DOUBLE_EQ(fit.hazard_ratios[0], std::exp(fit.params.risk.beta[0]));
    EXPECT_EQ(fit.intensity_candidates.size(), 3u);
    EXPECT_EQ(fit.copula_candidates.size(), 3u);
    EXPECT_EQ(fit.n_events, 2000u);

    const FitResult same = fit_model(ev, IntensityKind::PowerLaw, CopulaFamily::Gumbel);
    EXPECT_NEAR(same.aic, fit.aic, 1e-6);
    // Selection is deterministic whatever the worker count.
    const FitResult serial = select_model(ev, kinds, fams, {}, 1);
    EXPECT_EQ(serial.aic, fit.aic);
}

#include "ranhpp/copula.hpp"
#include "ranhpp/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace ranhpp;

namespace {

std::vector<CopulaSpec> specs() {
    return {CopulaSpec::gumbel(1.0),   CopulaSpec::gumbel(1.43), CopulaSpec::gumbel(5.0),
            CopulaSpec::clayton(0.5),  CopulaSpec::clayton(6.0), CopulaSpec::frank(-4.0),
            CopulaSpec::frank(0.3),    CopulaSpec::frank(12.0),  CopulaSpec::independence()};
}

const std::vector<double> kGrid = {0.03, 0.2, 0.5, 0.77, 0.96};

// Test-side Kendall tau for an Archimedean generator: 1 + 4 int phi/phi'.
double archimedean_tau(double theta) {
    auto ratio = [theta](double t) {
        const double phi = -std::log(std::expm1(-theta * t) / std::expm1(-theta));
        const double dphi = theta * std::exp(-theta * t) / std::expm1(-theta * t);
        return phi / dphi;
    };
    return 1.0 + 4.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(ratio, 0.0, 1.0, 15, 1e-13);
}

double naive_tau(const std::vector<double>& a, const std::vector<double>& b) {
    double conc = 0.0, disc = 0.0, tie_a = 0.0, tie_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double s = (a[i] - a[j]) * (b[i] - b[j]);
            if (a[i] == a[j] && b[i] == b[j]) continue;
            if (a[i] == a[j]) tie_a += 1;
            else if (b[i] == b[j]) tie_b += 1;
            else if (s > 0) conc += 1;
            else disc += 1;
        }
    }
    return (conc - disc) / std::sqrt((conc + disc + tie_a) * (conc + disc + tie_b));
}

} // namespace

TEST(Copula, BoundaryConditionsAndFrechetBounds) {
    for (const auto& c : specs()) {
        for (double u : kGrid) {
            EXPECT_NEAR(copula_cdf(c, u, 1.0), u, 1e-14);
            EXPECT_NEAR(copula_cdf(c, 1.0, u), u, 1e-14);
            EXPECT_NEAR(copula_cdf(c, u, 0.0), 0.0, 1e-14);
            for (double v : kGrid) {
                const double val = copula_cdf(c, u, v);
                EXPECT_GE(val, std::max(u + v - 1.0, 0.0) - 1e-14);
                EXPECT_LE(val, std::min(u, v) + 1e-14);
            }
        }
    }
}

TEST(Copula, DensityMatchesMixedFiniteDifference) {
    const double h = 1e-4;
    for (const auto& c : specs()) {
        for (double u : kGrid) {
            for (double v : kGrid) {
                const double fd = (copula_cdf(c, u + h, v + h) - copula_cdf(c, u + h, v - h) -
                                   copula_cdf(c, u - h, v + h) + copula_cdf(c, u - h, v - h)) /
                                  (4 * h * h);
                const double d = copula_density(c, u, v);
                EXPECT_NEAR(d, fd, 2e-4 * (1.0 + d)) << to_string(c.family()) << " " << c.theta() << " " << u << "," << v;
                EXPECT_NEAR(copula_log_density(c, u, v), std::log(d), 1e-10);
            }
        }
    }
}

TEST(Copula, ConditionalCdfIsPartialDerivative) {
    const double h = 1e-6;
    for (const auto& c : specs()) {
        for (double u : kGrid) {
            for (double v : kGrid) {
                const double fd = (copula_cdf(c, u + h, v) - copula_cdf(c, u - h, v)) / (2 * h);
                EXPECT_NEAR(conditional_cdf(c, u, v), fd, 1e-6);
            }
        }
    }
}

TEST(Copula, ConditionalQuantileInverts) {
    for (const auto& c : specs()) {
        for (double u : kGrid) {
            for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
                const double v = conditional_quantile(c, u, p);
                EXPECT_NEAR(conditional_cdf(c, u, v), p, 1e-9);
            }
        }
    }
}

TEST(Copula, KendallTauClosedFormsAndQuadrature) {
    EXPECT_NEAR(theta_to_tau(CopulaFamily::Gumbel, 1.0 / 0.7), 0.3, 1e-14);
    EXPECT_NEAR(theta_to_tau(CopulaFamily::Clayton, 2.0), 0.5, 1e-14);
    for (double theta : {-8.0, -1.0, 0.5, 3.0, 20.0}) {
        EXPECT_NEAR(theta_to_tau(CopulaFamily::Frank, theta), archimedean_tau(theta), 1e-9) << theta;
    }
}

TEST(Copula, TauThetaRoundTrip) {
    for (auto fam : {CopulaFamily::Gumbel, CopulaFamily::Clayton, CopulaFamily::Frank}) {
        for (double tau : {0.01, 0.3, 0.8, 0.95}) {
            EXPECT_NEAR(theta_to_tau(fam, tau_to_theta(fam, tau)), tau, 1e-10);
        }
    }
    EXPECT_NEAR(theta_to_tau(CopulaFamily::Frank, tau_to_theta(CopulaFamily::Frank, -0.6)), -0.6, 1e-10);
    EXPECT_THROW(tau_to_theta(CopulaFamily::Gumbel, -0.1), DomainError);
    EXPECT_THROW(tau_to_theta(CopulaFamily::Clayton, 1.0), DomainError);
    EXPECT_THROW(CopulaSpec::gumbel(0.9), DomainError);
    EXPECT_THROW(CopulaSpec::frank(0.0), DomainError);
}

TEST(Copula, SamplerReproducesKendallTau) {
    const std::size_t n = 100'000;
    for (auto [fam, tau] : std::vector<std::pair<CopulaFamily, double>>{{CopulaFamily::Gumbel, 0.3},
                                                                        {CopulaFamily::Gumbel, 0.8},
                                                                        {CopulaFamily::Clayton, 0.5},
                                                                        {CopulaFamily::Frank, -0.4},
                                                                        {CopulaFamily::Frank, 0.7}}) {
        const auto spec = CopulaSpec::from_tau(fam, tau);
        Engine rng(11);
        std::vector<double> u(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = sample_pair(spec, rng);
            u[i] = p.u;
            v[i] = p.v;
            ASSERT_NEAR(p.u + p.u_c, 1.0, 1e-15);
            ASSERT_NEAR(p.v + p.v_c, 1.0, 1e-15);
        }
        EXPECT_NEAR(empirical_kendall_tau(u, v), tau, 0.02) << to_string(fam);
        // Uniform margins: Kolmogorov-Smirnov distance well inside the 1% band.
        for (auto* m : {&u, &v}) {
            std::sort(m->begin(), m->end());
            double d = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d = std::max({d, std::abs((i + 1.0) / n - (*m)[i]), std::abs(i / double(n) - (*m)[i])});
            }
            EXPECT_LT(d, 1.63 / std::sqrt(double(n)));
        }
    }
}

TEST(Copula, EmpiricalTauMatchesQuadraticCount) {
    Engine rng(3);
    std::uniform_int_distribution<int> small(0, 6);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(60), b(60);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = small(rng);
            b[i] = small(rng) + 0.5 * a[i];
        }
        EXPECT_NEAR(empirical_kendall_tau(a, b), naive_tau(a, b), 1e-12);
    }
}

TEST(Copula, LogLikelihoodSumsLogDensities) {
    const auto c = CopulaSpec::clayton(1.7);
    std::vector<std::pair<double, double>> pairs = {{0.1, 0.2}, {0.5, 0.4}, {0.9, 0.95}};
    double sum = 0.0;
    for (auto [u, v] : pairs) sum += std::log(copula_density(c, u, v));
    EXPECT_NEAR(log_likelihood(c, pairs), sum, 1e-12);
    pairs.push_back({0.0, 0.5});
    EXPECT_THROW(log_likelihood(c, pairs), DomainError);
}

TEST(Copula, IndependenceIsProduct) {
    const auto c = CopulaSpec::independence();
    EXPECT_EQ(c.parameter_count(), 0);
    EXPECT_NEAR(copula_cdf(c, 0.3, 0.6), 0.18, 1e-15);
    EXPECT_NEAR(copula_density(c, 0.3, 0.6), 1.0, 1e-15);
    EXPECT_NEAR(CopulaSpec::gumbel(1.0).tau(), 0.0, 1e-15);
}

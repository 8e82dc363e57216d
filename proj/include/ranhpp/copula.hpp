#pragma once

#include "ranhpp/rng.hpp"

#include <span>
#include <string>
#include <utility>

namespace ranhpp {

enum class CopulaFamily { Gumbel, Frank, Clayton, Independence };

std::string to_string(CopulaFamily family);
CopulaFamily parse_copula_family(const std::string& name);

/// One-parameter bivariate Archimedean copula.
///
/// Parameter domains: Gumbel theta >= 1 (1 is independence), Clayton theta > 0,
/// Frank theta finite and non-zero. Independence ignores theta.
class CopulaSpec {
public:
    static CopulaSpec gumbel(double theta);
    static CopulaSpec frank(double theta);
    static CopulaSpec clayton(double theta);
    static CopulaSpec independence();
    static CopulaSpec make(CopulaFamily family, double theta);
    /// Parameterise by Kendall's tau instead of theta.
    static CopulaSpec from_tau(CopulaFamily family, double tau);

    CopulaFamily family() const { return family_; }
    double theta() const { return theta_; }
    double tau() const;

    /// Number of free parameters (0 for Independence).
    int parameter_count() const { return family_ == CopulaFamily::Independence ? 0 : 1; }

private:
    CopulaSpec(CopulaFamily family, double theta) : family_(family), theta_(theta) {}

    CopulaFamily family_;
    double theta_;
};

/// A dependent uniform pair together with its complements 1-u and 1-v, each
/// computed without cancellation so that extreme tails survive the quantile maps.
struct UniformPair {
    double u;
    double v;
    double u_c;
    double v_c;
};

/// C(u, v). Throws DomainError outside the unit square.
double copula_cdf(const CopulaSpec& spec, double u, double v);

/// c(u, v) = d^2 C / du dv on the open unit square. Throws DomainError on the boundary.
double copula_density(const CopulaSpec& spec, double u, double v);
double copula_log_density(const CopulaSpec& spec, double u, double v);

/// h(v | u) = dC/du = P(V <= v | U = u), for u in (0,1), v in [0,1].
double conditional_cdf(const CopulaSpec& spec, double u, double v);

/// Inverse of conditional_cdf in v: the v with P(V <= v | U = u) = p.
double conditional_quantile(const CopulaSpec& spec, double u, double p);

/// Kendall's tau for a family and parameter. Frank uses numeric quadrature of the
/// first Debye function.
double theta_to_tau(CopulaFamily family, double theta);

/// Inverse of theta_to_tau. Gumbel and Clayton accept tau in [0, 1), Frank (-1, 1),
/// Independence only 0. Throws DomainError otherwise.
double tau_to_theta(CopulaFamily family, double tau);

/// Draw one pair. Gumbel uses the Marshall-Olkin positive-stable frailty
/// construction; Frank and Clayton invert the conditional distribution.
UniformPair sample_pair(const CopulaSpec& spec, Engine& rng);

/// Sum of log densities over `pairs`. Throws DomainError if any pair touches the
/// boundary of the unit square; clamping is the caller's responsibility.
double log_likelihood(const CopulaSpec& spec, std::span<const std::pair<double, double>> pairs);

/// Sample Kendall tau-b of paired observations, O(n log n) (Knight's algorithm).
double empirical_kendall_tau(std::span<const double> a, std::span<const double> b);

} // namespace ranhpp

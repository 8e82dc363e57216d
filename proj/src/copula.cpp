#include "ranhpp/copula.hpp"

#include "ranhpp/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace ranhpp {

std::string to_string(CopulaFamily family) {
    switch (family) {
    case CopulaFamily::Gumbel: return "gumbel";
    case CopulaFamily::Frank: return "frank";
    case CopulaFamily::Clayton: return "clayton";
    case CopulaFamily::Independence: return "independence";
    }
    return "unknown";
}

CopulaFamily parse_copula_family(const std::string& name) {
    if (name == "gumbel") return CopulaFamily::Gumbel;
    if (name == "frank") return CopulaFamily::Frank;
    if (name == "clayton") return CopulaFamily::Clayton;
    if (name == "independence" || name == "indep") return CopulaFamily::Independence;
    throw ConfigError("unknown copula family '" + name + "'");
}

CopulaSpec CopulaSpec::gumbel(double theta) {
    if (!(std::isfinite(theta) && theta >= 1.0)) throw DomainError("Gumbel copula requires theta >= 1");
    return {CopulaFamily::Gumbel, theta};
}

CopulaSpec CopulaSpec::frank(double theta) {
    if (!std::isfinite(theta) || theta == 0.0) throw DomainError("Frank copula requires finite theta != 0");
    return {CopulaFamily::Frank, theta};
}

CopulaSpec CopulaSpec::clayton(double theta) {
    if (!(std::isfinite(theta) && theta > 0.0)) throw DomainError("Clayton copula requires theta > 0");
    return {CopulaFamily::Clayton, theta};
}

CopulaSpec CopulaSpec::independence() { return {CopulaFamily::Independence, 0.0}; }

CopulaSpec CopulaSpec::make(CopulaFamily family, double theta) {
    switch (family) {
    case CopulaFamily::Gumbel: return gumbel(theta);
    case CopulaFamily::Frank: return frank(theta);
    case CopulaFamily::Clayton: return clayton(theta);
    case CopulaFamily::Independence: return independence();
    }
    throw DomainError("unknown copula family");
}

CopulaSpec CopulaSpec::from_tau(CopulaFamily family, double tau) {
    if (family == CopulaFamily::Independence) {
        tau_to_theta(family, tau);
        return independence();
    }
    return make(family, tau_to_theta(family, tau));
}

double CopulaSpec::tau() const { return theta_to_tau(family_, theta_); }

namespace {

void require_closed(double u, double v) {
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
        throw DomainError("copula arguments must lie in [0,1]");
    }
}

void require_open(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
        throw DomainError("copula density requires (u,v) strictly inside the unit square");
    }
}

// First Debye function D1(x) = (1/x) * int_0^x t / (e^t - 1) dt for x > 0.
double debye1(double x) {
    auto integrand = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
    double error = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, x, 15, 1e-13, &error);
    return integral / x;
}

double frank_tau(double theta) {
    const double a = std::abs(theta);
    double tau;
    if (a < 1e-2) {
        tau = a / 9.0 - a * a * a / 900.0;
    } else {
        tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
    }
    return theta < 0.0 ? -tau : tau;
}

double gumbel_log_conditional(double theta, double u, double v) {
    // log of C(u,v) * A^(1/theta - 1) * a^(theta - 1) / u
    const double a = -std::log(u);
    const double b = -std::log(v);
    const double log_a = std::log(a);
    const double log_b = std::log(b);
    const double m = std::max(log_a, log_b);
    // log A with A = a^theta + b^theta, scaled against overflow
    const double log_A = theta * m + std::log(std::exp(theta * (log_a - m)) + std::exp(theta * (log_b - m)));
    const double A_pow = std::exp(log_A / theta);
    return -A_pow + (1.0 / theta - 1.0) * log_A + (theta - 1.0) * log_a + a;
}

} // namespace

double copula_cdf(const CopulaSpec& spec, double u, double v) {
    require_closed(u, v);
    if (u == 0.0 || v == 0.0) return 0.0;
    if (u == 1.0) return v;
    if (v == 1.0) return u;
    const double th = spec.theta();
    switch (spec.family()) {
    case CopulaFamily::Independence:
        return u * v;
    case CopulaFamily::Gumbel: {
        const double a = -std::log(u);
        const double b = -std::log(v);
        return std::exp(-std::pow(std::pow(a, th) + std::pow(b, th), 1.0 / th));
    }
    case CopulaFamily::Clayton:
        return std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th);
    case CopulaFamily::Frank: {
        const double num = std::expm1(-th * u) * std::expm1(-th * v);
        return -std::log1p(num / std::expm1(-th)) / th;
    }
    }
    return 0.0;
}

double copula_log_density(const CopulaSpec& spec, double u, double v) {
    require_open(u, v);
    const double th = spec.theta();
    switch (spec.family()) {
    case CopulaFamily::Independence:
        return 0.0;
    case CopulaFamily::Gumbel: {
        if (th == 1.0) return 0.0;
        const double a = -std::log(u);
        const double b = -std::log(v);
        const double log_a = std::log(a);
        const double log_b = std::log(b);
        const double m = std::max(log_a, log_b);
        const double log_A = th * m + std::log(std::exp(th * (log_a - m)) + std::exp(th * (log_b - m)));
        const double A_pow = std::exp(log_A / th);
        return -A_pow + a + b + (th - 1.0) * (log_a + log_b) + (2.0 / th - 2.0) * log_A +
               std::log1p((th - 1.0) / A_pow);
    }
    case CopulaFamily::Clayton: {
        const double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
        return std::log1p(th) - (th + 1.0) * (std::log(u) + std::log(v)) - (2.0 + 1.0 / th) * std::log(s);
    }
    case CopulaFamily::Frank: {
        const double d = std::expm1(-th);
        const double den = d + std::expm1(-th * u) * std::expm1(-th * v);
        return std::log(-th * d) - th * (u + v) - 2.0 * std::log(std::abs(den));
    }
    }
    return 0.0;
}

double copula_density(const CopulaSpec& spec, double u, double v) {
    return std::exp(copula_log_density(spec, u, v));
}

double conditional_cdf(const CopulaSpec& spec, double u, double v) {
    if (!(u > 0.0 && u < 1.0) || !(v >= 0.0 && v <= 1.0)) {
        throw DomainError("conditional copula cdf requires u in (0,1) and v in [0,1]");
    }
    if (v == 0.0) return 0.0;
    if (v == 1.0) return 1.0;
    const double th = spec.theta();
    switch (spec.family()) {
    case CopulaFamily::Independence:
        return v;
    case CopulaFamily::Gumbel:
        if (th == 1.0) return v;
        return std::min(1.0, std::exp(gumbel_log_conditional(th, u, v)));
    case CopulaFamily::Clayton: {
        const double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
        return std::exp(-(th + 1.0) * std::log(u) - (1.0 / th + 1.0) * std::log(s));
    }
    case CopulaFamily::Frank: {
        const double eu = std::exp(-th * u);
        const double bv = std::expm1(-th * v);
        return eu * bv / (std::expm1(-th) + std::expm1(-th * u) * bv);
    }
    }
    return v;
}

double conditional_quantile(const CopulaSpec& spec, double u, double p) {
    if (!(u > 0.0 && u < 1.0) || !(p >= 0.0 && p <= 1.0)) {
        throw DomainError("conditional copula quantile requires u in (0,1) and p in [0,1]");
    }
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    const double th = spec.theta();
    switch (spec.family()) {
    case CopulaFamily::Independence:
        return p;
    case CopulaFamily::Clayton: {
        const double w = std::pow(u, -th) * std::expm1(-th / (1.0 + th) * std::log(p)) + 1.0;
        return std::pow(w, -1.0 / th);
    }
    case CopulaFamily::Frank: {
        const double eu = std::exp(-th * u);
        return -std::log1p(p * std::expm1(-th) / (p + (1.0 - p) * eu)) / th;
    }
    case CopulaFamily::Gumbel: {
        if (th == 1.0) return p;
        // h(.|u) is increasing in v; solve on the log-odds scale of v.
        auto f = [&](double x) {
            const double v = 1.0 / (1.0 + std::exp(-x));
            return conditional_cdf(spec, u, v) - p;
        };
        double lo = -40.0;
        double hi = 40.0;
        if (f(lo) > 0.0) return 1.0 / (1.0 + std::exp(-lo));
        if (f(hi) < 0.0) return 1.0 / (1.0 + std::exp(-hi));
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
        const double x = 0.5 * (r.first + r.second);
        return 1.0 / (1.0 + std::exp(-x));
    }
    }
    return p;
}

double theta_to_tau(CopulaFamily family, double theta) {
    switch (family) {
    case CopulaFamily::Independence:
        return 0.0;
    case CopulaFamily::Gumbel:
        if (!(theta >= 1.0)) throw DomainError("Gumbel theta must be >= 1");
        return (theta - 1.0) / theta;
    case CopulaFamily::Clayton:
        if (!(theta > 0.0)) throw DomainError("Clayton theta must be > 0");
        return theta / (theta + 2.0);
    case CopulaFamily::Frank:
        if (!std::isfinite(theta) || theta == 0.0) throw DomainError("Frank theta must be finite and non-zero");
        return frank_tau(theta);
    }
    return 0.0;
}

double tau_to_theta(CopulaFamily family, double tau) {
    switch (family) {
    case CopulaFamily::Independence:
        if (tau != 0.0) throw DomainError("independence copula has tau = 0");
        return 0.0;
    case CopulaFamily::Gumbel:
        if (!(tau >= 0.0 && tau < 1.0)) {
            throw DomainError("Gumbel copula supports only tau in [0, 1)");
        }
        return 1.0 / (1.0 - tau);
    case CopulaFamily::Clayton:
        if (!(tau > 0.0 && tau < 1.0)) throw DomainError("Clayton copula requires tau in (0, 1)");
        return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::Frank: {
        if (!(tau > -1.0 && tau < 1.0) || tau == 0.0) {
            throw DomainError("Frank copula requires tau in (-1, 1), tau != 0");
        }
        const double target = std::abs(tau);
        auto f = [&](double th) { return frank_tau(th) - target; };
        double hi = 1.0;
        while (f(hi) < 0.0) {
            hi *= 2.0;
            if (hi > 1e6) throw DomainError("Frank tau too close to 1");
        }
        std::uintmax_t iters = 200;
        auto r = boost::math::tools::toms748_solve(f, 0.0, hi, -target, f(hi),
                                                   boost::math::tools::eps_tolerance<double>(52), iters);
        const double th = 0.5 * (r.first + r.second);
        return tau < 0.0 ? -th : th;
    }
    }
    return 0.0;
}

namespace {

// Positive stable variate with Laplace transform exp(-s^alpha), 0 < alpha < 1,
// via Kanter's representation. Returns log S.
double log_positive_stable(double alpha, Engine& rng) {
    const double angle = std::numbers::pi * uniform_open(rng);
    const double w = standard_exponential(rng);
    return std::log(std::sin(alpha * angle)) - std::log(std::sin(angle)) / alpha +
           (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * angle)) - std::log(w));
}

UniformPair from_uniforms(double u, double v) { return {u, v, 1.0 - u, 1.0 - v}; }

} // namespace

UniformPair sample_pair(const CopulaSpec& spec, Engine& rng) {
    const double th = spec.theta();
    switch (spec.family()) {
    case CopulaFamily::Independence:
        break;
    case CopulaFamily::Gumbel: {
        if (th == 1.0) break;
        const double alpha = 1.0 / th;
        const double log_s = log_positive_stable(alpha, rng);
        const double s1 = std::exp(alpha * (std::log(standard_exponential(rng)) - log_s));
        const double s2 = std::exp(alpha * (std::log(standard_exponential(rng)) - log_s));
        UniformPair p{std::exp(-s1), std::exp(-s2), -std::expm1(-s1), -std::expm1(-s2)};
        // Keep both coordinates strictly inside (0,1).
        constexpr double tiny = std::numeric_limits<double>::min();
        p.u = std::clamp(p.u, tiny, std::nextafter(1.0, 0.0));
        p.v = std::clamp(p.v, tiny, std::nextafter(1.0, 0.0));
        p.u_c = std::clamp(p.u_c, tiny, std::nextafter(1.0, 0.0));
        p.v_c = std::clamp(p.v_c, tiny, std::nextafter(1.0, 0.0));
        return p;
    }
    case CopulaFamily::Frank:
    case CopulaFamily::Clayton: {
        const double u = uniform_open(rng);
        const double p = uniform_open(rng);
        double v = conditional_quantile(spec, u, p);
        v = std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
        return from_uniforms(u, v);
    }
    }
    const double u = uniform_open(rng);
    const double v = uniform_open(rng);
    return from_uniforms(u, v);
}

double log_likelihood(const CopulaSpec& spec, std::span<const std::pair<double, double>> pairs) {
    double total = 0.0;
    for (const auto& [u, v] : pairs) {
        total += copula_log_density(spec, u, v);
    }
    return total;
}

namespace {

// Counts inversions while merge-sorting `v` in place.
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

} // namespace

double empirical_kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("kendall tau needs equal-length samples");
    const std::size_t n = a.size();
    if (n < 2) throw DomainError("kendall tau needs at least two observations");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]); });

    // Tied pairs in a alone (n1) and in (a, b) jointly (n3).
    auto pairs_in_run = [](std::uint64_t t) { return t * (t - 1) / 2; };
    std::uint64_t n1 = 0, n3 = 0, run_a = 1, run_ab = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        const bool same_a = i < n && a[order[i]] == a[order[i - 1]];
        const bool same_ab = same_a && b[order[i]] == b[order[i - 1]];
        if (same_a) {
            ++run_a;
        } else {
            n1 += pairs_in_run(run_a);
            run_a = 1;
        }
        if (same_ab) {
            ++run_ab;
        } else {
            n3 += pairs_in_run(run_ab);
            run_ab = 1;
        }
    }
    std::vector<double> ranked(n);
    for (std::size_t i = 0; i < n; ++i) ranked[i] = b[order[i]];
    std::vector<double> buf(n);
    const std::uint64_t swaps = count_inversions(ranked, buf, 0, n);
    std::uint64_t n2 = 0, run_b = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && ranked[i] == ranked[i - 1]) {
            ++run_b;
        } else {
            n2 += pairs_in_run(run_b);
            run_b = 1;
        }
    }
    const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const double denom = std::sqrt((n0 - static_cast<double>(n1)) * (n0 - static_cast<double>(n2)));
    if (!(denom > 0.0)) throw DomainError("kendall tau is undefined for a constant sample");
    const double score = n0 - static_cast<double>(n1) - static_cast<double>(n2) + static_cast<double>(n3) -
                         2.0 * static_cast<double>(swaps);
    return score / denom;
}

} // namespace ranhpp

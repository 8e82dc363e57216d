#include "ranhpp/estimation.hpp"

#include "ranhpp/error.hpp"
#include "parallel.hpp"

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace ranhpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double previous_time(const FailureEvent& ev) { return std::max(0.0, ev.previous_time()); }

void check_events(std::span<const FailureEvent> events, std::size_t p) {
    for (const auto& ev : events) {
        if (!(ev.x > 0.0) || !std::isfinite(ev.x)) throw DomainError("TBE values must be positive and finite");
        if (ev.z.size() != p) throw DimensionError("covariate dimension differs between events");
    }
}

void check_domain(IntensityKind kind, double gamma, double eta) {
    if (!std::isfinite(gamma) || !std::isfinite(eta)) throw DomainError("intensity parameters must be finite");
    if (kind != IntensityKind::LogLinear && !(gamma > 0.0)) throw DomainError("gamma must be positive");
    if (kind == IntensityKind::PowerLaw && !(eta > 0.0)) throw DomainError("eta must be positive");
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// d/d eta of (e^{eta t} - e^{eta s}) / eta.
double loglinear_slope_derivative(double eta, double s, double t) {
    if (std::abs(eta) * t < 1e-5) {
        return 0.5 * (t * t - s * s) + eta * (t * t * t - s * s * s) / 3.0;
    }
    const double et = std::exp(eta * t);
    const double es = std::exp(eta * s);
    return (t * et - s * es) / eta - (et - es) / (eta * eta);
}

// t^eta ln t with the 0 ln 0 = 0 convention.
double pow_log(double t, double eta) { return t > 0.0 ? std::pow(t, eta) * std::log(t) : 0.0; }

} // namespace

double fit_cost_rate(std::span<const double> costs) {
    if (costs.empty()) throw DomainError("cannot fit a cost rate to no observations");
    double sum = 0.0;
    for (double y : costs) {
        if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("costs must be positive and finite");
        sum += y;
    }
    return static_cast<double>(costs.size()) / sum;
}

double cost_log_likelihood(double cost_rate, std::span<const double> costs) {
    if (!(cost_rate > 0.0)) throw DomainError("cost rate must be positive");
    const double sum = std::accumulate(costs.begin(), costs.end(), 0.0);
    return static_cast<double>(costs.size()) * std::log(cost_rate) - cost_rate * sum;
}

double tbe_log_likelihood(IntensityKind kind, double gamma, double eta, std::span<const double> beta,
                          std::span<const FailureEvent> events) {
    check_domain(kind, gamma, eta);
    const IntensityModel model = IntensityModel::make(kind, gamma, eta);
    const double log_gamma = kind == IntensityKind::LogLinear ? 0.0 : std::log(gamma);
    const double log_eta = kind == IntensityKind::PowerLaw ? std::log(eta) : 0.0;
    double ll = 0.0;
    for (const auto& ev : events) {
        if (ev.z.size() != beta.size()) throw DimensionError("covariate dimension does not match beta");
        if (!(ev.x > 0.0)) throw DomainError("TBE values must be positive");
        const double lp = dot(beta, ev.z);
        const double s = previous_time(ev);
        const double t = s + ev.x;
        double log_lambda = 0.0;
        switch (kind) {
        case IntensityKind::PowerLaw: log_lambda = log_gamma + log_eta + (eta - 1.0) * std::log(t); break;
        case IntensityKind::LogLinear: log_lambda = gamma + eta * t; break;
        case IntensityKind::Homogeneous: log_lambda = log_gamma; break;
        }
        ll += log_lambda + lp - std::exp(lp) * mean_increment(model, s, ev.x);
    }
    return ll;
}

double tbe_log_likelihood(const IntensityModel& model, const RiskModel& risk, std::span<const FailureEvent> events) {
    return tbe_log_likelihood(model.kind(), model.gamma(), model.eta(), risk.beta, events);
}

std::vector<double> tbe_score(IntensityKind kind, double gamma, double eta, std::span<const double> beta,
                              std::span<const FailureEvent> events) {
    check_domain(kind, gamma, eta);
    const IntensityModel model = IntensityModel::make(kind, gamma, eta);
    const std::size_t p = beta.size();
    const std::size_t q = kind == IntensityKind::Homogeneous ? 1 : 2;
    std::vector<double> g(q + p, 0.0);
    for (const auto& ev : events) {
        if (ev.z.size() != p) throw DimensionError("covariate dimension does not match beta");
        const double c = std::exp(dot(beta, ev.z));
        const double s = previous_time(ev);
        const double t = s + ev.x;
        const double m = mean_increment(model, s, ev.x);
        switch (kind) {
        case IntensityKind::PowerLaw:
            g[0] += 1.0 / gamma - c * m / gamma;
            g[1] += 1.0 / eta + std::log(t) - gamma * c * (pow_log(t, eta) - pow_log(s, eta));
            break;
        case IntensityKind::LogLinear:
            g[0] += 1.0 - c * m;
            g[1] += t - c * std::exp(gamma) * loglinear_slope_derivative(eta, s, t);
            break;
        case IntensityKind::Homogeneous:
            g[0] += 1.0 / gamma - c * ev.x;
            break;
        }
        for (std::size_t k = 0; k < p; ++k) g[q + k] += ev.z[k] * (1.0 - c * m);
    }
    return g;
}

std::vector<FailureEvent> strip_covariates(std::span<const FailureEvent> events) {
    std::vector<FailureEvent> out(events.begin(), events.end());
    for (auto& ev : out) ev.z.clear();
    return out;
}

TbeFit initial_guess(IntensityKind kind, std::span<const FailureEvent> events) {
    if (events.empty()) throw DomainError("no events to fit");
    const std::size_t p = events.front().z.size();
    const double n = static_cast<double>(events.size());
    const double horizon = events.back().t;
    if (!(horizon > 0.0)) throw DomainError("event times must be positive");

    // Slope of ln N(t) against ln t over the observed counting process.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const double lx = std::log(events[i].t);
        const double ly = std::log(static_cast<double>(i + 1));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    double slope = denom > 0.0 ? (n * sxy - sx * sy) / denom : 1.0;
    if (!std::isfinite(slope)) slope = 1.0;
    slope = std::clamp(slope, 0.05, 20.0);

    TbeFit fit;
    fit.risk.beta.assign(p, 0.0);
    switch (kind) {
    case IntensityKind::PowerLaw: fit.intensity = IntensityModel::power_law(n / std::pow(horizon, slope), slope); break;
    case IntensityKind::LogLinear: fit.intensity = IntensityModel::log_linear(std::log(n / horizon), 0.0); break;
    case IntensityKind::Homogeneous: fit.intensity = IntensityModel::homogeneous(n / horizon); break;
    }
    fit.log_lik = tbe_log_likelihood(fit.intensity, fit.risk, events);
    fit.convergence.method = "initial";
    return fit;
}

namespace {

// Optimiser coordinates, chosen to decorrelate the baseline parameters:
//   power law    (ln Lambda(T), ln eta, beta)   gamma = exp(a - eta ln T)
//   log-linear   (gamma, eta T, beta)
//   homogeneous  (ln Lambda(T), beta)           gamma = exp(a) / T
// with T the last event time. The objective is -loglik / n.
struct TbeProblem {
    IntensityKind kind;
    std::span<const FailureEvent> events;
    std::size_t p;
    double horizon;
    double log_horizon;
    double n;

    std::size_t q() const { return kind == IntensityKind::Homogeneous ? 1 : 2; }
    std::size_t dim() const { return q() + p; }

    void natural(const double* v, double& gamma, double& eta) const {
        switch (kind) {
        case IntensityKind::PowerLaw:
            eta = std::exp(v[1]);
            gamma = std::exp(v[0] - eta * log_horizon);
            return;
        case IntensityKind::LogLinear:
            gamma = v[0];
            eta = v[1] / horizon;
            return;
        case IntensityKind::Homogeneous:
            gamma = std::exp(v[0] - log_horizon);
            eta = 0.0;
            return;
        }
    }

    std::vector<double> encode(const TbeFit& fit) const {
        std::vector<double> v(dim());
        const double gamma = fit.intensity.gamma();
        const double eta = fit.intensity.eta();
        switch (kind) {
        case IntensityKind::PowerLaw:
            v[0] = std::log(gamma) + eta * log_horizon;
            v[1] = std::log(eta);
            break;
        case IntensityKind::LogLinear:
            v[0] = gamma;
            v[1] = eta * horizon;
            break;
        case IntensityKind::Homogeneous: v[0] = std::log(gamma) + log_horizon; break;
        }
        std::copy(fit.risk.beta.begin(), fit.risk.beta.end(), v.begin() + static_cast<std::ptrdiff_t>(q()));
        return v;
    }

    double objective(const double* v) const {
        double gamma = 0.0, eta = 0.0;
        natural(v, gamma, eta);
        try {
            const double ll = tbe_log_likelihood(kind, gamma, eta, std::span<const double>(v + q(), p), events);
            return std::isfinite(ll) ? -ll / n : kInf;
        } catch (const DomainError&) {
            return kInf;
        }
    }

    void gradient(const double* v, double* out) const {
        double gamma = 0.0, eta = 0.0;
        natural(v, gamma, eta);
        std::vector<double> g;
        try {
            g = tbe_score(kind, gamma, eta, std::span<const double>(v + q(), p), events);
        } catch (const DomainError&) {
            std::fill(out, out + dim(), 0.0);
            return;
        }
        switch (kind) {
        case IntensityKind::PowerLaw:
            out[0] = gamma * g[0];
            out[1] = eta * g[1] - gamma * eta * log_horizon * g[0];
            break;
        case IntensityKind::LogLinear:
            out[0] = g[0];
            out[1] = g[1] / horizon;
            break;
        case IntensityKind::Homogeneous: out[0] = gamma * g[0]; break;
        }
        for (std::size_t k = 0; k < p; ++k) out[q() + k] = g[q() + k];
        for (std::size_t k = 0; k < dim(); ++k) out[k] = std::isfinite(out[k]) ? -out[k] / n : 0.0;
    }
};

double gsl_f(const gsl_vector* x, void* params) {
    return static_cast<const TbeProblem*>(params)->objective(x->data);
}

void gsl_df(const gsl_vector* x, void* params, gsl_vector* g) {
    static_cast<const TbeProblem*>(params)->gradient(x->data, g->data);
}

void gsl_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
    *f = gsl_f(x, params);
    gsl_df(x, params, g);
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using GslVector = std::unique_ptr<gsl_vector, VectorDeleter>;

GslVector make_vector(const std::vector<double>& values) {
    GslVector v(gsl_vector_alloc(values.size()));
    std::copy(values.begin(), values.end(), v->data);
    return v;
}

double gradient_norm(const TbeProblem& prob, const std::vector<double>& v) {
    std::vector<double> g(v.size());
    prob.gradient(v.data(), g.data());
    return std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
}

} // namespace

TbeFit fit_tbe(IntensityKind kind, std::span<const FailureEvent> events, const OptimizerConfig& opt) {
    if (events.empty()) throw DomainError("no events to fit");
    const std::size_t p = events.front().z.size();
    check_events(events, p);
    if (events.size() < p + 3) throw DomainError("need at least p + 3 events to fit the intensity");
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (!(events[i].t > events[i - 1].t)) throw DomainError("event times must be strictly increasing");
    }

    TbeProblem prob{kind, events, p, events.back().t, std::log(events.back().t),
                    static_cast<double>(events.size())};
    const std::size_t dim = prob.dim();
    const TbeFit start = initial_guess(kind, events);
    std::vector<double> best = prob.encode(start);

    // Simplex stage.
    std::vector<double> steps(dim, 0.5);
    if (kind == IntensityKind::PowerLaw) steps[1] = 0.2;
    for (std::size_t k = 0; k < p; ++k) {
        double mean_abs = 0.0;
        for (const auto& ev : events) mean_abs += std::abs(ev.z[k]);
        mean_abs /= prob.n;
        steps[prob.q() + k] = 0.2 / std::max(1.0, mean_abs);
    }

    ConvergenceReport report;
    report.method = "nelder-mead";
    gsl_multimin_function fn{&gsl_f, dim, &prob};
    {
        GslVector x = make_vector(best);
        GslVector ss = make_vector(steps);
        gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
        gsl_multimin_fminimizer_set(s, &fn, x.get(), ss.get());
        int status = GSL_CONTINUE;
        std::size_t iter = 0;
        while (status == GSL_CONTINUE && iter < opt.max_iterations) {
            ++iter;
            if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
            report.simplex_size = gsl_multimin_fminimizer_size(s);
            status = gsl_multimin_test_size(report.simplex_size, opt.simplex_tolerance);
        }
        report.iterations = iter;
        report.converged = status == GSL_SUCCESS;
        std::copy(s->x->data, s->x->data + dim, best.begin());
        gsl_multimin_fminimizer_free(s);
    }
    double best_value = prob.objective(best.data());
    if (!std::isfinite(best_value)) throw ConvergenceError("likelihood is not finite at the simplex optimum");

    // Gradient stage.
    if (opt.gradient_refine) {
        gsl_multimin_function_fdf fdf{&gsl_f, &gsl_df, &gsl_fdf, dim, &prob};
        GslVector x = make_vector(best);
        gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim);
        gsl_multimin_fdfminimizer_set(s, &fdf, x.get(), 1e-3, 0.1);
        std::size_t iter = 0;
        int status = GSL_CONTINUE;
        while (status == GSL_CONTINUE && iter < 2000) {
            ++iter;
            if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
            status = gsl_multimin_test_gradient(s->gradient, opt.gradient_tolerance);
        }
        const double value = s->f;
        if (std::isfinite(value) && value <= best_value) {
            std::copy(s->x->data, s->x->data + dim, best.begin());
            best_value = value;
            report.method = "nelder-mead+bfgs";
        }
        report.iterations += iter;
        gsl_multimin_fdfminimizer_free(s);
    }
    report.gradient_norm = gradient_norm(prob, best);
    // Either stopping rule is accepted; a small gradient also certifies the simplex result.
    if (report.gradient_norm < std::max(opt.gradient_tolerance, 1e-6)) report.converged = true;
    report.status = report.converged ? "converged" : "iteration limit reached";

    TbeFit fit;
    double gamma = 0.0, eta = 0.0;
    prob.natural(best.data(), gamma, eta);
    fit.intensity = IntensityModel::make(kind, gamma, eta);
    fit.risk.beta.assign(best.begin() + static_cast<std::ptrdiff_t>(prob.q()), best.end());
    fit.log_lik = tbe_log_likelihood(fit.intensity, fit.risk, events);
    fit.convergence = report;
    return fit;
}

std::vector<std::pair<double, double>> pseudo_observations(const ProcessParams& margins,
                                                           std::span<const FailureEvent> events) {
    std::vector<std::pair<double, double>> out;
    out.reserve(events.size());
    constexpr double eps = kPseudoObservationClamp;
    for (const auto& ev : events) {
        const double u = tbe_cdf(margins, previous_time(ev), ev.z, ev.x);
        const double v = cost_cdf(margins, ev.y);
        out.emplace_back(std::clamp(u, eps, 1.0 - eps), std::clamp(v, eps, 1.0 - eps));
    }
    return out;
}

namespace {

struct ThetaRange {
    double lo;
    double hi;
};

ThetaRange theta_range(CopulaFamily family) {
    switch (family) {
    case CopulaFamily::Gumbel: return {1.0, 50.0};
    case CopulaFamily::Clayton: return {1e-8, 50.0};
    case CopulaFamily::Frank: return {-40.0, 40.0};
    case CopulaFamily::Independence: break;
    }
    return {0.0, 0.0};
}

double copula_ll(CopulaFamily family, double theta, std::span<const std::pair<double, double>> pseudo) {
    // Frank at theta = 0 is the independence copula.
    if (family == CopulaFamily::Frank && std::abs(theta) < 1e-9) return 0.0;
    try {
        const double ll = log_likelihood(CopulaSpec::make(family, theta), pseudo);
        return std::isfinite(ll) ? ll : -kInf;
    } catch (const DomainError&) {
        return -kInf;
    }
}

} // namespace

CopulaFit fit_copula(CopulaFamily family, std::span<const std::pair<double, double>> pseudo) {
    if (pseudo.empty()) throw DomainError("no pseudo-observations for the copula fit");
    for (const auto& [u, v] : pseudo) {
        if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
            throw DomainError("pseudo-observations must lie strictly inside the unit square");
        }
    }
    CopulaFit fit;
    fit.convergence.method = "brent";
    if (family == CopulaFamily::Independence) {
        fit.convergence.converged = true;
        fit.convergence.status = "no free parameter";
        return fit;
    }

    // Coarse scan locates the basin, Brent polishes inside it.
    const ThetaRange range = theta_range(family);
    constexpr int kGrid = 64;
    std::vector<double> grid(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i) {
        const double f = static_cast<double>(i) / kGrid;
        grid[static_cast<std::size_t>(i)] =
            family == CopulaFamily::Frank
                ? range.lo + f * (range.hi - range.lo)
                : range.lo + (range.hi - range.lo) * std::expm1(4.0 * f) / std::expm1(4.0);
    }
    std::size_t best = 0;
    double best_ll = -kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ll = copula_ll(family, grid[i], pseudo);
        if (ll > best_ll) {
            best_ll = ll;
            best = i;
        }
    }
    if (!std::isfinite(best_ll)) throw ConvergenceError("copula likelihood is not finite anywhere on the search grid");
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];

    std::uintmax_t iters = 200;
    auto neg = [&](double theta) { return -copula_ll(family, theta, pseudo); };
    const auto [theta, value] = boost::math::tools::brent_find_minima(neg, lo, hi, 50, iters);
    double theta_hat = theta;
    double ll_hat = -value;
    if (best_ll > ll_hat) {
        theta_hat = grid[best];
        ll_hat = best_ll;
    }
    fit.convergence.iterations = static_cast<std::size_t>(iters);
    fit.convergence.converged = iters < 200;
    fit.convergence.status = fit.convergence.converged ? "converged" : "iteration limit reached";
    if (family == CopulaFamily::Frank && std::abs(theta_hat) < 1e-9) theta_hat = 1e-9;
    fit.copula = CopulaSpec::make(family, theta_hat);
    fit.log_lik = ll_hat;
    return fit;
}

CopulaFit fit_copula(CopulaFamily family, std::span<const FailureEvent> events, const ProcessParams& margins) {
    const auto pseudo = pseudo_observations(margins, events);
    return fit_copula(family, pseudo);
}

namespace {

std::vector<double> costs_of(std::span<const FailureEvent> events) {
    std::vector<double> y;
    y.reserve(events.size());
    for (const auto& ev : events) y.push_back(ev.y);
    return y;
}

FitResult assemble(std::span<const FailureEvent> events, const TbeFit& tbe, const CopulaFit& cop, double mu,
                   double ll_y) {
    FitResult r;
    r.params = ProcessParams{tbe.intensity, tbe.risk, mu, cop.copula};
    r.log_lik_x = tbe.log_lik;
    r.log_lik_y = ll_y;
    r.log_lik_c = cop.log_lik;
    r.k = tbe.intensity.parameter_count() + static_cast<int>(tbe.risk.dimension()) + 1 +
          cop.copula.parameter_count();
    r.aic = aic(r.log_lik_x + r.log_lik_y + r.log_lik_c, r.k);
    for (double b : tbe.risk.beta) r.hazard_ratios.push_back(std::exp(b));
    r.convergence = tbe.convergence;
    r.copula_convergence = cop.convergence;
    r.n_events = events.size();
    return r;
}

} // namespace

FitResult fit_model(std::span<const FailureEvent> events, IntensityKind intensity, CopulaFamily copula,
                    const OptimizerConfig& opt) {
    const TbeFit tbe = fit_tbe(intensity, events, opt);
    const auto y = costs_of(events);
    const double mu = fit_cost_rate(y);
    const ProcessParams margins{tbe.intensity, tbe.risk, mu, CopulaSpec::independence()};
    const CopulaFit cop = fit_copula(copula, events, margins);
    return assemble(events, tbe, cop, mu, cost_log_likelihood(mu, y));
}

FitResult select_model(std::span<const FailureEvent> events, std::span<const IntensityKind> intensities,
                       std::span<const CopulaFamily> copulas, const OptimizerConfig& opt, unsigned workers) {
    if (intensities.empty() || copulas.empty()) throw ConfigError("no candidate models to select from");
    const std::size_t p = events.empty() ? 0 : events.front().z.size();

    std::vector<TbeFit> tbe(intensities.size());
    std::vector<CandidateScore> tbe_scores(intensities.size());
    std::vector<bool> tbe_ok(intensities.size(), false);
    detail::parallel_for(intensities.size(), workers, [&](std::size_t i) {
        CandidateScore& s = tbe_scores[i];
        s.name = to_string(intensities[i]);
        try {
            tbe[i] = fit_tbe(intensities[i], events, opt);
            s.log_lik = tbe[i].log_lik;
            s.k = tbe[i].intensity.parameter_count() + static_cast<int>(p);
            s.aic = aic(s.log_lik, s.k);
            s.converged = tbe[i].convergence.converged;
            tbe_ok[i] = true;
        } catch (const std::exception& e) {
            s.error = e.what();
        }
    });
    std::size_t best_tbe = intensities.size();
    for (std::size_t i = 0; i < intensities.size(); ++i) {
        if (tbe_ok[i] && (best_tbe == intensities.size() || tbe_scores[i].aic < tbe_scores[best_tbe].aic)) best_tbe = i;
    }
    if (best_tbe == intensities.size()) {
        throw ConvergenceError("every intensity candidate failed: " + tbe_scores.front().error);
    }

    const auto y = costs_of(events);
    const double mu = fit_cost_rate(y);
    const ProcessParams margins{tbe[best_tbe].intensity, tbe[best_tbe].risk, mu, CopulaSpec::independence()};
    const auto pseudo = pseudo_observations(margins, events);

    std::vector<CopulaFit> cop(copulas.size());
    std::vector<CandidateScore> cop_scores(copulas.size());
    std::vector<bool> cop_ok(copulas.size(), false);
    detail::parallel_for(copulas.size(), workers, [&](std::size_t i) {
        CandidateScore& s = cop_scores[i];
        s.name = to_string(copulas[i]);
        try {
            cop[i] = fit_copula(copulas[i], pseudo);
            s.log_lik = cop[i].log_lik;
            s.k = cop[i].copula.parameter_count();
            s.aic = aic(s.log_lik, s.k);
            s.converged = cop[i].convergence.converged;
            cop_ok[i] = true;
        } catch (const std::exception& e) {
            s.error = e.what();
        }
    });
    std::size_t best_cop = copulas.size();
    for (std::size_t i = 0; i < copulas.size(); ++i) {
        if (cop_ok[i] && (best_cop == copulas.size() || cop_scores[i].aic < cop_scores[best_cop].aic)) best_cop = i;
    }
    if (best_cop == copulas.size()) {
        throw ConvergenceError("every copula candidate failed: " + cop_scores.front().error);
    }

    FitResult r = assemble(events, tbe[best_tbe], cop[best_cop], mu, cost_log_likelihood(mu, y));
    r.intensity_candidates = std::move(tbe_scores);
    r.copula_candidates = std::move(cop_scores);
    return r;
}

} // namespace ranhpp

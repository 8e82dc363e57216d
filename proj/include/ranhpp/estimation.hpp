#pragma once

#include "ranhpp/copula.hpp"
#include "ranhpp/intensity.hpp"
#include "ranhpp/tbe_process.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ranhpp {

struct OptimizerConfig {
    std::size_t max_iterations = 20'000;
    /// Stop the simplex stage once its characteristic size falls below this.
    double simplex_tolerance = 1e-9;
    /// Follow the simplex with a quasi-Newton stage on the analytic gradient.
    bool gradient_refine = true;
    /// Gradient-norm stopping rule, relative to the number of events.
    double gradient_tolerance = 1e-7;
};

struct ConvergenceReport {
    bool converged = false;
    std::size_t iterations = 0;
    double simplex_size = 0.0;
    double gradient_norm = 0.0;
    std::string method;
    std::string status;
};

/// Closed-form exponential MLE mu = n / sum(y). Throws DomainError on empty input
/// or a non-positive cost.
double fit_cost_rate(std::span<const double> costs);

/// Exponential log-likelihood n ln mu - mu sum(y).
double cost_log_likelihood(double cost_rate, std::span<const double> costs);

/// Log-likelihood of a time-ordered event stream under the risk-adjusted intensity,
/// each event contributing ln lambda(t_i | z_i) - [Lambda(t_i | z_i) - Lambda(t_i - x_i | z_i)].
/// Throws DomainError outside the parameter domain.
double tbe_log_likelihood(IntensityKind kind, double gamma, double eta, std::span<const double> beta,
                          std::span<const FailureEvent> events);
double tbe_log_likelihood(const IntensityModel& model, const RiskModel& risk, std::span<const FailureEvent> events);

/// Gradient of tbe_log_likelihood in the natural coordinates (gamma, eta, beta...).
/// Homogeneous models return (gamma, beta...).
std::vector<double> tbe_score(IntensityKind kind, double gamma, double eta, std::span<const double> beta,
                              std::span<const FailureEvent> events);

struct TbeFit {
    IntensityModel intensity = IntensityModel::homogeneous(1.0);
    RiskModel risk;
    double log_lik = 0.0;
    ConvergenceReport convergence;
};

/// Starting point: eta from the least-squares slope of ln i against ln t_i,
/// gamma from the total count, beta = 0.
TbeFit initial_guess(IntensityKind kind, std::span<const FailureEvent> events);

/// Maximum-likelihood fit of the intensity and risk coefficients. Positivity is
/// enforced by log transforms; beta is unconstrained. The covariate dimension is
/// taken from the events. Requires at least p + 3 events. A fit that runs out of
/// iterations is returned with convergence.converged == false.
TbeFit fit_tbe(IntensityKind kind, std::span<const FailureEvent> events, const OptimizerConfig& opt = {});

/// Copy of the events with their covariates removed.
std::vector<FailureEvent> strip_covariates(std::span<const FailureEvent> events);

/// Pseudo-observations clamp used before copula fitting.
inline constexpr double kPseudoObservationClamp = 1e-10;

/// (u_i, v_i) = (F_X(x_i | t_{i-1}, z_i), F_Y(y_i)), clamped to [eps, 1 - eps].
std::vector<std::pair<double, double>> pseudo_observations(const ProcessParams& margins,
                                                           std::span<const FailureEvent> events);

struct CopulaFit {
    CopulaSpec copula = CopulaSpec::independence();
    double log_lik = 0.0;
    ConvergenceReport convergence;
};

/// One-dimensional bounded maximum-likelihood search for the copula parameter.
/// Domains searched: Gumbel [1, 50], Clayton (0, 50], Frank [-40, 40].
CopulaFit fit_copula(CopulaFamily family, std::span<const std::pair<double, double>> pseudo);
CopulaFit fit_copula(CopulaFamily family, std::span<const FailureEvent> events, const ProcessParams& margins);

struct CandidateScore {
    std::string name;
    double log_lik = 0.0;
    int k = 0;
    double aic = 0.0;
    bool converged = false;
    std::string error;
};

struct FitResult {
    ProcessParams params{IntensityModel::homogeneous(1.0), {}, 1.0, CopulaSpec::independence()};
    double log_lik_x = 0.0;
    double log_lik_y = 0.0;
    double log_lik_c = 0.0;
    /// Total parameter count over all three parts.
    int k = 0;
    /// 2k - 2 (log_lik_x + log_lik_y + log_lik_c).
    double aic = 0.0;
    std::vector<double> hazard_ratios;
    ConvergenceReport convergence;
    ConvergenceReport copula_convergence;
    std::vector<CandidateScore> intensity_candidates;
    std::vector<CandidateScore> copula_candidates;
    std::size_t n_events = 0;
};

inline double aic(double log_lik, int k) { return 2.0 * k - 2.0 * log_lik; }

/// Two-step selection: every intensity candidate is fitted and the minimal-AIC one
/// kept; its pseudo-observations are then used to fit every copula candidate, again
/// keeping the minimal AIC. Throws ConvergenceError if every candidate of a step fails.
FitResult select_model(std::span<const FailureEvent> events, std::span<const IntensityKind> intensities,
                       std::span<const CopulaFamily> copulas, const OptimizerConfig& opt = {},
                       unsigned workers = 0);

/// Assembles a FitResult for fixed choices (no selection).
FitResult fit_model(std::span<const FailureEvent> events, IntensityKind intensity, CopulaFamily copula,
                    const OptimizerConfig& opt = {});

} // namespace ranhpp

#pragma once

#include "ranhpp/copula.hpp"
#include "ranhpp/intensity.hpp"
#include "ranhpp/rng.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace ranhpp {

/// Full parameter vector of the monitored process: risk-adjusted TBE intensity,
/// exponential cost marginal with rate `cost_rate`, and the TBE-cost copula.
struct ProcessParams {
    IntensityModel intensity;
    RiskModel risk;
    double cost_rate;
    CopulaSpec copula;

    /// Throws DomainError when cost_rate is not a positive finite number.
    void validate() const;
};

/// One observed failure. `t` is the absolute failure time (hours), `x` the time
/// since the previous failure, `y` the total cost, `z` the covariates.
struct FailureEvent {
    std::size_t index = 0;
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    std::vector<double> z;

    double previous_time() const { return t - x; }
};

/// P(X <= x | t_prev, z) = 1 - exp(-(Lambda(t_prev + x | z) - Lambda(t_prev | z))).
double tbe_cdf(const ProcessParams& params, double t_prev, std::span<const double> z, double x);

/// 1 - tbe_cdf, computed directly.
double tbe_survival(const ProcessParams& params, double t_prev, std::span<const double> z, double x);

/// Conditional density of the next TBE.
double tbe_pdf(const ProcessParams& params, double t_prev, std::span<const double> z, double x);

/// Closed-form inverse of tbe_cdf; u in [0,1). Throws DomainError for u = 1.
double tbe_quantile(const ProcessParams& params, double t_prev, std::span<const double> z, double u);

/// TBE whose cumulative hazard increment equals `score` (= -ln(1-u)). This is the
/// sampling path: it keeps precision when u is within rounding of 1.
double tbe_from_score(const ProcessParams& params, double t_prev, std::span<const double> z, double score);

/// Exponential cost marginal.
double cost_cdf(const ProcessParams& params, double y);
double cost_quantile(const ProcessParams& params, double v);

struct EventDraw {
    double x;
    double y;
};

/// Draws a dependent (TBE, cost) pair: a copula pair mapped through both quantile functions.
EventDraw sample_event(const ProcessParams& params, double t_prev, std::span<const double> z, Engine& rng);

/// Covariate generator for simulation studies.
class CovariateGenerator {
public:
    /// Poisson(rate) restricted to {lo, ..., hi}. By default the pmf is
    /// renormalised over the support; with `raw_probabilities` the unnormalised
    /// Poisson pmf values are used and the leftover mass triggers a redraw.
    static CovariateGenerator truncated_poisson(double rate = 1.0, int lo = 1, int hi = 3,
                                                bool raw_probabilities = false);
    /// Always returns `z`.
    static CovariateGenerator fixed(std::vector<double> z);
    /// Zero-length covariate vector (no risk adjustment).
    static CovariateGenerator none();

    std::vector<double> sample(Engine& rng) const;

    std::size_t dimension() const;
    bool raw_probabilities() const { return raw_; }
    /// Support values and their selection probabilities (normalised).
    const std::vector<double>& support() const { return support_; }
    std::vector<double> probabilities() const;
    /// Unnormalised weights as used by the raw mode.
    const std::vector<double>& weights() const { return weights_; }

private:
    enum class Kind { TruncatedPoisson, Fixed, None };

    Kind kind_ = Kind::None;
    bool raw_ = false;
    std::vector<double> support_;
    std::vector<double> weights_;
    std::vector<double> fixed_;
};

std::vector<double> sample_covariate(const CovariateGenerator& gen, Engine& rng);

/// Monte Carlo estimate of E(Y/X | t_prev, z).
struct AcEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    /// Hill estimate of the right-tail index of Y/X; below 2 the variance is
    /// infinite and the standard error is meaningless.
    double tail_index = 0.0;
    /// Ratio of the batch-means standard error at n to that at n/4 (0.5 expected).
    double batch_se_ratio = 0.0;
    bool converged = true;
};

AcEstimate expected_ac(const ProcessParams& params, double t_prev, std::span<const double> z,
                       std::size_t n_mc, Engine& rng);

/// Same estimator over an arbitrary (x, y) sampler.
AcEstimate expected_ac(const std::function<EventDraw(Engine&)>& sampler, std::size_t n_mc, Engine& rng);

/// Generate `n` consecutive events starting at time `t0`.
std::vector<FailureEvent> simulate_stream(const ProcessParams& params, const CovariateGenerator& gen,
                                          std::size_t n, Engine& rng, double t0 = 0.0);

} // namespace ranhpp

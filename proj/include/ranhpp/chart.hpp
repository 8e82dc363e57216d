#pragma once

#include "ranhpp/rng.hpp"
#include "ranhpp/tbe_process.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ranhpp {

/// Which statistic a chart monitors and how its limits are built.
///   AC          W = Y/X, Monte Carlo limits from the joint model
///   TBEOnly     X, exact quantiles of the conditional TBE law
///   TCOnly      Y, exact exponential quantiles
///   TBENoRisk   X, exact quantiles with the risk coefficients forced to zero
enum class ChartMode { AC, TBEOnly, TCOnly, TBENoRisk };

std::string to_string(ChartMode mode);
ChartMode parse_chart_mode(const std::string& name);

/// Interpolation rule for empirical quantiles of order statistics x_(1) <= ... <= x_(N).
///   Weibull  position p(N+1)  (Hyndman-Fan type 6); E[F(q_p)] = p exactly
///   Linear   position p(N-1)+1 (type 7)
enum class QuantileRule { Weibull, Linear };

std::string to_string(QuantileRule rule);
QuantileRule parse_quantile_rule(const std::string& name);

/// Zero-based interpolation position of the p-quantile among n sorted values:
/// the quantile is x[lower] + fraction * (x[lower + 1] - x[lower]).
struct QuantilePosition {
    std::size_t lower;
    double fraction;
};

QuantilePosition quantile_position(std::size_t n, double p, QuantileRule rule);

/// Empirical quantile. Reorders `values` (partial selection, no full sort).
double empirical_quantile(std::vector<double>& values, double p, QuantileRule rule);

struct ChartConfig {
    double alpha = 0.005;
    std::size_t n_mc = 10'000;
    std::uint64_t seed = 1;
    ChartMode mode = ChartMode::AC;
    QuantileRule quantile_rule = QuantileRule::Weibull;
    /// Worker threads for per-event limits; 0 selects the hardware concurrency.
    unsigned workers = 0;

    /// Throws DomainError unless 0 < alpha < 1 and n_mc >= 1000.
    void validate() const;
};

enum class Signal { InControl, BelowLCL, AboveUCL };

std::string to_string(Signal s);

struct Limits {
    double lcl;
    double ucl;
};

struct ChartPoint {
    std::size_t index = 0;
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    /// The charted statistic: W = y/x for AC charts, x or y for the marginal charts.
    double w = 0.0;
    double lcl = 0.0;
    double ucl = 0.0;
    Signal signal = Signal::InControl;
};

/// Strict-inequality classification; a value equal to a limit is in control.
Signal classify(double value, double lcl, double ucl);

/// Draw `n` values of W = Y/X from the conditional joint law given (t_prev, z).
void simulate_w(const ProcessParams& params, double t_prev, std::span<const double> z, std::size_t n,
                Engine& rng, std::vector<double>& out);

/// Monte Carlo probability limits for W: empirical alpha/2 and 1-alpha/2 quantiles
/// of config.n_mc simulated draws, using the supplied engine.
Limits control_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                      const ChartConfig& config, Engine& rng);

/// As above, on the substream reserved for failure `index` under config.seed, so
/// the limits of one failure do not depend on any other.
Limits control_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                      const ChartConfig& config, std::size_t index);

/// P(W <= w | t_prev, z): one-dimensional integral over the TBE margin of the
/// conditional copula,  int_0^1 h(F_Y(w F_X^{-1}(u)) | u) du.
double w_cdf(const ProcessParams& params, double t_prev, std::span<const double> z, double w);

/// Inverse of w_cdf by bracketing and root finding on log w.
double w_quantile(const ProcessParams& params, double t_prev, std::span<const double> z, double p);

/// Limits solved from w_cdf directly (no sampling noise). Slow; verification path.
Limits exact_control_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                            double alpha);

/// Copy of `params` with every risk coefficient set to zero (dimension kept).
ProcessParams without_risk(const ProcessParams& params);

/// Exact limits of a marginal chart (TBEOnly, TCOnly, TBENoRisk).
Limits marginal_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                       double alpha, ChartMode mode);

/// W = y/x classified against the limits. Throws DomainError when x <= 0.
ChartPoint evaluate_point(const FailureEvent& event, double lcl, double ucl);

/// Phase II chart over a time-ordered stream. Limits of event i are conditioned on
/// (t_{i-1}, z_i) with t_{i-1} = t_i - x_i. Monitoring continues past signals.
/// Throws DomainError on non-increasing timestamps. Dispatches on config.mode.
std::vector<ChartPoint> run_chart(std::span<const FailureEvent> stream, const ProcessParams& params_ic,
                                  const ChartConfig& config);

/// Individual TBE / TC chart (config.mode must be one of the marginal modes).
std::vector<ChartPoint> run_marginal_chart(std::span<const FailureEvent> stream,
                                           const ProcessParams& params_ic, const ChartConfig& config);

struct SignalSummary {
    std::size_t points = 0;
    std::size_t below_lcl = 0;
    std::size_t above_ucl = 0;
};

SignalSummary summarize(std::span<const ChartPoint> points);

} // namespace ranhpp

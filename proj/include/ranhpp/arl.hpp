#pragma once

#include "ranhpp/chart.hpp"
#include "ranhpp/error.hpp"
#include "ranhpp/rng.hpp"
#include "ranhpp/tbe_process.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ranhpp {

/// Multiplicative shifts applied to (gamma, eta, mu). Risk coefficients and the
/// copula are left unchanged.
struct ShiftSpec {
    double delta_gamma = 1.0;
    double delta_eta = 1.0;
    double delta_mu = 1.0;

    void validate() const;
    bool in_control() const { return delta_gamma == 1.0 && delta_eta == 1.0 && delta_mu == 1.0; }
};

/// Out-of-control parameters gamma1 = dg*gamma0, eta1 = de*eta0, mu1 = dm*mu0.
/// A homogeneous baseline has no eta; its delta_eta must be 1.
ProcessParams apply_shift(const ProcessParams& params_ic, const ShiftSpec& shift);

/// How AC-chart limits are realised inside a run-length simulation.
///   MonteCarlo      draw N values of W per event and take empirical quantiles
///   OrderStatistic  draw the needed order statistics of N uniforms directly and
///                   map them through the exact law of W; same run-length law,
///                   far cheaper per event
enum class ArlEngine { MonteCarlo, OrderStatistic };

std::string to_string(ArlEngine engine);
ArlEngine parse_arl_engine(const std::string& name);

struct ArlConfig {
    double alpha = 0.005;
    std::size_t n_mc = 10'000;
    std::uint64_t seed = 1;
    ChartMode mode = ChartMode::AC;
    ArlEngine engine = ArlEngine::OrderStatistic;
    QuantileRule quantile_rule = QuantileRule::Weibull;
    std::size_t event_cap = 1'000'000;
    unsigned workers = 0;
    bool keep_samples = false;

    void validate() const;
    ChartConfig chart_config() const;
};

/// A replication reached ArlConfig::event_cap without signalling.
class RunLengthCapError : public ConvergenceError {
public:
    explicit RunLengthCapError(std::size_t cap);
};

/// Events until the first signal, the signalling event included. Limits come from
/// `params_limits`, data from `params_data`. Throws RunLengthCapError at the cap.
std::size_t simulate_run_length(const ProcessParams& params_limits, const ProcessParams& params_data,
                                const CovariateGenerator& gen, const ArlConfig& config, Engine& rng);

struct RunLengthResult {
    double arl = 0.0;
    double std_error = 0.0;
    /// Completed replications (capped ones excluded).
    std::size_t n_reps = 0;
    std::size_t n_capped = 0;
    std::vector<std::size_t> rl_samples;
};

/// ARL of the chart designed for `params_ic` when data follow apply_shift(params_ic, shift).
/// Replication r runs on substream (config.seed, r); results do not depend on worker count.
RunLengthResult estimate_arl(const ProcessParams& params_ic, const ShiftSpec& shift,
                             const CovariateGenerator& gen, const ArlConfig& config, std::size_t n_reps);

/// As above with explicit limit and data parameters.
RunLengthResult estimate_arl(const ProcessParams& params_limits, const ProcessParams& params_data,
                             const CovariateGenerator& gen, const ArlConfig& config, std::size_t n_reps);

/// P(RL > n) = (1 - alpha)^n for an in-control chart.
double geometric_survival(double alpha, double n);

struct GeometricPoint {
    std::size_t n = 0;
    double empirical = 0.0;
    double target = 0.0;
    double sigma = 0.0;
    bool pass = true;
};

struct GeometricReport {
    std::vector<GeometricPoint> points;
    double max_deviation = 0.0;
    double max_sigmas = 0.0;
    bool pass = true;
};

/// Empirical survival of `rl_samples` against the geometric law at each n, with a
/// 3-sigma binomial band.
GeometricReport geometric_check(std::span<const std::size_t> rl_samples, double alpha,
                                std::span<const std::size_t> at = std::span<const std::size_t>{});

struct GridSpec {
    std::vector<std::pair<double, double>> shifts;  // (delta_gamma, delta_eta)
    std::vector<double> delta_mu;
    std::vector<double> betas;
    std::vector<double> taus;
};

/// The 17 standard (delta_gamma, delta_eta) shift rows, in grid order.
std::vector<std::pair<double, double>> standard_shift_rows();

/// Default grid: standard rows, delta_mu {0.25, 0.75, 1, 1.25, 2},
/// beta {-2, -0.5, 0, 0.5, 2}, tau {0.3, 0.8}.
GridSpec standard_grid();

struct GridCell {
    double tau = 0.0;
    double beta = 0.0;
    ShiftSpec shift;
    RunLengthResult result;
};

/// Cartesian product runner. Each cell takes `base` with every risk coefficient
/// set to `beta` (dimension from `gen`) and the copula reparameterised to `tau`.
std::vector<GridCell> arl_grid(const ProcessParams& base, const GridSpec& grid, const CovariateGenerator& gen,
                               const ArlConfig& config, std::size_t n_reps);

struct ComparisonRow {
    double delta_gamma = 1.0;
    double delta_eta = 1.0;
    RunLengthResult risk_adjusted;
    RunLengthResult unadjusted;
};

/// TBE-chart comparison: data from apply_shift(truth, shift); one chart uses the
/// risk-adjusted fit, the other a fit without covariates (coefficients padded to
/// zero). Both use exact TBE quantile limits.
std::vector<ComparisonRow> compare_tbe_charts(const ProcessParams& truth, const ProcessParams& fitted_risk,
                                              const ProcessParams& fitted_plain,
                                              std::span<const std::pair<double, double>> shifts,
                                              const CovariateGenerator& gen, const ArlConfig& config,
                                              std::size_t n_reps);

} // namespace ranhpp

#include "ranhpp/chart.hpp"

#include "ranhpp/error.hpp"
#include "parallel.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ranhpp {

namespace {

// Substream domain tag for per-failure chart limits.
constexpr std::uint64_t kChartLimitsStream = 0x43484152'54000001ULL;

} // namespace

std::string to_string(ChartMode mode) {
    switch (mode) {
    case ChartMode::AC: return "ac";
    case ChartMode::TBEOnly: return "tbe";
    case ChartMode::TCOnly: return "tc";
    case ChartMode::TBENoRisk: return "tbe-no-risk";
    }
    return "unknown";
}

ChartMode parse_chart_mode(const std::string& name) {
    if (name == "ac") return ChartMode::AC;
    if (name == "tbe") return ChartMode::TBEOnly;
    if (name == "tc") return ChartMode::TCOnly;
    if (name == "tbe-no-risk") return ChartMode::TBENoRisk;
    throw ConfigError("unknown chart mode '" + name + "'");
}

std::string to_string(QuantileRule rule) {
    return rule == QuantileRule::Weibull ? "weibull" : "linear";
}

QuantileRule parse_quantile_rule(const std::string& name) {
    if (name == "weibull" || name == "type6") return QuantileRule::Weibull;
    if (name == "linear" || name == "type7") return QuantileRule::Linear;
    throw ConfigError("unknown quantile rule '" + name + "'");
}

std::string to_string(Signal s) {
    switch (s) {
    case Signal::InControl: return "in-control";
    case Signal::BelowLCL: return "below-lcl";
    case Signal::AboveUCL: return "above-ucl";
    }
    return "unknown";
}

void ChartConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (n_mc < 1000) throw DomainError("n_mc must be at least 1000");
}

QuantilePosition quantile_position(std::size_t n, double p, QuantileRule rule) {
    if (n == 0) throw DomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    const double nd = static_cast<double>(n);
    double h = rule == QuantileRule::Linear ? p * (nd - 1.0) : p * (nd + 1.0) - 1.0;
    h = std::clamp(h, 0.0, nd - 1.0);
    auto lower = static_cast<std::size_t>(std::floor(h));
    double fraction = h - static_cast<double>(lower);
    if (lower >= n - 1) {
        lower = n - 1;
        fraction = 0.0;
    }
    return {lower, fraction};
}

double empirical_quantile(std::vector<double>& values, double p, QuantileRule rule) {
    const QuantilePosition pos = quantile_position(values.size(), p, rule);
    const auto nth = values.begin() + static_cast<std::ptrdiff_t>(pos.lower);
    std::nth_element(values.begin(), nth, values.end());
    const double a = *nth;
    if (pos.fraction == 0.0) return a;
    const double b = *std::min_element(nth + 1, values.end());
    return a + pos.fraction * (b - a);
}

Signal classify(double value, double lcl, double ucl) {
    if (value < lcl) return Signal::BelowLCL;
    if (value > ucl) return Signal::AboveUCL;
    return Signal::InControl;
}

void simulate_w(const ProcessParams& params, double t_prev, std::span<const double> z, std::size_t n,
                Engine& rng, std::vector<double>& out) {
    const double c = risk_multiplier(params.risk, z);
    const double mu = params.cost_rate;
    out.resize(n);
    for (auto& w : out) {
        const UniformPair p = sample_pair(params.copula, rng);
        const double x = invert_mean_increment(params.intensity, t_prev, -std::log(p.u_c) / c);
        const double y = -std::log(p.v_c) / mu;
        w = y / x;
    }
}

Limits control_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                      const ChartConfig& config, Engine& rng) {
    config.validate();
    if (config.mode != ChartMode::AC) {
        return marginal_limits(params_ic, t_prev, z, config.alpha, config.mode);
    }
    std::vector<double> ws;
    simulate_w(params_ic, t_prev, z, config.n_mc, rng, ws);
    const double lcl = empirical_quantile(ws, config.alpha / 2.0, config.quantile_rule);
    const double ucl = empirical_quantile(ws, 1.0 - config.alpha / 2.0, config.quantile_rule);
    return {lcl, ucl};
}

Limits control_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                      const ChartConfig& config, std::size_t index) {
    Engine rng = make_stream(config.seed, {kChartLimitsStream, index});
    return control_limits(params_ic, t_prev, z, config, rng);
}

double w_cdf(const ProcessParams& params, double t_prev, std::span<const double> z, double w) {
    if (std::isnan(w)) throw DomainError("w_cdf of NaN");
    if (w <= 0.0) return 0.0;
    if (std::isinf(w)) return 1.0;
    if (!(t_prev >= 0.0)) throw DomainError("previous failure time must be non-negative");
    const double c = risk_multiplier(params.risk, z);
    const double rate = params.cost_rate * w;
    // Beyond u_end the process has no further events, X is infinite and W is 0.
    const double u_end = -std::expm1(-c * remaining_mean(params.intensity, t_prev));
    if (u_end <= 0.0) return 1.0;
    auto cond = [&](double u) {
        const double x = invert_mean_increment(params.intensity, t_prev, -std::log1p(-u) / c);
        if (!std::isfinite(x)) return 1.0;
        return conditional_cdf(params.copula, u, -std::expm1(-rate * x));
    };
    thread_local boost::math::quadrature::tanh_sinh<double> quad;
    constexpr double tol = 1e-9;
    // The upper tail is integrated as a complement so small tail masses keep their
    // digits. The side is guessed from the independence median of W.
    const double x_med = invert_mean_increment(params.intensity, t_prev, std::log(2.0) / c);
    const bool upper_guess = std::isfinite(x_med) && rate * x_med > std::log(2.0);
    auto lower = [&] { return quad.integrate(cond, 0.0, u_end, tol) + (1.0 - u_end); };
    auto upper = [&] { return quad.integrate([&](double u) { return 1.0 - cond(u); }, 0.0, u_end, tol); };
    if (upper_guess) {
        const double above = upper();
        if (above < 0.5) return std::clamp(1.0 - above, 0.0, 1.0);
        return std::clamp(lower(), 0.0, 1.0);
    }
    const double value = lower();
    if (value <= 0.5) return std::clamp(value, 0.0, 1.0);
    return std::clamp(1.0 - upper(), 0.0, 1.0);
}

double w_quantile(const ProcessParams& params, double t_prev, std::span<const double> z, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("w_quantile requires p in (0, 1)");
    auto f = [&](double log_w) { return w_cdf(params, t_prev, z, std::exp(log_w)) - p; };
    // Start near the ratio of the marginal medians.
    const double x_med = tbe_quantile(params, t_prev, z, 0.5);
    double guess = std::isfinite(x_med) && x_med > 0.0 ? std::log(std::log(2.0) / params.cost_rate / x_med) : 0.0;
    double lo = guess - 1.0;
    double hi = guess + 1.0;
    double f_lo = f(lo);
    double f_hi = f(hi);
    for (int i = 0; f_lo > 0.0 && i < 200; ++i) {
        hi = lo;
        f_hi = f_lo;
        lo -= 2.0;
        f_lo = f(lo);
    }
    for (int i = 0; f_hi < 0.0 && i < 200; ++i) {
        lo = hi;
        f_lo = f_hi;
        hi += 2.0;
        f_hi = f(hi);
    }
    if (f_lo > 0.0 || f_hi < 0.0) throw ConvergenceError("could not bracket the W quantile");
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                               boost::math::tools::eps_tolerance<double>(45), iters);
    return std::exp(0.5 * (r.first + r.second));
}

Limits exact_control_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                            double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    return {w_quantile(params_ic, t_prev, z, alpha / 2.0), w_quantile(params_ic, t_prev, z, 1.0 - alpha / 2.0)};
}

ProcessParams without_risk(const ProcessParams& params) {
    ProcessParams p = params;
    std::fill(p.risk.beta.begin(), p.risk.beta.end(), 0.0);
    return p;
}

Limits marginal_limits(const ProcessParams& params_ic, double t_prev, std::span<const double> z,
                       double alpha, ChartMode mode) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    switch (mode) {
    case ChartMode::TBEOnly:
        return {tbe_quantile(params_ic, t_prev, z, alpha / 2.0), tbe_quantile(params_ic, t_prev, z, 1.0 - alpha / 2.0)};
    case ChartMode::TBENoRisk: {
        const ProcessParams p = without_risk(params_ic);
        return {tbe_quantile(p, t_prev, z, alpha / 2.0), tbe_quantile(p, t_prev, z, 1.0 - alpha / 2.0)};
    }
    case ChartMode::TCOnly:
        return {cost_quantile(params_ic, alpha / 2.0), cost_quantile(params_ic, 1.0 - alpha / 2.0)};
    case ChartMode::AC:
        break;
    }
    throw DomainError("marginal limits requested for the AC chart");
}

ChartPoint evaluate_point(const FailureEvent& event, double lcl, double ucl) {
    if (!(event.x > 0.0)) throw DomainError("W is undefined for a zero time between events");
    ChartPoint pt;
    pt.index = event.index;
    pt.t = event.t;
    pt.x = event.x;
    pt.y = event.y;
    pt.w = event.y / event.x;
    pt.lcl = lcl;
    pt.ucl = ucl;
    pt.signal = classify(pt.w, lcl, ucl);
    return pt;
}

namespace {

void check_stream(std::span<const FailureEvent> stream) {
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const FailureEvent& ev = stream[i];
        if (!(ev.x > 0.0)) {
            throw DomainError("event " + std::to_string(ev.index) + " has a non-positive TBE");
        }
        if (!(ev.previous_time() >= -1e-9 * std::max(1.0, ev.t))) {
            throw DomainError("event " + std::to_string(ev.index) + " precedes time zero");
        }
        if (i > 0 && !(ev.t > stream[i - 1].t)) {
            throw DomainError("stream timestamps are not strictly increasing at event " + std::to_string(ev.index));
        }
    }
}

double charted_value(const FailureEvent& ev, ChartMode mode) {
    switch (mode) {
    case ChartMode::AC: return ev.y / ev.x;
    case ChartMode::TBEOnly:
    case ChartMode::TBENoRisk: return ev.x;
    case ChartMode::TCOnly: return ev.y;
    }
    return 0.0;
}

} // namespace

std::vector<ChartPoint> run_chart(std::span<const FailureEvent> stream, const ProcessParams& params_ic,
                                  const ChartConfig& config) {
    config.validate();
    check_stream(stream);
    std::vector<ChartPoint> out(stream.size());
    detail::parallel_for(stream.size(), config.workers, [&](std::size_t i) {
        const FailureEvent& ev = stream[i];
        const double t_prev = std::max(0.0, ev.previous_time());
        const Limits lim = config.mode == ChartMode::AC
                               ? control_limits(params_ic, t_prev, ev.z, config, ev.index)
                               : marginal_limits(params_ic, t_prev, ev.z, config.alpha, config.mode);
        ChartPoint pt = evaluate_point(ev, lim.lcl, lim.ucl);
        pt.w = charted_value(ev, config.mode);
        pt.signal = classify(pt.w, lim.lcl, lim.ucl);
        out[i] = pt;
    });
    return out;
}

std::vector<ChartPoint> run_marginal_chart(std::span<const FailureEvent> stream,
                                           const ProcessParams& params_ic, const ChartConfig& config) {
    if (config.mode == ChartMode::AC) throw DomainError("run_marginal_chart needs a TBE or TC mode");
    return run_chart(stream, params_ic, config);
}

SignalSummary summarize(std::span<const ChartPoint> points) {
    SignalSummary s;
    s.points = points.size();
    for (const auto& p : points) {
        if (p.signal == Signal::BelowLCL) ++s.below_lcl;
        if (p.signal == Signal::AboveUCL) ++s.above_ucl;
    }
    return s;
}

} // namespace ranhpp

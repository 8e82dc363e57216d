#include "ranhpp/arl.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ranhpp {

namespace {

constexpr std::uint64_t kRunLengthStream = 0x41524C00'00000001ULL;

// Joint draw of the order statistics of N uniforms that the empirical quantile
// rule reads for the two limits. With S_k the partial sums of N+1 standard
// exponentials, U_(k) = S_k / S_{N+1}.
class OrderStatisticPlan {
public:
    OrderStatisticPlan(std::size_t n, double alpha, QuantileRule rule)
        : n_(n), lo_(quantile_position(n, alpha / 2.0, rule)), hi_(quantile_position(n, 1.0 - alpha / 2.0, rule)) {
        ranks_ = {lo_.lower, lo_.lower + 1, hi_.lower, hi_.lower + 1};
        std::erase_if(ranks_, [n](std::size_t r) { return r >= n; });
        std::sort(ranks_.begin(), ranks_.end());
        ranks_.erase(std::unique(ranks_.begin(), ranks_.end()), ranks_.end());
        values_.resize(ranks_.size());
    }

    void draw(Engine& rng) {
        double s = 0.0;
        std::size_t prev = 0;
        for (std::size_t k = 0; k < ranks_.size(); ++k) {
            // Zero-based rank r sits at partial sum S_{r+1}.
            s += gamma_sum(ranks_[k] + 1 - prev, rng);
            values_[k] = s;
            prev = ranks_[k] + 1;
        }
        const double total = s + gamma_sum(n_ + 1 - prev, rng);
        for (double& v : values_) v /= total;
    }

    double at(std::size_t rank) const {
        const auto it = std::lower_bound(ranks_.begin(), ranks_.end(), rank);
        return values_[static_cast<std::size_t>(it - ranks_.begin())];
    }

    const QuantilePosition& lower() const { return lo_; }
    const QuantilePosition& upper() const { return hi_; }

private:
    static double gamma_sum(std::size_t shape, Engine& rng) {
        if (shape == 0) return 0.0;
        if (shape == 1) return standard_exponential(rng);
        std::gamma_distribution<double> g(static_cast<double>(shape), 1.0);
        return g(rng);
    }

    std::size_t n_;
    QuantilePosition lo_;
    QuantilePosition hi_;
    std::vector<std::size_t> ranks_;
    std::vector<double> values_;
};

// Interpolated empirical quantile expressed through uniform order statistics.
double limit_from_uniforms(const ProcessParams& p, double t_prev, std::span<const double> z,
                           const QuantilePosition& pos, double u_lo, double u_hi) {
    const double a = w_quantile(p, t_prev, z, u_lo);
    if (pos.fraction == 0.0) return a;
    const double b = w_quantile(p, t_prev, z, u_hi);
    return a + pos.fraction * (b - a);
}

bool order_statistic_signal(const ProcessParams& p, double t_prev, std::span<const double> z, double w,
                            OrderStatisticPlan& plan, std::size_t n, Engine& rng) {
    plan.draw(rng);
    const double prob = w_cdf(p, t_prev, z, w);

    const QuantilePosition& lo = plan.lower();
    const double ul = plan.at(lo.lower);
    if (prob < ul) return true;
    if (lo.fraction > 0.0 && lo.lower + 1 < n) {
        const double ul1 = plan.at(lo.lower + 1);
        if (prob < ul1 && w < limit_from_uniforms(p, t_prev, z, lo, ul, ul1)) return true;
    }

    const QuantilePosition& hi = plan.upper();
    const double uh = plan.at(hi.lower);
    if (hi.fraction == 0.0 || hi.lower + 1 >= n) return prob > uh;
    if (prob <= uh) return false;
    const double uh1 = plan.at(hi.lower + 1);
    if (prob > uh1) return true;
    return w > limit_from_uniforms(p, t_prev, z, hi, uh, uh1);
}

ProcessParams with_beta(const ProcessParams& base, double beta, std::size_t dim) {
    ProcessParams p = base;
    p.risk.beta.assign(dim, beta);
    return p;
}

ProcessParams padded_risk(const ProcessParams& params, std::size_t dim) {
    if (params.risk.dimension() == dim) return params;
    if (params.risk.dimension() != 0) throw DimensionError("risk coefficients do not match the covariate dimension");
    ProcessParams p = params;
    p.risk.beta.assign(dim, 0.0);
    return p;
}

} // namespace

void ShiftSpec::validate() const {
    for (double d : {delta_gamma, delta_eta, delta_mu}) {
        if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("shift multipliers must be positive and finite");
    }
}

ProcessParams apply_shift(const ProcessParams& params_ic, const ShiftSpec& shift) {
    shift.validate();
    ProcessParams p = params_ic;
    const IntensityModel& m = params_ic.intensity;
    if (m.kind() == IntensityKind::Homogeneous) {
        if (shift.delta_eta != 1.0) throw DomainError("a homogeneous intensity has no eta to shift");
        p.intensity = IntensityModel::homogeneous(shift.delta_gamma * m.gamma());
    } else {
        p.intensity = IntensityModel::make(m.kind(), shift.delta_gamma * m.gamma(), shift.delta_eta * m.eta());
    }
    p.cost_rate = shift.delta_mu * params_ic.cost_rate;
    return p;
}

std::string to_string(ArlEngine engine) {
    return engine == ArlEngine::MonteCarlo ? "montecarlo" : "order-statistic";
}

ArlEngine parse_arl_engine(const std::string& name) {
    if (name == "montecarlo" || name == "mc") return ArlEngine::MonteCarlo;
    if (name == "order-statistic" || name == "os") return ArlEngine::OrderStatistic;
    throw ConfigError("unknown ARL engine '" + name + "'");
}

void ArlConfig::validate() const {
    chart_config().validate();
    if (event_cap == 0) throw DomainError("event cap must be positive");
}

ChartConfig ArlConfig::chart_config() const {
    ChartConfig c;
    c.alpha = alpha;
    c.n_mc = n_mc;
    c.seed = seed;
    c.mode = mode;
    c.quantile_rule = quantile_rule;
    c.workers = 1;
    return c;
}

RunLengthCapError::RunLengthCapError(std::size_t cap)
    : ConvergenceError("run length reached the cap of " + std::to_string(cap) + " events without a signal") {}

std::size_t simulate_run_length(const ProcessParams& params_limits, const ProcessParams& params_data,
                                const CovariateGenerator& gen, const ArlConfig& config, Engine& rng) {
    config.validate();
    params_limits.validate();
    params_data.validate();
    const ChartConfig chart = config.chart_config();
    const bool order_stats = config.mode == ChartMode::AC && config.engine == ArlEngine::OrderStatistic;
    OrderStatisticPlan plan(config.n_mc, config.alpha, config.quantile_rule);

    double t = 0.0;
    for (std::size_t j = 1; j <= config.event_cap; ++j) {
        const std::vector<double> z = gen.sample(rng);
        const EventDraw ev = sample_event(params_data, t, z, rng);
        bool signal = false;
        if (order_stats) {
            signal = order_statistic_signal(params_limits, t, z, ev.y / ev.x, plan, config.n_mc, rng);
        } else if (config.mode == ChartMode::AC) {
            const Limits lim = control_limits(params_limits, t, z, chart, rng);
            signal = classify(ev.y / ev.x, lim.lcl, lim.ucl) != Signal::InControl;
        } else {
            const Limits lim = marginal_limits(params_limits, t, z, config.alpha, config.mode);
            const double value = config.mode == ChartMode::TCOnly ? ev.y : ev.x;
            signal = classify(value, lim.lcl, lim.ucl) != Signal::InControl;
        }
        if (signal) return j;
        // A terminating process never produces another event.
        if (!std::isfinite(ev.x)) break;
        t += ev.x;
    }
    throw RunLengthCapError(config.event_cap);
}

RunLengthResult estimate_arl(const ProcessParams& params_limits, const ProcessParams& params_data,
                             const CovariateGenerator& gen, const ArlConfig& config, std::size_t n_reps) {
    config.validate();
    if (n_reps == 0) throw DomainError("n_reps must be at least 1");
    std::vector<std::size_t> rl(n_reps, 0);
    detail::parallel_for(n_reps, config.workers, [&](std::size_t r) {
        Engine rng = make_stream(config.seed, {kRunLengthStream, r});
        try {
            rl[r] = simulate_run_length(params_limits, params_data, gen, config, rng);
        } catch (const RunLengthCapError&) {
            rl[r] = 0;
        }
    });

    RunLengthResult out;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t v : rl) {
        if (v == 0) {
            ++out.n_capped;
            continue;
        }
        const double d = static_cast<double>(v);
        sum += d;
        sum_sq += d * d;
    }
    out.n_reps = n_reps - out.n_capped;
    if (out.n_reps == 0) throw RunLengthCapError(config.event_cap);
    const double n = static_cast<double>(out.n_reps);
    out.arl = sum / n;
    if (out.n_reps > 1) {
        const double var = std::max(0.0, (sum_sq - n * out.arl * out.arl) / (n - 1.0));
        out.std_error = std::sqrt(var / n);
    }
    if (config.keep_samples) {
        std::erase(rl, std::size_t{0});
        out.rl_samples = std::move(rl);
    }
    return out;
}

RunLengthResult estimate_arl(const ProcessParams& params_ic, const ShiftSpec& shift,
                             const CovariateGenerator& gen, const ArlConfig& config, std::size_t n_reps) {
    return estimate_arl(params_ic, apply_shift(params_ic, shift), gen, config, n_reps);
}

double geometric_survival(double alpha, double n) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (n < 0.0) throw DomainError("n must be non-negative");
    return std::exp(n * std::log1p(-alpha));
}

GeometricReport geometric_check(std::span<const std::size_t> rl_samples, double alpha,
                                std::span<const std::size_t> at) {
    static constexpr std::size_t kDefaultPoints[] = {50, 100, 200, 400};
    if (at.empty()) at = kDefaultPoints;
    if (rl_samples.empty()) throw DomainError("geometric_check needs at least one run length");
    GeometricReport report;
    const double m = static_cast<double>(rl_samples.size());
    for (std::size_t n : at) {
        GeometricPoint pt;
        pt.n = n;
        const auto above = std::count_if(rl_samples.begin(), rl_samples.end(), [n](std::size_t r) { return r > n; });
        pt.empirical = static_cast<double>(above) / m;
        pt.target = geometric_survival(alpha, static_cast<double>(n));
        pt.sigma = std::sqrt(pt.target * (1.0 - pt.target) / m);
        const double dev = std::abs(pt.empirical - pt.target);
        pt.pass = dev <= 3.0 * pt.sigma;
        report.max_deviation = std::max(report.max_deviation, dev);
        if (pt.sigma > 0.0) report.max_sigmas = std::max(report.max_sigmas, dev / pt.sigma);
        report.pass = report.pass && pt.pass;
        report.points.push_back(pt);
    }
    return report;
}

std::vector<std::pair<double, double>> standard_shift_rows() {
    return {{0.25, 0.25}, {0.75, 0.25}, {1.00, 1.00}, {1.25, 0.25}, {2.00, 0.25}, {0.25, 0.75},
            {0.75, 0.75}, {1.25, 0.75}, {2.00, 0.75}, {0.25, 1.25}, {0.75, 1.25}, {1.25, 1.25},
            {2.00, 1.25}, {0.25, 2.00}, {0.75, 2.00}, {1.25, 2.00}, {2.00, 2.00}};
}

GridSpec standard_grid() {
    return {standard_shift_rows(), {0.25, 0.75, 1.00, 1.25, 2.00}, {-2.0, -0.5, 0.0, 0.5, 2.0}, {0.3, 0.8}};
}

std::vector<GridCell> arl_grid(const ProcessParams& base, const GridSpec& grid, const CovariateGenerator& gen,
                               const ArlConfig& config, std::size_t n_reps) {
    std::vector<GridCell> cells;
    for (double tau : grid.taus) {
        for (double beta : grid.betas) {
            ProcessParams ic = with_beta(base, beta, gen.dimension());
            ic.copula = CopulaSpec::from_tau(base.copula.family(), tau);
            for (const auto& [dg, de] : grid.shifts) {
                for (double dm : grid.delta_mu) {
                    GridCell cell;
                    cell.tau = tau;
                    cell.beta = beta;
                    cell.shift = {dg, de, dm};
                    cell.result = estimate_arl(ic, cell.shift, gen, config, n_reps);
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

std::vector<ComparisonRow> compare_tbe_charts(const ProcessParams& truth, const ProcessParams& fitted_risk,
                                              const ProcessParams& fitted_plain,
                                              std::span<const std::pair<double, double>> shifts,
                                              const CovariateGenerator& gen, const ArlConfig& config,
                                              std::size_t n_reps) {
    ArlConfig cfg = config;
    cfg.mode = ChartMode::TBEOnly;
    const std::size_t dim = gen.dimension();
    const ProcessParams risk = padded_risk(fitted_risk, dim);
    const ProcessParams plain = padded_risk(fitted_plain, dim);
    std::vector<ComparisonRow> rows;
    for (const auto& [dg, de] : shifts) {
        const ProcessParams data = apply_shift(truth, {dg, de, 1.0});
        ComparisonRow row;
        row.delta_gamma = dg;
        row.delta_eta = de;
        row.risk_adjusted = estimate_arl(risk, data, gen, cfg, n_reps);
        row.unadjusted = estimate_arl(plain, data, gen, cfg, n_reps);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace ranhpp

#include "ranhpp/tbe_process.hpp"

#include "ranhpp/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ranhpp {

void ProcessParams::validate() const {
    if (!(std::isfinite(cost_rate) && cost_rate > 0.0)) {
        throw DomainError("cost rate must be positive");
    }
}

namespace {

double hazard_increment(const ProcessParams& params, double t_prev, std::span<const double> z, double x) {
    if (!(x >= 0.0)) throw DomainError("TBE must be non-negative");
    if (!(t_prev >= 0.0)) throw DomainError("previous failure time must be non-negative");
    return mean_increment(params.intensity, t_prev, x) * risk_multiplier(params.risk, z);
}

} // namespace

double tbe_cdf(const ProcessParams& params, double t_prev, std::span<const double> z, double x) {
    return -std::expm1(-hazard_increment(params, t_prev, z, x));
}

double tbe_survival(const ProcessParams& params, double t_prev, std::span<const double> z, double x) {
    return std::exp(-hazard_increment(params, t_prev, z, x));
}

double tbe_pdf(const ProcessParams& params, double t_prev, std::span<const double> z, double x) {
    const double h = hazard_increment(params, t_prev, z, x);
    return adjusted_intensity(params.intensity, params.risk, z, t_prev + x) * std::exp(-h);
}

double tbe_from_score(const ProcessParams& params, double t_prev, std::span<const double> z, double score) {
    if (!(t_prev >= 0.0)) throw DomainError("previous failure time must be non-negative");
    if (!(score >= 0.0)) throw DomainError("hazard score must be non-negative");
    return invert_mean_increment(params.intensity, t_prev, score / risk_multiplier(params.risk, z));
}

double tbe_quantile(const ProcessParams& params, double t_prev, std::span<const double> z, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw DomainError("TBE quantile requires u in [0, 1)");
    }
    return tbe_from_score(params, t_prev, z, -std::log1p(-u));
}

double cost_cdf(const ProcessParams& params, double y) {
    if (!(y >= 0.0)) throw DomainError("cost must be non-negative");
    return -std::expm1(-params.cost_rate * y);
}

double cost_quantile(const ProcessParams& params, double v) {
    if (!(v >= 0.0 && v < 1.0)) throw DomainError("cost quantile requires v in [0, 1)");
    return -std::log1p(-v) / params.cost_rate;
}

EventDraw sample_event(const ProcessParams& params, double t_prev, std::span<const double> z, Engine& rng) {
    const UniformPair p = sample_pair(params.copula, rng);
    return {tbe_from_score(params, t_prev, z, -std::log(p.u_c)), -std::log(p.v_c) / params.cost_rate};
}

CovariateGenerator CovariateGenerator::truncated_poisson(double rate, int lo, int hi, bool raw_probabilities) {
    if (!(rate > 0.0) || lo < 0 || hi < lo) {
        throw DomainError("truncated Poisson needs rate > 0 and 0 <= lo <= hi");
    }
    CovariateGenerator g;
    g.kind_ = Kind::TruncatedPoisson;
    g.raw_ = raw_probabilities;
    for (int k = lo; k <= hi; ++k) {
        g.support_.push_back(k);
        g.weights_.push_back(std::exp(-rate + k * std::log(rate) - std::lgamma(k + 1.0)));
    }
    return g;
}

CovariateGenerator CovariateGenerator::fixed(std::vector<double> z) {
    CovariateGenerator g;
    g.kind_ = Kind::Fixed;
    g.fixed_ = std::move(z);
    return g;
}

CovariateGenerator CovariateGenerator::none() { return {}; }

std::size_t CovariateGenerator::dimension() const {
    switch (kind_) {
    case Kind::TruncatedPoisson: return 1;
    case Kind::Fixed: return fixed_.size();
    case Kind::None: return 0;
    }
    return 0;
}

std::vector<double> CovariateGenerator::probabilities() const {
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    std::vector<double> p(weights_.size());
    std::transform(weights_.begin(), weights_.end(), p.begin(), [&](double w) { return w / total; });
    return p;
}

std::vector<double> CovariateGenerator::sample(Engine& rng) const {
    switch (kind_) {
    case Kind::None:
        return {};
    case Kind::Fixed:
        return fixed_;
    case Kind::TruncatedPoisson: {
        const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
        for (;;) {
            // Raw mode: draws landing beyond the listed mass are "no event" and redrawn.
            const double scale = raw_ ? 1.0 : total;
            const double u = uniform_open(rng) * scale;
            double acc = 0.0;
            for (std::size_t k = 0; k < weights_.size(); ++k) {
                acc += weights_[k];
                if (u < acc) return {support_[k]};
            }
            if (!raw_) return {support_.back()};
        }
    }
    }
    return {};
}

std::vector<double> sample_covariate(const CovariateGenerator& gen, Engine& rng) { return gen.sample(rng); }

namespace {

double batch_means_se(std::span<const double> values, std::size_t batches) {
    const std::size_t size = values.size() / batches;
    if (size == 0 || batches < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const auto first = values.begin() + static_cast<std::ptrdiff_t>(b * size);
        means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / static_cast<double>(size);
    }
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
    double ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

double hill_tail_index(std::vector<double> values) {
    const std::size_t n = values.size();
    const std::size_t k = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
    if (n <= k) return std::numeric_limits<double>::infinity();
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end(), std::greater<>());
    const double threshold = values[k];
    if (!(threshold > 0.0)) return std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += std::log(values[i] / threshold);
    return s > 0.0 ? static_cast<double>(k) / s : std::numeric_limits<double>::infinity();
}

} // namespace

AcEstimate expected_ac(const std::function<EventDraw(Engine&)>& sampler, std::size_t n_mc, Engine& rng) {
    if (n_mc == 0) throw DomainError("expected_ac needs at least one draw");
    std::vector<double> ratios(n_mc);
    for (auto& r : ratios) {
        const EventDraw d = sampler(rng);
        r = d.y / d.x;
    }
    AcEstimate est;
    est.n = n_mc;
    est.mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / static_cast<double>(n_mc);
    if (n_mc > 1) {
        double ss = 0.0;
        for (double r : ratios) ss += (r - est.mean) * (r - est.mean);
        est.std_error = std::sqrt(ss / static_cast<double>(n_mc - 1) / static_cast<double>(n_mc));
    }
    constexpr std::size_t kBatches = 20;
    if (n_mc >= 4 * kBatches) {
        const double se_full = batch_means_se(ratios, kBatches);
        const double se_quarter = batch_means_se(std::span<const double>(ratios).first(n_mc / 4), kBatches);
        est.batch_se_ratio = se_quarter > 0.0 ? se_full / se_quarter : 0.0;
    }
    est.tail_index = hill_tail_index(ratios);
    // Finite variance needs a tail index above 2; the batch ratio should sit near 0.5.
    est.converged = n_mc < 100 || (est.tail_index > 2.0 && est.batch_se_ratio < 1.0);
    return est;
}

AcEstimate expected_ac(const ProcessParams& params, double t_prev, std::span<const double> z,
                       std::size_t n_mc, Engine& rng) {
    std::vector<double> zc(z.begin(), z.end());
    return expected_ac([&](Engine& r) { return sample_event(params, t_prev, zc, r); }, n_mc, rng);
}

std::vector<FailureEvent> simulate_stream(const ProcessParams& params, const CovariateGenerator& gen,
                                          std::size_t n, Engine& rng, double t0) {
    std::vector<FailureEvent> out;
    out.reserve(n);
    double t = t0;
    for (std::size_t i = 0; i < n; ++i) {
        FailureEvent ev;
        ev.index = i + 1;
        ev.z = gen.sample(rng);
        const EventDraw d = sample_event(params, t, ev.z, rng);
        if (!std::isfinite(d.x)) break;  // process has no further failures
        ev.x = d.x;
        ev.y = d.y;
        t += d.x;
        ev.t = t;
        out.push_back(std::move(ev));
    }
    return out;
}

} // namespace ranhpp

#include "ranhpp/intensity.hpp"

#include "ranhpp/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace ranhpp {

std::string to_string(IntensityKind kind) {
    switch (kind) {
    case IntensityKind::PowerLaw: return "power";
    case IntensityKind::LogLinear: return "loglinear";
    case IntensityKind::Homogeneous: return "hpp";
    }
    return "unknown";
}

IntensityKind parse_intensity_kind(const std::string& name) {
    if (name == "power" || name == "power-law" || name == "powerlaw") return IntensityKind::PowerLaw;
    if (name == "loglinear" || name == "log-linear") return IntensityKind::LogLinear;
    if (name == "hpp" || name == "homogeneous") return IntensityKind::Homogeneous;
    throw ConfigError("unknown intensity kind '" + name + "'");
}

IntensityModel IntensityModel::power_law(double gamma, double eta) {
    if (!(std::isfinite(gamma) && gamma > 0.0) || !(std::isfinite(eta) && eta > 0.0)) {
        throw DomainError("power-law intensity requires gamma > 0 and eta > 0");
    }
    return {IntensityKind::PowerLaw, gamma, eta};
}

IntensityModel IntensityModel::log_linear(double gamma, double eta) {
    if (!std::isfinite(gamma) || !std::isfinite(eta)) {
        throw DomainError("log-linear intensity requires finite gamma and eta");
    }
    return {IntensityKind::LogLinear, gamma, eta};
}

IntensityModel IntensityModel::homogeneous(double rate) {
    if (!(std::isfinite(rate) && rate > 0.0)) {
        throw DomainError("homogeneous intensity requires rate > 0");
    }
    return {IntensityKind::Homogeneous, rate, 0.0};
}

IntensityModel IntensityModel::make(IntensityKind kind, double gamma, double eta) {
    switch (kind) {
    case IntensityKind::PowerLaw: return power_law(gamma, eta);
    case IntensityKind::LogLinear: return log_linear(gamma, eta);
    case IntensityKind::Homogeneous: return homogeneous(gamma);
    }
    throw DomainError("unknown intensity kind");
}

namespace {

void require_time(double t) {
    if (!(t >= 0.0) || std::isnan(t)) {
        throw DomainError("time must be non-negative");
    }
}

} // namespace

double intensity(const IntensityModel& model, double t) {
    require_time(t);
    const double g = model.gamma();
    const double e = model.eta();
    switch (model.kind()) {
    case IntensityKind::PowerLaw:
        if (t == 0.0) {
            if (e < 1.0) throw DomainError("power-law intensity is infinite at t = 0 when eta < 1");
            return e == 1.0 ? g : 0.0;
        }
        return g * e * std::pow(t, e - 1.0);
    case IntensityKind::LogLinear:
        return std::exp(g + e * t);
    case IntensityKind::Homogeneous:
        return g;
    }
    return 0.0;
}

double mean_function(const IntensityModel& model, double t) {
    require_time(t);
    return mean_increment(model, 0.0, t);
}

double mean_increment(const IntensityModel& model, double t, double x) {
    require_time(t);
    if (!(x >= 0.0)) throw DomainError("interval length must be non-negative");
    if (x == 0.0) return 0.0;
    const double g = model.gamma();
    const double e = model.eta();
    switch (model.kind()) {
    case IntensityKind::PowerLaw:
        if (std::isinf(x)) return x;
        if (t == 0.0) return g * std::pow(x, e);
        // t^e * ((1 + x/t)^e - 1)
        return g * std::pow(t, e) * std::expm1(e * std::log1p(x / t));
    case IntensityKind::LogLinear:
        if (std::abs(e) < kLogLinearFlatEta) return std::exp(g + e * t) * x;
        if (std::isinf(x)) {
            return e > 0.0 ? x : -std::exp(g + e * t) / e;
        }
        return std::exp(g + e * t) * (std::expm1(e * x) / e);
    case IntensityKind::Homogeneous:
        return g * x;
    }
    return 0.0;
}

double invert_mean_increment(const IntensityModel& model, double t, double target) {
    require_time(t);
    if (!(target >= 0.0)) throw DomainError("target mean increment must be non-negative");
    if (target == 0.0) return 0.0;
    if (std::isinf(target)) return target;
    const double g = model.gamma();
    const double e = model.eta();
    switch (model.kind()) {
    case IntensityKind::PowerLaw: {
        if (t == 0.0) return std::pow(target / g, 1.0 / e);
        const double rel = target / (g * std::pow(t, e));
        return t * std::expm1(std::log1p(rel) / e);
    }
    case IntensityKind::LogLinear: {
        const double scaled = target * std::exp(-g - e * t);
        if (std::abs(e) < kLogLinearFlatEta) return scaled;
        const double arg = e * scaled;
        if (arg <= -1.0) return std::numeric_limits<double>::infinity();
        return std::log1p(arg) / e;
    }
    case IntensityKind::Homogeneous:
        return target / g;
    }
    return 0.0;
}

double remaining_mean(const IntensityModel& model, double t) {
    require_time(t);
    if (model.kind() == IntensityKind::LogLinear && model.eta() <= -kLogLinearFlatEta) {
        return std::exp(model.gamma() + model.eta() * t) / -model.eta();
    }
    return std::numeric_limits<double>::infinity();
}

double linear_predictor(const RiskModel& risk, std::span<const double> z) {
    if (z.size() != risk.beta.size()) {
        throw DimensionError("covariate vector has length " + std::to_string(z.size()) +
                             " but the risk model has " + std::to_string(risk.beta.size()) +
                             " coefficients");
    }
    return std::inner_product(risk.beta.begin(), risk.beta.end(), z.begin(), 0.0);
}

double risk_multiplier(const RiskModel& risk, std::span<const double> z) {
    return std::exp(linear_predictor(risk, z));
}

double adjusted_mean_function(const IntensityModel& model, const RiskModel& risk,
                              std::span<const double> z, double t) {
    const double m = risk_multiplier(risk, z);
    return mean_function(model, t) * m;
}

double adjusted_intensity(const IntensityModel& model, const RiskModel& risk,
                          std::span<const double> z, double t) {
    const double m = risk_multiplier(risk, z);
    return intensity(model, t) * m;
}

} // namespace ranhpp

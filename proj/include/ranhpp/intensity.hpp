#pragma once

#include <span>
#include <string>
#include <vector>

namespace ranhpp {

enum class IntensityKind { PowerLaw, LogLinear, Homogeneous };

std::string to_string(IntensityKind kind);
IntensityKind parse_intensity_kind(const std::string& name);

/// Baseline NHPP intensity.
///
///   PowerLaw:     lambda(t) = gamma * eta * t^(eta-1),  Lambda(t) = gamma * t^eta
///   LogLinear:    lambda(t) = exp(gamma + eta*t),       Lambda(t) = (exp(gamma+eta*t) - exp(gamma)) / eta
///   Homogeneous:  lambda(t) = gamma,                    Lambda(t) = gamma * t
///
/// Construction validates the parameter domain; instances are immutable.
class IntensityModel {
public:
    static IntensityModel power_law(double gamma, double eta);
    static IntensityModel log_linear(double gamma, double eta);
    static IntensityModel homogeneous(double rate);
    static IntensityModel make(IntensityKind kind, double gamma, double eta);

    IntensityKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double eta() const { return eta_; }

    /// Number of free baseline parameters (1 for Homogeneous, 2 otherwise).
    int parameter_count() const { return kind_ == IntensityKind::Homogeneous ? 1 : 2; }

private:
    IntensityModel(IntensityKind kind, double gamma, double eta)
        : kind_(kind), gamma_(gamma), eta_(eta) {}

    IntensityKind kind_;
    double gamma_;
    double eta_;
};

/// Proportional-hazards coefficients; an empty vector means no risk adjustment.
struct RiskModel {
    std::vector<double> beta;

    std::size_t dimension() const { return beta.size(); }
};

/// Below this |eta| the log-linear mean function uses its eta -> 0 limit.
inline constexpr double kLogLinearFlatEta = 1e-12;

/// Baseline intensity lambda(t). Throws DomainError for t < 0 and for a power law
/// with eta < 1 evaluated at t = 0.
double intensity(const IntensityModel& model, double t);

/// Baseline mean function Lambda(t) = integral of lambda over [0, t].
double mean_function(const IntensityModel& model, double t);

/// Lambda(t + x) - Lambda(t), evaluated without cancellation for small x.
double mean_increment(const IntensityModel& model, double t, double x);

/// Smallest x >= 0 with mean_increment(model, t, x) == target. Returns +inf when
/// the remaining mass of the process is below `target` (log-linear, eta < 0).
double invert_mean_increment(const IntensityModel& model, double t, double target);

/// Lambda(inf) - Lambda(t): finite only for a log-linear intensity with eta < 0.
double remaining_mean(const IntensityModel& model, double t);

/// exp(beta' z). Throws DimensionError when the lengths differ.
double risk_multiplier(const RiskModel& risk, std::span<const double> z);

/// beta' z. Throws DimensionError when the lengths differ.
double linear_predictor(const RiskModel& risk, std::span<const double> z);

/// Risk-adjusted mean function Lambda(t | z) = Lambda(t) * exp(beta' z).
double adjusted_mean_function(const IntensityModel& model, const RiskModel& risk,
                              std::span<const double> z, double t);

/// Risk-adjusted intensity lambda(t | z) = lambda(t) * exp(beta' z).
double adjusted_intensity(const IntensityModel& model, const RiskModel& risk,
                          std::span<const double> z, double t);

} // namespace ranhpp

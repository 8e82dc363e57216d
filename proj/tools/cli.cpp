#include "cli.hpp"

#include "ranhpp/arl.hpp"
#include "ranhpp/chart.hpp"
#include "ranhpp/error.hpp"
#include "ranhpp/estimation.hpp"
#include "ranhpp/ingest.hpp"
#include "ranhpp/io.hpp"
#include "ranhpp/rng.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>

#ifndef RANHPP_VERSION
#define RANHPP_VERSION "dev"
#endif

namespace ranhpp::cli {
namespace {

// Substream tags under the run seed.
constexpr std::uint64_t kSimulateStream = 0x53494D0000000001;
constexpr std::uint64_t kPhaseOneStream = 0x5048310000000001;

const std::vector<std::string> kIntensityNames = {"hpp", "power", "loglinear"};
const std::vector<std::string> kCopulaNames = {"gumbel", "frank", "clayton", "independence"};
const std::vector<std::string> kModeNames = {"ac", "tbe", "tc", "tbe-no-risk"};

struct ModelOptions {
    std::string params_file;
    std::string intensity = "power";
    double gamma = 0.05;
    double eta = 1.5;
    double mu = 1.0;
    std::vector<double> beta;
    std::string copula = "gumbel";
    double tau = 0.3;
};

struct CovariateOptions {
    std::string kind = "poisson";
    double rate = 1.0;
    int lo = 1;
    int hi = 3;
    bool raw = false;
    std::vector<double> fixed;
};

struct IngestOptions {
    std::string accidents;
    std::string date_format = "auto";
    std::string ties = "perturb";
    std::string date_column;
    std::vector<std::string> cost_columns;
    std::vector<std::string> factor_columns;
};

struct Options {
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string output;
    std::string format;

    ModelOptions model;
    CovariateOptions cov;
    IngestOptions ingest;

    // simulate
    std::size_t n_events = 100;
    double t0 = 0.0;
    double delta_gamma = 1.0;
    double delta_eta = 1.0;
    double delta_mu = 1.0;

    // fit
    std::string input;
    std::size_t holdout = 0;
    std::string fit_intensity = "auto";
    std::string fit_copula = "auto";
    std::string encoding = "lexicographic";
    std::string events_out;
    std::size_t max_iterations = 20'000;

    // chart
    std::string model_file;
    std::size_t last = 0;
    std::string mode = "ac";
    double alpha = 0.005;
    std::size_t n_mc = 10'000;
    std::string quantile_rule = "weibull";
    bool linear_axis = false;

    // arl
    std::size_t n_reps = 1'000;
    std::string engine = "order-statistic";
    std::size_t event_cap = 1'000'000;
    bool grid = false;
    std::vector<double> taus;
    std::vector<double> betas;
    std::vector<double> delta_mus;
    std::vector<std::string> shifts;
    bool compare = false;
    std::size_t phase1 = 0;
};

void add_common(CLI::App* sub, Options& o, bool with_format, const std::vector<std::string>& formats) {
    sub->add_option("--seed", o.seed, "Root seed of every random stream")->capture_default_str();
    sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)")->capture_default_str();
    sub->add_option("-o,--output", o.output, "Output file (default: standard output)");
    if (with_format) sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember(formats));
}

void add_model(CLI::App* sub, Options& o) {
    auto& m = o.model;
    sub->add_option("--params", m.params_file, "Parameters or model JSON; overrides the flags below")
        ->check(CLI::ExistingFile);
    sub->add_option("--intensity", m.intensity, "Baseline intensity")
        ->check(CLI::IsMember(kIntensityNames))
        ->capture_default_str();
    sub->add_option("--gamma", m.gamma, "Intensity scale")->capture_default_str();
    sub->add_option("--eta", m.eta, "Intensity shape (ignored for hpp)")->capture_default_str();
    sub->add_option("--mu", m.mu, "Exponential cost rate")->capture_default_str();
    sub->add_option("--beta", m.beta, "Risk coefficients (default: zeros)");
    sub->add_option("--copula", m.copula, "Copula family")->check(CLI::IsMember(kCopulaNames))->capture_default_str();
    sub->add_option("--tau", m.tau, "Kendall's tau of the copula")->capture_default_str();
}

void add_covariates(CLI::App* sub, Options& o) {
    auto& c = o.cov;
    sub->add_option("--covariates", c.kind, "Covariate generator")
        ->check(CLI::IsMember({"poisson", "fixed", "none"}))
        ->capture_default_str();
    sub->add_option("--z-rate", c.rate, "Poisson rate of the covariate")->capture_default_str();
    sub->add_option("--z-min", c.lo, "Smallest covariate value")->capture_default_str();
    sub->add_option("--z-max", c.hi, "Largest covariate value")->capture_default_str();
    sub->add_flag("--raw-truncation-probs", c.raw,
                  "Use the unnormalised Poisson probabilities on the support (redraw the rest)");
    sub->add_option("--z", c.fixed, "Covariate vector for --covariates fixed");
}

void add_ingest(CLI::App* sub, Options& o) {
    auto& g = o.ingest;
    sub->add_option("--accidents", g.accidents, "Raw accident CSV");
    sub->add_option("--date-format", g.date_format, "Accident date format")
        ->check(CLI::IsMember({"auto", "iso", "us"}))
        ->capture_default_str();
    sub->add_option("--ties", g.ties, "Equal timestamps: shift the later one 0.1 h, or reject")
        ->check(CLI::IsMember({"perturb", "reject"}))
        ->capture_default_str();
    sub->add_option("--date-column", g.date_column, "Header of the accident date column");
    sub->add_option("--cost-columns", g.cost_columns, "Headers of the six cost columns")->expected(6);
    sub->add_option("--factor-columns", g.factor_columns, "Headers of the five risk-factor columns")->expected(5);
}

void add_chart_settings(CLI::App* sub, Options& o) {
    sub->add_option("--mode", o.mode, "Chart statistic")->check(CLI::IsMember(kModeNames))->capture_default_str();
    sub->add_option("--alpha", o.alpha, "False-alarm probability per event")->capture_default_str();
    sub->add_option("--n-mc", o.n_mc, "Monte Carlo draws per control limit")->capture_default_str();
    sub->add_option("--quantile-rule", o.quantile_rule, "Empirical quantile rule")
        ->check(CLI::IsMember({"weibull", "type6", "linear", "type7"}))
        ->capture_default_str();
}

// Resolved configuration as metadata: program version, command, then every option.
Metadata resolved_metadata(const CLI::App& app, const std::string& command) {
    Metadata meta{{"program", std::string("ranhpp ") + RANHPP_VERSION}, {"command", command}};
    std::istringstream lines(app.get_subcommand(command)->config_to_str(true, false));
    std::string line;
    std::string section;
    while (std::getline(lines, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            section = line.substr(1, line.find(']') - 1);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(' ') + 1);
        value.erase(0, value.find_first_not_of(' '));
        // Neither changes the results, so equal seeds give byte-identical files.
        if (key == "config" || key == "help" || key == "output" || key == "workers") continue;
        if (section.empty() && key.rfind(command + ".", 0) == 0) key.erase(0, command.size() + 1);
        meta.emplace_back(key, value);
    }
    return meta;
}

void write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write '" + path + "'");
        f << content;
        if (!f.flush()) throw IoError("cannot write '" + path + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot write '" + path + "'");
    }
}

// All output is assembled in memory and written at the end so a failed run
// leaves no partial file behind.
void emit(const Options& o, const std::string& content, std::ostream& out) {
    if (o.output.empty()) {
        out << content;
        out.flush();
        return;
    }
    write_file(o.output, content);
}

CovariateGenerator make_generator(const CovariateOptions& c) {
    if (c.kind == "none") return CovariateGenerator::none();
    if (c.kind == "fixed") {
        if (c.fixed.empty()) throw ConfigError("--covariates fixed needs --z");
        return CovariateGenerator::fixed(c.fixed);
    }
    if (c.lo > c.hi) throw ConfigError("--z-min exceeds --z-max");
    return CovariateGenerator::truncated_poisson(c.rate, c.lo, c.hi, c.raw);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ProcessParams make_params(const ModelOptions& m, std::size_t dimension) {
    if (!m.params_file.empty()) {
        ProcessParams p = params_from_json(read_text(m.params_file));
        if (p.risk.dimension() == 0 && dimension > 0) p.risk.beta.assign(dimension, 0.0);
        if (p.risk.dimension() != dimension) {
            throw DimensionError("parameter file has " + std::to_string(p.risk.dimension()) +
                                 " risk coefficients but the covariates have dimension " + std::to_string(dimension));
        }
        return p;
    }
    const IntensityKind kind = parse_intensity_kind(m.intensity);
    RiskModel risk;
    if (m.beta.empty()) {
        risk.beta.assign(dimension, 0.0);
    } else if (m.beta.size() == dimension) {
        risk.beta = m.beta;
    } else {
        throw DimensionError("--beta has " + std::to_string(m.beta.size()) + " values but the covariates have dimension " +
                             std::to_string(dimension));
    }
    ProcessParams p{IntensityModel::make(kind, m.gamma, kind == IntensityKind::Homogeneous ? 1.0 : m.eta),
                    std::move(risk), m.mu, CopulaSpec::from_tau(parse_copula_family(m.copula), m.tau)};
    p.validate();
    return p;
}

IngestConfig ingest_config(const IngestOptions& g) {
    IngestConfig cfg;
    cfg.date_format = g.date_format == "iso" ? DateFormat::Iso : g.date_format == "us" ? DateFormat::Us : DateFormat::Auto;
    if (!g.date_column.empty()) cfg.columns.date = g.date_column;
    if (!g.cost_columns.empty()) std::copy(g.cost_columns.begin(), g.cost_columns.end(), cfg.columns.costs.begin());
    if (!g.factor_columns.empty()) {
        std::copy(g.factor_columns.begin(), g.factor_columns.end(), cfg.columns.factors.begin());
    }
    return cfg;
}

DeriveConfig derive_config(const IngestOptions& g) {
    DeriveConfig cfg;
    cfg.ties = g.ties == "reject" ? TiePolicy::Reject : TiePolicy::Perturb;
    return cfg;
}

LoadReport load_and_report(const IngestOptions& g, std::ostream& err, Metadata& meta) {
    LoadReport report = load_accidents(g.accidents, ingest_config(g));
    err << "ingest: " << report.accidents.size() << " records loaded, " << report.rejects.size() << " rejected, "
        << report.warnings.size() << " warnings\n";
    for (const auto& r : report.rejects) err << "  reject row " << r.row << ": " << r.reason << '\n';
    meta.emplace_back("records", std::to_string(report.accidents.size()));
    meta.emplace_back("rejected", std::to_string(report.rejects.size()));
    return report;
}

void report_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    constexpr std::size_t shown = 10;
    for (std::size_t i = 0; i < std::min(shown, warnings.size()); ++i) err << "  warning: " << warnings[i] << '\n';
    if (warnings.size() > shown) err << "  ... " << warnings.size() - shown << " more warnings\n";
}

// Shift list entries "dg:de".
std::vector<std::pair<double, double>> parse_shifts(const std::vector<std::string>& items) {
    std::vector<std::pair<double, double>> out;
    for (const auto& s : items) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) throw ConfigError("shift '" + s + "' is not of the form dg:de");
        try {
            out.emplace_back(parse_double(s.substr(0, colon)), parse_double(s.substr(colon + 1)));
        } catch (const IoError&) {
            throw ConfigError("shift '" + s + "' is not of the form dg:de");
        }
    }
    return out;
}

ArlConfig arl_config(const Options& o) {
    ArlConfig cfg;
    cfg.alpha = o.alpha;
    cfg.n_mc = o.n_mc;
    cfg.seed = o.seed;
    cfg.mode = parse_chart_mode(o.mode);
    cfg.engine = parse_arl_engine(o.engine);
    cfg.quantile_rule = parse_quantile_rule(o.quantile_rule);
    cfg.event_cap = o.event_cap;
    cfg.workers = o.workers;
    cfg.validate();
    return cfg;
}

std::string format_or(const Options& o, const std::string& fallback) { return o.format.empty() ? fallback : o.format; }

int cmd_simulate(const Options& o, const CLI::App& app, std::ostream& out) {
    if (format_or(o, "csv") != "csv") throw ConfigError("simulate writes CSV only");
    const CovariateGenerator gen = make_generator(o.cov);
    const ProcessParams ic = make_params(o.model, gen.dimension());
    const ProcessParams data = apply_shift(ic, {o.delta_gamma, o.delta_eta, o.delta_mu});
    Engine rng = make_stream(o.seed, {kSimulateStream});
    const auto events = simulate_stream(data, gen, o.n_events, rng, o.t0);
    std::ostringstream buf;
    write_events_csv(buf, events, gen.dimension(), resolved_metadata(app, "simulate"));
    emit(o, buf.str(), out);
    return kExitOk;
}

void append_fit_rows(std::ostringstream& buf, const FitResult& fit) {
    const auto& p = fit.params;
    buf << "parameter,estimate\n";
    buf << "intensity," << to_string(p.intensity.kind()) << '\n';
    buf << "gamma," << format_double(p.intensity.gamma()) << '\n';
    if (p.intensity.kind() != IntensityKind::Homogeneous) buf << "eta," << format_double(p.intensity.eta()) << '\n';
    for (std::size_t k = 0; k < p.risk.beta.size(); ++k) {
        buf << "beta" << k + 1 << ',' << format_double(p.risk.beta[k]) << '\n';
        buf << "hr" << k + 1 << ',' << format_double(fit.hazard_ratios[k]) << '\n';
    }
    buf << "mu," << format_double(p.cost_rate) << '\n';
    buf << "copula," << to_string(p.copula.family()) << '\n';
    buf << "theta," << format_double(p.copula.theta()) << '\n';
    buf << "tau," << format_double(p.copula.tau()) << '\n';
    buf << "log_lik," << format_double(fit.log_lik_x + fit.log_lik_y + fit.log_lik_c) << '\n';
    buf << "k," << fit.k << '\n';
    buf << "aic," << format_double(fit.aic) << '\n';
    buf << "n_events," << fit.n_events << '\n';
}

int cmd_fit(const Options& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
    const std::string format = format_or(o, "json");
    if (format != "json" && format != "csv") throw ConfigError("fit writes JSON or CSV");
    if (o.input.empty() == o.ingest.accidents.empty()) throw ConfigError("fit needs exactly one of --input, --accidents");

    Metadata meta = resolved_metadata(app, "fit");
    std::vector<FailureEvent> events;
    std::optional<EncodingMap> encoding;
    if (!o.input.empty()) {
        events = read_events_csv(o.input).events;
    } else {
        const LoadReport loaded = load_and_report(o.ingest, err, meta);
        report_warnings(loaded.warnings, err);
        const std::size_t n = loaded.accidents.size();
        if (o.holdout >= n) throw DomainError("--holdout leaves no training records");
        const std::span<const RawAccident> all(loaded.accidents);
        encoding = build_encoding(all.first(n - o.holdout), parse_encoding_strategy(o.encoding));
        DeriveReport derived = derive_events(all, *encoding, derive_config(o.ingest));
        report_warnings(derived.warnings, err);
        events = std::move(derived.events);
        if (!o.events_out.empty()) {
            std::ostringstream ev;
            write_events_csv(ev, events, kRiskFactors, meta);
            write_file(o.events_out, ev.str());
        }
    }
    if (o.holdout >= events.size()) throw DomainError("--holdout leaves no training events");
    const std::span<const FailureEvent> training(events.data(), events.size() - o.holdout);
    meta.emplace_back("training_events", std::to_string(training.size()));

    std::vector<IntensityKind> kinds;
    if (o.fit_intensity == "auto") {
        kinds = {IntensityKind::PowerLaw, IntensityKind::LogLinear, IntensityKind::Homogeneous};
    } else {
        kinds = {parse_intensity_kind(o.fit_intensity)};
    }
    std::vector<CopulaFamily> families;
    if (o.fit_copula == "auto") {
        families = {CopulaFamily::Gumbel, CopulaFamily::Frank, CopulaFamily::Clayton};
    } else {
        families = {parse_copula_family(o.fit_copula)};
    }
    OptimizerConfig opt;
    opt.max_iterations = o.max_iterations;
    const FitResult fit = select_model(training, kinds, families, opt, o.workers);
    if (!fit.convergence.converged) err << "warning: intensity fit did not converge (" << fit.convergence.status << ")\n";

    std::ostringstream buf;
    if (format == "json") {
        write_model_json(buf, fit, encoding, meta);
    } else {
        write_comment_metadata(buf, meta);
        append_fit_rows(buf, fit);
    }
    emit(o, buf.str(), out);
    return kExitOk;
}

int cmd_chart(const Options& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
    const std::string format = format_or(o, "csv");
    if (o.input.empty() == o.ingest.accidents.empty()) {
        throw ConfigError("chart needs exactly one of --input, --accidents");
    }
    const ModelFile model = read_model_json(o.model_file);
    Metadata meta = resolved_metadata(app, "chart");

    std::vector<FailureEvent> events;
    if (!o.input.empty()) {
        events = read_events_csv(o.input).events;
    } else {
        if (!model.encoding) throw ConfigError("model file has no category encoding; chart the events CSV instead");
        const LoadReport loaded = load_and_report(o.ingest, err, meta);
        DeriveReport derived = derive_events(loaded.accidents, *model.encoding, derive_config(o.ingest));
        report_warnings(derived.warnings, err);
        events = std::move(derived.events);
    }
    std::span<const FailureEvent> stream(events);
    if (o.last > 0 && o.last < stream.size()) stream = stream.last(o.last);

    ChartConfig cfg;
    cfg.alpha = o.alpha;
    cfg.n_mc = o.n_mc;
    cfg.seed = o.seed;
    cfg.mode = parse_chart_mode(o.mode);
    cfg.quantile_rule = parse_quantile_rule(o.quantile_rule);
    cfg.workers = o.workers;
    const auto points = run_chart(stream, model.fit.params, cfg);
    const SignalSummary s = summarize(points);
    meta.emplace_back("points", std::to_string(s.points));
    meta.emplace_back("below_lcl", std::to_string(s.below_lcl));
    meta.emplace_back("above_ucl", std::to_string(s.above_ucl));
    err << "chart: " << s.points << " points, " << s.below_lcl << " below LCL, " << s.above_ucl << " above UCL\n";

    std::ostringstream buf;
    if (format == "json") {
        write_chart_json(buf, points, cfg.mode, meta);
    } else if (format == "svg") {
        write_chart_svg(buf, points, cfg.mode, meta, !o.linear_axis);
    } else {
        write_chart_csv(buf, points, meta);
    }
    emit(o, buf.str(), out);
    return kExitOk;
}

int cmd_arl(const Options& o, const CLI::App& app, std::ostream& out, std::ostream& err) {
    const std::string format = format_or(o, "csv");
    if (format != "csv" && format != "json") throw ConfigError("arl writes CSV or JSON");
    const CovariateGenerator gen = make_generator(o.cov);
    const ArlConfig cfg = arl_config(o);
    Metadata meta = resolved_metadata(app, "arl");
    std::ostringstream buf;

    if (o.compare) {
        const ProcessParams truth = make_params(o.model, gen.dimension());
        ProcessParams fitted_risk = truth;
        ProcessParams fitted_plain = without_risk(truth);
        if (o.phase1 > 0) {
            // Phase I: fit both charts' parameters to an in-control sample.
            Engine rng = make_stream(o.seed, {kPhaseOneStream});
            const auto sample = simulate_stream(truth, gen, o.phase1, rng);
            const TbeFit with = fit_tbe(truth.intensity.kind(), sample);
            const TbeFit without = fit_tbe(truth.intensity.kind(), strip_covariates(sample));
            fitted_risk = {with.intensity, with.risk, truth.cost_rate, truth.copula};
            fitted_plain = {without.intensity, {}, truth.cost_rate, truth.copula};
            err << "phase I: risk-adjusted fit gamma=" << format_double(with.intensity.gamma())
                << " eta=" << format_double(with.intensity.eta()) << "; plain fit gamma="
                << format_double(without.intensity.gamma()) << " eta=" << format_double(without.intensity.eta())
                << '\n';
            meta.emplace_back("phase1_risk_adjusted", params_to_json(fitted_risk));
            meta.emplace_back("phase1_plain", params_to_json(fitted_plain));
        }
        const auto shifts = o.shifts.empty() ? standard_shift_rows() : parse_shifts(o.shifts);
        const auto rows = compare_tbe_charts(truth, fitted_risk, fitted_plain, shifts, gen, cfg, o.n_reps);
        std::size_t capped = 0;
        for (const auto& r : rows) capped += r.risk_adjusted.n_capped + r.unadjusted.n_capped;
        if (capped > 0) err << "arl: " << capped << " replications hit the event cap\n";
        if (format == "json") {
            write_comparison_json(buf, rows, meta);
        } else {
            write_comparison_csv(buf, rows, meta);
        }
        emit(o, buf.str(), out);
        return kExitOk;
    }

    GridSpec grid;
    if (o.grid) grid = standard_grid();
    const double beta0 = o.model.beta.empty() ? 0.0 : o.model.beta.front();
    if (!o.grid) {
        grid.shifts = {{o.delta_gamma, o.delta_eta}};
        grid.delta_mu = {o.delta_mu};
        grid.betas = {beta0};
        grid.taus = {o.model.tau};
    }
    if (!o.shifts.empty()) grid.shifts = parse_shifts(o.shifts);
    if (!o.delta_mus.empty()) grid.delta_mu = o.delta_mus;
    if (!o.betas.empty()) grid.betas = o.betas;
    if (!o.taus.empty()) grid.taus = o.taus;

    ModelOptions base_opts = o.model;
    base_opts.beta.clear();
    const ProcessParams base = make_params(base_opts, gen.dimension());
    const auto cells = arl_grid(base, grid, gen, cfg, o.n_reps);
    std::size_t capped = 0;
    for (const auto& c : cells) capped += c.result.n_capped;
    if (capped > 0) err << "arl: " << capped << " replications hit the event cap\n";
    if (format == "json") {
        write_grid_json(buf, cells, meta);
    } else {
        write_grid_csv(buf, cells, meta);
    }
    emit(o, buf.str(), out);
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Risk-adjusted monitoring of failure times and costs"};
    app.name("ranhpp");
    app.set_version_flag("--version", std::string("ranhpp ") + RANHPP_VERSION);
    app.set_config("--config", "", "key=value configuration file; flags override it")->envname(kConfigEnv);
    app.require_subcommand(1);
    app.fallthrough();  // --config may follow the subcommand

    Options o;

    auto* sim = app.add_subcommand("simulate", "Simulate an event stream");
    add_common(sim, o, true, {"csv"});
    add_model(sim, o);
    add_covariates(sim, o);
    sim->add_option("-n,--n-events", o.n_events, "Number of events")->capture_default_str();
    sim->add_option("--t0", o.t0, "Start time")->capture_default_str();
    sim->add_option("--delta-gamma", o.delta_gamma, "Multiplicative shift of gamma")->capture_default_str();
    sim->add_option("--delta-eta", o.delta_eta, "Multiplicative shift of eta")->capture_default_str();
    sim->add_option("--delta-mu", o.delta_mu, "Multiplicative shift of mu")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Fit intensity, cost and copula models");
    add_common(fit, o, true, {"json", "csv"});
    add_ingest(fit, o);
    fit->add_option("-i,--input", o.input, "Events CSV");
    fit->add_option("--holdout", o.holdout, "Leave the last K events out of the fit")->capture_default_str();
    fit->add_option("--intensity", o.fit_intensity, "Intensity candidates")
        ->check(CLI::IsMember({"auto", "hpp", "power", "loglinear"}))
        ->capture_default_str();
    fit->add_option("--copula", o.fit_copula, "Copula candidates")
        ->check(CLI::IsMember({"auto", "gumbel", "frank", "clayton", "independence"}))
        ->capture_default_str();
    fit->add_option("--encoding", o.encoding, "Category order of the risk factors")
        ->check(CLI::IsMember({"lexicographic", "frequency"}))
        ->capture_default_str();
    fit->add_option("--events-out", o.events_out, "Also write the derived events CSV");
    fit->add_option("--max-iterations", o.max_iterations, "Optimiser iteration limit")->capture_default_str();

    auto* chart = app.add_subcommand("chart", "Run a Phase II chart");
    add_common(chart, o, true, {"csv", "json", "svg"});
    add_ingest(chart, o);
    add_chart_settings(chart, o);
    chart->add_option("-m,--model", o.model_file, "Model JSON written by fit")->required();
    chart->add_option("-i,--input", o.input, "Events CSV");
    chart->add_option("--last", o.last, "Monitor only the last K events (0 = all)")->capture_default_str();
    chart->add_flag("--linear-axis", o.linear_axis, "SVG: linear instead of log vertical axis");

    auto* arl = app.add_subcommand("arl", "Estimate average run lengths");
    add_common(arl, o, true, {"csv", "json"});
    add_model(arl, o);
    add_covariates(arl, o);
    add_chart_settings(arl, o);
    arl->add_option("--n-reps", o.n_reps, "Replications per cell")->capture_default_str();
    arl->add_option("--engine", o.engine, "Run-length engine")
        ->check(CLI::IsMember({"order-statistic", "os", "montecarlo", "mc"}))
        ->capture_default_str();
    arl->add_option("--event-cap", o.event_cap, "Abort a replication after this many events")->capture_default_str();
    arl->add_option("--delta-gamma", o.delta_gamma, "Multiplicative shift of gamma")->capture_default_str();
    arl->add_option("--delta-eta", o.delta_eta, "Multiplicative shift of eta")->capture_default_str();
    arl->add_option("--delta-mu", o.delta_mu, "Multiplicative shift of mu")->capture_default_str();
    arl->add_flag("--grid", o.grid, "Run the standard grid (lists below override its axes)");
    arl->add_option("--taus", o.taus, "Grid axis: Kendall's tau");
    arl->add_option("--betas", o.betas, "Grid axis: common risk coefficient");
    arl->add_option("--delta-mus", o.delta_mus, "Grid axis: cost-rate shifts");
    arl->add_option("--shifts", o.shifts, "Grid axis: intensity shifts as dg:de");
    arl->add_flag("--compare", o.compare, "Compare risk-adjusted and unadjusted TBE charts");
    arl->add_option("--phase1", o.phase1, "Compare mode: refit both charts on this many in-control events (0 = true parameters)")
        ->capture_default_str();

    // CLI11 silently skips a missing file named by the environment; treat it like --config.
    if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') {
        bool explicit_config = false;
        for (int i = 1; i < argc; ++i) {
            const std::string_view a = argv[i];
            if (a == "--config" || a.rfind("--config=", 0) == 0) explicit_config = true;
        }
        if (!explicit_config && !std::filesystem::is_regular_file(env)) {
            err << "ranhpp: configuration error: " << kConfigEnv << " names a missing file: " << env << '\n';
            return kExitIo;
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "ranhpp: " << e.what() << '\n';
        return kExitIo;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o, app, out);
        if (fit->parsed()) return cmd_fit(o, app, out, err);
        if (chart->parsed()) return cmd_chart(o, app, out, err);
        if (arl->parsed()) return cmd_arl(o, app, out, err);
    } catch (const IoError& e) {
        err << "ranhpp: I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConfigError& e) {
        err << "ranhpp: configuration error: " << e.what() << '\n';
        return kExitIo;
    } catch (const DomainError& e) {
        err << "ranhpp: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const DimensionError& e) {
        err << "ranhpp: dimension mismatch: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const ConvergenceError& e) {
        err << "ranhpp: did not converge: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitIo;
}

} // namespace ranhpp::cli
